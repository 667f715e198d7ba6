"""
Portable random number generation: splitmix64 for uniforms, Box–Muller for normals.

Draws are vectorised in numpy uint64 arithmetic. The k-th output of a
splitmix64 stream only depends on ``state + k * GOLDEN``, so a batch of n
draws is the same sequence as n scalar draws.
"""

from typing import Hashable, Optional

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix64(value: int) -> int:
    """One splitmix64 output for the state ``value`` (after the increment)."""
    state = np.array([(value + GOLDEN) & MASK64], dtype=np.uint64)
    return int(_mix(state)[0])


def _key_to_int(key: Hashable) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & MASK64
    # FNV-1a over the UTF-8 text; Python's hash() is salted per process
    acc = 0xCBF29CE484222325
    for byte in str(key).encode("utf-8"):
        acc = ((acc ^ byte) * 0x100000001B3) & MASK64
    return acc


def derive_seed(seed: int, *keys: Hashable) -> int:
    """
    Derive a child seed from a parent seed and a path of keys.

    Args:
        seed: Parent seed
        *keys: Integers or strings naming the child stream

    Returns:
        64-bit child seed
    """
    value = seed & MASK64
    for key in keys:
        value = splitmix64(value ^ _key_to_int(key))
    return value


class Rng:
    """Deterministic generator with a 64-bit splitmix64 state."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.state = self.seed

    def child(self, *keys: Hashable) -> "Rng":
        """Independent generator derived from this generator's seed and ``keys``."""
        return Rng(derive_seed(self.seed, *keys))

    def next_uint64(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit outputs."""
        if n < 0:
            raise ValueError(f"Draw count must be non-negative, got {n}")
        steps = np.arange(1, n + 1, dtype=np.uint64) * np.uint64(GOLDEN)
        states = np.uint64(self.state) + steps
        self.state = (self.state + n * GOLDEN) & MASK64
        return _mix(states)

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """``n`` uniform draws in [low, high) with 53-bit resolution."""
        unit = (self.next_uint64(n) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
        return low + (high - low) * unit

    def normal(self, n: int, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
        """``n`` Gaussian draws via Box–Muller (cos branch first, then sin)."""
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        u1 = 1.0 - u[0::2]  # (0, 1], keeps log finite
        u2 = u[1::2]
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return mean + std * out[:n]

    def uniform_scalar(self, low: float = 0.0, high: float = 1.0) -> float:
        return float(self.uniform(1, low, high)[0])

    def integers(self, low: int, high: int, n: Optional[int] = None):
        """Integers in [low, high); a scalar when ``n`` is None."""
        if high <= low:
            raise ValueError(f"Empty integer range [{low}, {high})")
        count = 1 if n is None else n
        values = low + np.floor(self.uniform(count) * (high - low)).astype(np.int64)
        values = np.minimum(values, high - 1)
        return int(values[0]) if n is None else values

    def permutation(self, n: int) -> np.ndarray:
        """Random permutation of ``range(n)``."""
        return np.argsort(self.uniform(n), kind="stable")

    def beta(self, a: float, b: float) -> float:
        """
        One Beta(a, b) draw by Jöhnk's rejection method in log space.

        Args:
            a: First shape parameter (> 0)
            b: Second shape parameter (> 0)

        Returns:
            Draw in [0, 1]
        """
        if a <= 0 or b <= 0:
            raise ValueError(f"Beta parameters must be positive, got ({a}, {b})")
        while True:
            u, v = 1.0 - self.uniform(2)
            log_x = np.log(u) / a
            log_y = np.log(v) / b
            log_sum = np.logaddexp(log_x, log_y)
            if log_sum <= 0.0:
                return float(np.exp(log_x - log_sum))
