"""
Central finite-difference verification of tape gradients.
"""

from typing import Callable, Iterable, Optional

import numpy as np

from src.autodiff.rng import Rng
from src.autodiff.tape import Tape, backward
from src.autodiff.tensor import Tensor, as_tensor
from src.utils.errors import NonFiniteError

# Builds a scalar graph from an input node: (tape, x_id) -> root_id
GraphFn = Callable[[Tape, int], int]


def _evaluate(f: GraphFn, x: Tensor) -> float:
    tape = Tape()
    root = f(tape, tape.leaf(x, "x"))
    value = tape.value(root)
    if value.size != 1:
        raise ValueError(f"Function must be scalar-valued, got shape {value.shape}")
    result = float(value.reshape(()))
    if not np.isfinite(result):
        raise NonFiniteError(f"Function value is not finite: {result}")
    return result


def analytic_gradient(f: GraphFn, x: Tensor) -> Tensor:
    """Gradient of ``f`` at ``x`` from the tape."""
    tape = Tape()
    x_id = tape.leaf(x, "x")
    root = f(tape, x_id)
    return backward(tape, root).get(x_id, np.zeros_like(x))


def finite_difference_check(
    f: GraphFn,
    x,
    h: float = 1e-5,
    coords: Optional[Iterable[int]] = None,
    num_samples: Optional[int] = None,
    seed: int = 0,
) -> float:
    """
    Compare the tape gradient with central differences.

    Args:
        f: Graph builder returning a scalar node
        x: Point of evaluation
        h: Step size
        coords: Flat coordinates to check (default: all, or a sample)
        num_samples: If set and ``coords`` is None, check this many random coordinates
        seed: Seed for coordinate sampling

    Returns:
        max |analytic − central| / max(1e-12, |analytic| + |central|)
    """
    x = as_tensor(x, "x")
    analytic = analytic_gradient(f, x).reshape(-1)

    if coords is None:
        if num_samples is not None and num_samples < x.size:
            coords = Rng(seed).permutation(x.size)[:num_samples]
        else:
            coords = range(x.size)

    worst = 0.0
    for index in coords:
        shifted = x.copy().reshape(-1)
        shifted[index] = x.flat[index] + h
        f_plus = _evaluate(f, shifted.reshape(x.shape))
        shifted[index] = x.flat[index] - h
        f_minus = _evaluate(f, shifted.reshape(x.shape))
        central = (f_plus - f_minus) / (2.0 * h)
        a = float(analytic[index])
        error = abs(a - central) / max(1e-12, abs(a) + abs(central))
        worst = max(worst, error)
    return worst
