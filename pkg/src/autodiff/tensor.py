"""
Tensor conventions.

A tensor is a C-contiguous float64 ``numpy.ndarray``: ``shape`` is the array
shape and the row-major flattening is the data vector. Images are laid out
batch × channel × height × width.
"""

from typing import Iterable, Sequence

import numpy as np

from src.utils.errors import NonFiniteError

Tensor = np.ndarray


def as_tensor(value, name: str = "tensor") -> Tensor:
    """
    Convert a value to a finite float64 tensor.

    Args:
        value: Array-like input
        name: Label used in error messages

    Returns:
        C-contiguous float64 array

    Raises:
        NonFiniteError: If any entry is NaN or infinite
    """
    raw = np.asarray(value, dtype=np.float64)
    array = np.ascontiguousarray(raw).reshape(raw.shape)
    check_finite(array, name)
    return array


def check_finite(array: np.ndarray, name: str = "tensor") -> None:
    """Raise NonFiniteError if ``array`` holds NaN or infinity."""
    if not np.all(np.isfinite(array)):
        bad = int(np.size(array) - np.count_nonzero(np.isfinite(array)))
        raise NonFiniteError(f"{name}: {bad} non-finite value(s) in array of shape {array.shape}")


def from_flat(shape: Sequence[int], data: Iterable[float]) -> Tensor:
    """Build a tensor from a shape and row-major data."""
    shape = tuple(int(d) for d in shape)
    if any(d <= 0 for d in shape):
        raise ValueError(f"Tensor dimensions must be positive, got {shape}")
    flat = np.asarray(list(data), dtype=np.float64)
    if flat.size != int(np.prod(shape)):
        raise ValueError(f"Data length {flat.size} does not match shape {shape}")
    return as_tensor(flat.reshape(shape))
