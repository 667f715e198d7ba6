"""Dense float64 tensors with tape-based reverse-mode differentiation."""

from .tensor import Tensor, as_tensor, check_finite, from_flat
from .rng import Rng, derive_seed
from .tape import PRIMITIVES, Node, Tape, backward, record_primitive
from .gradcheck import analytic_gradient, finite_difference_check

__all__ = [
    "Tensor",
    "as_tensor",
    "check_finite",
    "from_flat",
    "Rng",
    "derive_seed",
    "PRIMITIVES",
    "Node",
    "Tape",
    "backward",
    "record_primitive",
    "analytic_gradient",
    "finite_difference_check",
]
