"""
Boundary metrics in pixel units: Hausdorff distance (HD) and average symmetric
surface distance (ASSD).

Distances come from exact Euclidean distance transforms, so they equal the
brute-force minimum over point pairs.
"""

from typing import Tuple

import numpy as np
from scipy import ndimage

_FOUR_NEIGHBOURS = ndimage.generate_binary_structure(2, 1)


def _masks(pred: np.ndarray, gt: np.ndarray, class_id: int) -> Tuple[np.ndarray, np.ndarray]:
    pred, gt = np.asarray(pred), np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"Label maps differ in shape: {pred.shape} vs {gt.shape}")
    return pred == class_id, gt == class_id


def _diagonal(shape: Tuple[int, ...]) -> float:
    return float(np.hypot(*shape))


def _distance_to(mask: np.ndarray) -> np.ndarray:
    """Per-pixel Euclidean distance to the nearest pixel of ``mask`` (non-empty)."""
    return ndimage.distance_transform_edt(~mask)


def boundary(mask: np.ndarray) -> np.ndarray:
    """Pixels of ``mask`` with at least one 4-neighbour outside it; the image border counts as outside."""
    eroded = ndimage.binary_erosion(mask, structure=_FOUR_NEIGHBOURS, border_value=0)
    return mask & ~eroded


def hausdorff(pred: np.ndarray, gt: np.ndarray, class_id: int) -> float:
    """
    Symmetric Hausdorff distance between the class pixel sets.

    Both empty → 0; exactly one empty → image diagonal.
    """
    a, b = _masks(pred, gt, class_id)
    if not a.any() and not b.any():
        return 0.0
    if not a.any() or not b.any():
        return _diagonal(a.shape)
    a_to_b = _distance_to(b)[a].max()
    b_to_a = _distance_to(a)[b].max()
    return float(max(a_to_b, b_to_a))


def assd(pred: np.ndarray, gt: np.ndarray, class_id: int) -> float:
    """
    (Σ_{a∈∂A} d(a,∂B) + Σ_{b∈∂B} d(b,∂A)) / (|∂A| + |∂B|).

    Empty-mask conventions follow ``hausdorff``.
    """
    a, b = _masks(pred, gt, class_id)
    if not a.any() and not b.any():
        return 0.0
    if not a.any() or not b.any():
        return _diagonal(a.shape)
    edge_a, edge_b = boundary(a), boundary(b)
    total = _distance_to(edge_b)[edge_a].sum() + _distance_to(edge_a)[edge_b].sum()
    return float(total / (edge_a.sum() + edge_b.sum()))
