"""Overlap metrics on label maps: Dice (DSC) and Jaccard (JAC)."""

from typing import Tuple

import numpy as np


def _masks(pred: np.ndarray, gt: np.ndarray, class_id: int) -> Tuple[np.ndarray, np.ndarray]:
    pred, gt = np.asarray(pred), np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"Label maps differ in shape: {pred.shape} vs {gt.shape}")
    return pred == class_id, gt == class_id


def dice_coefficient(pred: np.ndarray, gt: np.ndarray, class_id: int) -> float:
    """2|A∩B| / (|A|+|B|); both empty → 1.0, one empty → 0.0."""
    a, b = _masks(pred, gt, class_id)
    size_a, size_b = int(a.sum()), int(b.sum())
    if size_a + size_b == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / (size_a + size_b)


def jaccard(pred: np.ndarray, gt: np.ndarray, class_id: int) -> float:
    """|A∩B| / |A∪B|; both empty → 1.0, one empty → 0.0."""
    a, b = _masks(pred, gt, class_id)
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return 1.0
    return int(np.logical_and(a, b).sum()) / union
