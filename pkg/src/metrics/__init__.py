"""Training loss, segmentation metrics and method ranking."""

from .losses import (
    CE_WEIGHT,
    DICE_SMOOTH,
    DICE_WEIGHT,
    LossResult,
    combined_loss,
    evaluate_loss,
    loss_and_gradients,
    one_hot,
    soft_combined_loss,
)
from .overlap import dice_coefficient, jaccard
from .distance import assd, boundary, hausdorff
from .ranking import (
    AVERAGE,
    METRICS,
    RECORD_COLUMNS,
    STRUCTURES,
    MetricTable,
    minmax_score,
    summary_frame,
)

__all__ = [
    "CE_WEIGHT",
    "DICE_SMOOTH",
    "DICE_WEIGHT",
    "LossResult",
    "combined_loss",
    "evaluate_loss",
    "loss_and_gradients",
    "one_hot",
    "soft_combined_loss",
    "dice_coefficient",
    "jaccard",
    "assd",
    "boundary",
    "hausdorff",
    "AVERAGE",
    "METRICS",
    "RECORD_COLUMNS",
    "STRUCTURES",
    "MetricTable",
    "minmax_score",
    "summary_frame",
]
