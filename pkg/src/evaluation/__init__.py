"""Test-time augmentation and the evaluation harness."""

from .tta import ROTATIONS, predict_labels, single_predict, tta_predict
from .harness import (
    EvalReport,
    compare_report,
    evaluate,
    evaluate_predictions,
    evaluate_records,
    image_records,
    predict_dataset,
    timed_records,
    write_report,
)

__all__ = [
    "ROTATIONS",
    "predict_labels",
    "single_predict",
    "tta_predict",
    "EvalReport",
    "compare_report",
    "evaluate",
    "evaluate_predictions",
    "evaluate_records",
    "image_records",
    "predict_dataset",
    "timed_records",
    "write_report",
]
