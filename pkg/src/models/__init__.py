"""Data models for the application."""

from .sample import Dataset, Phase, Sample
from .training import CurriculumState, LossCurve, TrainLog, TrainLogEntry, TRAIN_LOG_COLUMNS

__all__ = [
    "Dataset",
    "Phase",
    "Sample",
    "CurriculumState",
    "LossCurve",
    "TrainLog",
    "TrainLogEntry",
    "TRAIN_LOG_COLUMNS",
]
