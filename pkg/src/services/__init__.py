"""Service layer modules."""

from .training_service import TrainingService
from .experiment_service import ExperimentService, parse_method

__all__ = ["TrainingService", "ExperimentService", "parse_method"]
