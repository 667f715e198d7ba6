"""Configuration management module."""

from .settings import (
    CurriculumParams,
    DatasetSpec,
    EvalSettings,
    ExperimentConfig,
    FinetuneSchedule,
    PretrainSchedule,
    Settings,
    SplitSeeds,
    UNetConfig,
    VendorStyle,
    default_vendor_styles,
    get_settings,
)

__all__ = [
    "CurriculumParams",
    "DatasetSpec",
    "EvalSettings",
    "ExperimentConfig",
    "FinetuneSchedule",
    "PretrainSchedule",
    "Settings",
    "SplitSeeds",
    "UNetConfig",
    "VendorStyle",
    "default_vendor_styles",
    "get_settings",
]
