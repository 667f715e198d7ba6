"""
Experiment configuration and runtime settings.

``ExperimentConfig`` holds everything that determines a run's results and is
read only from JSON. ``Settings`` holds runtime knobs (log level, log file)
that may come from the environment or ``.env`` and never affect results.
"""

import hashlib
import json
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.autodiff.rng import derive_seed


# Load environment variables (logging knobs only)
load_dotenv()

VendorName = Literal["A", "B", "C", "D"]


class VendorStyle(BaseModel):
    """Intensity model of one acquisition vendor."""
    model_config = ConfigDict(extra="forbid")

    name: VendorName
    class_intensity: List[float] = Field(min_length=4, max_length=4)  # BG, LV, MYO, RV
    gamma: float = Field(gt=0.0)
    noise_sigma: float = Field(ge=0.0)
    bias_amplitude: float = Field(ge=0.0)

    @field_validator("class_intensity")
    @classmethod
    def _intensities_in_unit_range(cls, values: List[float]) -> List[float]:
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError(f"class intensities must lie in [0,1], got {values}")
        return values


def default_vendor_styles() -> Dict[str, VendorStyle]:
    """Vendor table: A and B are seen in training, C and D are out-of-distribution."""
    return {
        "A": VendorStyle(name="A", class_intensity=[0.15, 0.80, 0.45, 0.70], gamma=1.0, noise_sigma=0.03, bias_amplitude=0.05),
        "B": VendorStyle(name="B", class_intensity=[0.25, 0.70, 0.35, 0.60], gamma=0.8, noise_sigma=0.05, bias_amplitude=0.10),
        "C": VendorStyle(name="C", class_intensity=[0.05, 0.95, 0.60, 0.85], gamma=1.4, noise_sigma=0.08, bias_amplitude=0.15),
        "D": VendorStyle(name="D", class_intensity=[0.40, 0.55, 0.20, 0.75], gamma=0.6, noise_sigma=0.06, bias_amplitude=0.20),
    }


class SplitSeeds(BaseModel):
    """Per-split seed keys, combined with the global seed."""
    model_config = ConfigDict(extra="forbid")

    train: int = 101
    style_pool: int = 202
    test: int = 303


class DatasetSpec(BaseModel):
    """Split sizes, vendors and seeds of the synthetic benchmark."""
    model_config = ConfigDict(extra="forbid")

    image_size: int = Field(default=64, ge=8)
    train_vendors: List[VendorName] = Field(default_factory=lambda: ["A", "B"])
    train_per_vendor: int = Field(default=100, ge=1)
    style_pool_vendors: List[VendorName] = Field(default_factory=lambda: ["A", "B"])
    style_pool_size: int = Field(default=200, ge=1)
    test_vendors: List[VendorName] = Field(default_factory=lambda: ["A", "B", "C", "D"])
    test_per_vendor: int = Field(default=50, ge=1)
    seeds: SplitSeeds = Field(default_factory=SplitSeeds)
    vendor_styles: Dict[str, VendorStyle] = Field(default_factory=default_vendor_styles)

    @model_validator(mode="after")
    def _styles_cover_vendors(self) -> "DatasetSpec":
        used = set(self.train_vendors) | set(self.style_pool_vendors) | set(self.test_vendors)
        missing = sorted(used - set(self.vendor_styles))
        if missing:
            raise ValueError(f"vendor_styles lacks entries for {missing}")
        for key, style in self.vendor_styles.items():
            if style.name != key:
                raise ValueError(f"vendor_styles['{key}'] is named '{style.name}'")
        return self


class UNetConfig(BaseModel):
    """Architecture of the segmentation network."""
    model_config = ConfigDict(extra="forbid")

    in_channels: int = Field(default=1, ge=1)
    num_classes: int = Field(default=4, ge=2)
    base_channels: int = Field(default=8, ge=1)
    depth: int = Field(default=2, ge=1)


class PretrainSchedule(BaseModel):
    """Baseline training on the seen vendors (Adam)."""
    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(default=20, ge=1)
    lr: float = Field(default=1e-3, gt=0.0)
    batch_size: int = Field(default=8, ge=1)
    # random quarter turns per sample; the RV otherwise always sits on one side
    rotation_augment: bool = True


class CurriculumParams(BaseModel):
    """Curriculum hyperparameters: stages n, step ε, LGS pooling size."""
    model_config = ConfigDict(extra="forbid")

    n: int = Field(default=3, ge=0)
    # 0 is accepted so the content-only path is expressible
    epsilon: float = Field(default=0.25, ge=0.0, le=1.0)
    pool_size: int = Field(default=4, ge=1)
    clamp_gamma: bool = True


class FinetuneSchedule(BaseModel):
    """Curriculum / baseline finetuning (SGD with momentum)."""
    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(default=5, ge=1)
    lr: float = Field(default=1e-3, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    mixup_alpha: float = Field(default=0.2, gt=0.0)
    rotation_augment: bool = True
    # global gradient-norm bound per step; None disables clipping
    clip_norm: Optional[float] = Field(default=5.0, gt=0.0)


class EvalSettings(BaseModel):
    """Evaluation and diagnostics options."""
    model_config = ConfigDict(extra="forbid")

    use_tta: bool = True
    hardness_samples: int = Field(default=64, ge=1)
    hardness_seeds: List[int] = Field(default_factory=lambda: [0, 1, 2])
    robustness_seeds: List[int] = Field(default_factory=lambda: [0, 1, 2])


class ExperimentConfig(BaseModel):
    """Complete, serialisable description of an experiment."""
    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    model: UNetConfig = Field(default_factory=UNetConfig)
    pretrain: PretrainSchedule = Field(default_factory=PretrainSchedule)
    curriculum: CurriculumParams = Field(default_factory=CurriculumParams)
    finetune: FinetuneSchedule = Field(default_factory=FinetuneSchedule)
    evaluation: EvalSettings = Field(default_factory=EvalSettings)
    output_dir: str = "runs/default"

    @model_validator(mode="after")
    def _sizes_compatible(self) -> "ExperimentConfig":
        size = self.dataset.image_size
        if size % (2 ** self.model.depth):
            raise ValueError(f"image_size {size} is not divisible by 2^depth = {2 ** self.model.depth}")
        if size % self.curriculum.pool_size:
            raise ValueError(f"image_size {size} is not divisible by pool_size {self.curriculum.pool_size}")
        return self

    @classmethod
    def from_json(cls, config_path: Union[str, Path]) -> "ExperimentConfig":
        """
        Load configuration from a JSON file.

        Args:
            config_path: Path to JSON configuration file

        Returns:
            ExperimentConfig instance

        Raises:
            FileNotFoundError: If config file doesn't exist
            ValueError: If config is invalid
        """
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                config_data = json.load(f)
            return cls(**config_data)

        except FileNotFoundError:
            raise FileNotFoundError(
                f"❌ Config file not found: {config_path}\n"
                "   Run without --config to use defaults, or write one with `main.py init-config`"
            )
        except json.JSONDecodeError as e:
            raise ValueError(f"❌ Invalid JSON in config file: {e}")
        except ValidationError as e:
            raise ValueError(f"❌ Invalid configuration: {e}")

    def to_json(self, config_path: Union[str, Path]) -> Path:
        """Write the configuration as sorted, indented JSON."""
        path = Path(config_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def fingerprint(self) -> str:
        """SHA-256 of every result-determining field (the output directory is excluded)."""
        payload = self.model_dump(mode="json", exclude={"output_dir"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def component_seed(self, *keys) -> int:
        """Seed for a named component, derived from the global seed."""
        return derive_seed(self.seed, *keys)

    def with_overrides(self, seed: Optional[int] = None, output_dir: Optional[str] = None,
                       use_tta: Optional[bool] = None) -> "ExperimentConfig":
        """Copy with command-line overrides applied."""
        updated = self.model_copy(deep=True)
        if seed is not None:
            updated.seed = seed
        if output_dir is not None:
            updated.output_dir = output_dir
        if use_tta is not None:
            updated.evaluation.use_tta = use_tta
        return updated


class Settings(BaseSettings):
    """Runtime settings from the environment (logging only)."""

    log_level: str = Field(default="INFO", validation_alias="LSCL_LOG_LEVEL")
    log_file: Optional[str] = Field(default=None, validation_alias="LSCL_LOG_FILE")
    progress: bool = Field(default=True, validation_alias="LSCL_PROGRESS")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached runtime settings instance.

    Returns:
        Settings instance (cached)
    """
    return Settings()
