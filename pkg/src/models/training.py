"""Curriculum state and training logs."""

from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

TRAIN_LOG_COLUMNS = ["epoch", "sample_idx", "stage", "loss", "mean_abs_delta_z", "gamma_mean"]


class CurriculumState(BaseModel):
    """Per-sample curriculum: learning weight Γ_i, stage i, stylised base z, content x_c."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    gamma: np.ndarray  # h×w
    stage: int = 0
    z: np.ndarray
    x_c: np.ndarray


class TrainLogEntry(BaseModel):
    """Loss and sample statistics of one curriculum stage."""
    epoch: int
    sample_idx: int
    stage: int
    loss: float
    mean_abs_delta_z: float
    gamma_mean: float


class TrainLog(BaseModel):
    """Stage-level record of a finetuning run."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    method: str
    entries: List[TrainLogEntry] = Field(default_factory=list)
    # Γ_0..Γ_{n+1} per (epoch, sample_idx), kept only when requested
    gamma_snapshots: Optional[Dict[str, List[np.ndarray]]] = None
    seconds: float = 0.0

    def append(self, **values) -> None:
        self.entries.append(TrainLogEntry(**values))

    def to_frame(self) -> pd.DataFrame:
        rows = [entry.model_dump() for entry in self.entries]
        return pd.DataFrame(rows, columns=TRAIN_LOG_COLUMNS)

    def stage_means(self) -> pd.Series:
        """Mean loss per stage."""
        return self.to_frame().groupby("stage")["loss"].mean()


class LossCurve(BaseModel):
    """Mean training loss per epoch."""
    epochs: List[int] = Field(default_factory=list)
    losses: List[float] = Field(default_factory=list)
    seconds: float = 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"epoch": self.epochs, "loss": self.losses})
