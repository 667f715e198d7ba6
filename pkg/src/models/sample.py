"""Synthetic benchmark samples and datasets."""

from typing import Iterator, List, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

SplitTag = str  # "train" | "style-pool" | "test-A" .. "test-D"
Phase = Literal["ED", "ES"]


class Sample(BaseModel):
    """One image/label pair rendered for a vendor."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    image: np.ndarray  # 1×h×w in [0,1]
    label: np.ndarray  # h×w class ids
    vendor: str
    seed: int
    phase: Phase = "ED"

    @field_validator("image")
    @classmethod
    def _image_in_unit_range(cls, value: np.ndarray) -> np.ndarray:
        value = np.ascontiguousarray(value, dtype=np.float64)
        if value.ndim != 3 or value.shape[0] != 1:
            raise ValueError(f"image must be 1×h×w, got {value.shape}")
        if value.size and (value.min() < 0.0 or value.max() > 1.0):
            raise ValueError("image intensities must lie in [0,1]")
        return value

    @field_validator("label")
    @classmethod
    def _label_is_integer_map(cls, value: np.ndarray) -> np.ndarray:
        value = np.ascontiguousarray(value, dtype=np.int64)
        if value.ndim != 2:
            raise ValueError(f"label must be h×w, got {value.shape}")
        return value

    def rotated(self, turns: int) -> "Sample":
        """Image and label rotated together by ``turns`` quarter turns (counter-clockwise)."""
        turns = int(turns) % 4
        if turns == 0:
            return self
        return self.model_copy(update={
            "image": np.ascontiguousarray(np.rot90(self.image, turns, axes=(1, 2))),
            "label": np.ascontiguousarray(np.rot90(self.label, turns)),
        })


class Dataset(BaseModel):
    """Ordered samples of one split."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    split: SplitTag
    samples: List[Sample] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Sample]:  # type: ignore[override]
        return iter(self.samples)

    def __getitem__(self, index: int) -> Sample:
        return self.samples[index]

    @property
    def vendors(self) -> List[str]:
        """Vendors present, in first-appearance order."""
        return list(dict.fromkeys(s.vendor for s in self.samples))

    def subset(self, count: int) -> "Dataset":
        return Dataset(split=self.split, samples=self.samples[:count])

    @classmethod
    def concat(cls, split: SplitTag, datasets: List["Dataset"]) -> "Dataset":
        return cls(split=split, samples=[s for d in datasets for s in d.samples])
