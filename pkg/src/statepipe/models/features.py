"""Precomputed per-frame feature matrices."""

from typing import Any

import numpy as np
from pydantic import Field, field_validator

from statepipe.models.base import ArrayModel, frozen_array

FEATURE_FPS = 1.0


class FeatureSequence(ArrayModel):
    """T×D float32 features sampled at 1 fps from a frozen backbone."""

    video_id: str = Field(min_length=1)
    data: np.ndarray
    fps: float = FEATURE_FPS

    @field_validator("data", mode="before")
    @classmethod
    def _freeze_data(cls, value: Any) -> np.ndarray:  # noqa: ANN401
        data = frozen_array(value, np.float32, 2)
        if not np.isfinite(data).all():
            msg = "feature data must be finite"
            raise ValueError(msg)
        return data

    @field_validator("fps")
    @classmethod
    def _fixed_fps(cls, value: float) -> float:
        if value != FEATURE_FPS:
            msg = f"features must be sampled at {FEATURE_FPS} fps, got {value}"
            raise ValueError(msg)
        return value

    @property
    def num_frames(self) -> int:
        """T."""
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        """D."""
        return int(self.data.shape[1])
