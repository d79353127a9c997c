"""
Frame-wise label timelines.

Frame t covers real time [t, t+1) seconds (1 fps). Labels are stored as a
T×K int8 matrix of TernaryLabel values; provenance is a T×K object matrix
holding a source tag (str) for every assigned cell and None elsewhere.
"""

import math
from typing import Any

import numpy as np
from pydantic import Field, field_validator, model_validator

from statepipe.core.exceptions import ShapeError
from statepipe.models.base import ArrayModel, TernaryLabel, frozen_array

FPS = 1.0

POS = int(TernaryLabel.POSITIVE)
NEG = int(TernaryLabel.NEGATIVE)
UNASSIGNED = int(TernaryLabel.UNASSIGNED)

# Provenance of an Unassigned cell whose sources disagreed; not written to label files.
CONFLICT_TAG = "conflict"


def frame_span(start_s: float, end_s: float, num_frames: int) -> range:
    """Frames touched by a second-denominated interval: floor(start)..ceil(end)-1, clamped."""
    first = max(0, math.floor(start_s))
    stop = min(num_frames, math.ceil(end_s))
    return range(first, max(first, stop))


class PseudoLabelTimeline(ArrayModel):
    """T×K ternary labels for one video with per-cell provenance."""

    video_id: str = Field(min_length=1)
    labels: np.ndarray
    provenance: np.ndarray

    @field_validator("labels", mode="before")
    @classmethod
    def _freeze_labels(cls, value: Any) -> np.ndarray:  # noqa: ANN401
        labels = frozen_array(value, np.int8, 2)
        if not np.isin(labels, (POS, NEG, UNASSIGNED)).all():
            msg = "labels must be -1 (unassigned), 0 (negative) or 1 (positive)"
            raise ValueError(msg)
        return labels

    @field_validator("provenance", mode="before")
    @classmethod
    def _freeze_provenance(cls, value: Any) -> np.ndarray:  # noqa: ANN401
        return frozen_array(value, object, 2)

    @model_validator(mode="after")
    def _check_provenance(self) -> "PseudoLabelTimeline":
        if self.provenance.shape != self.labels.shape:
            msg = (
                f"provenance shape {self.provenance.shape} does not match "
                f"labels shape {self.labels.shape}"
            )
            raise ValueError(msg)
        assigned = self.labels != UNASSIGNED
        missing = np.equal(self.provenance, None) & assigned
        if missing.any():
            t, k = np.argwhere(missing)[0]
            msg = f"assigned cell ({t}, {k}) has no provenance"
            raise ValueError(msg)
        return self

    @property
    def num_frames(self) -> int:
        """T, the frame count at 1 fps."""
        return int(self.labels.shape[0])

    @property
    def num_states(self) -> int:
        """K, the state count."""
        return int(self.labels.shape[1])

    @property
    def assignment_rate(self) -> float:
        """Fraction of cells that are Positive or Negative."""
        if self.labels.size == 0:
            return 0.0
        return float(np.count_nonzero(self.labels != UNASSIGNED) / self.labels.size)

    def targets_and_mask(self, dtype: type = np.float32) -> tuple[np.ndarray, np.ndarray]:
        """Binary targets and validity mask for masked BCE."""
        mask = self.labels != UNASSIGNED
        targets = (self.labels == POS).astype(dtype)
        return targets, mask

    @classmethod
    def unassigned(cls, video_id: str, num_frames: int, num_states: int) -> "PseudoLabelTimeline":
        """A timeline with every cell Unassigned."""
        return cls(
            video_id=video_id,
            labels=np.full((num_frames, num_states), UNASSIGNED, dtype=np.int8),
            provenance=np.full((num_frames, num_states), None, dtype=object),
        )


class GroundTruthTimeline(PseudoLabelTimeline):
    """Strictly binary timeline; absent objects are all-Negative rows."""

    @field_validator("provenance", mode="before")
    @classmethod
    def _default_provenance(cls, value: Any) -> np.ndarray:  # noqa: ANN401
        array = np.array(value, dtype=object, copy=True)
        array[np.equal(array, None)] = "ground-truth"
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _check_binary(self) -> "GroundTruthTimeline":
        if (self.labels == UNASSIGNED).any():
            t, k = np.argwhere(self.labels == UNASSIGNED)[0]
            msg = f"ground truth has an Unassigned cell at ({t}, {k})"
            raise ValueError(msg)
        return self

    @classmethod
    def from_binary(cls, video_id: str, matrix: np.ndarray) -> "GroundTruthTimeline":
        """Build from a T×K 0/1 matrix."""
        labels = np.asarray(matrix).astype(np.int8)
        return cls(
            video_id=video_id,
            labels=labels,
            provenance=np.full(labels.shape, None, dtype=object),
        )


def _merge_provenance(a: object, b: object) -> object:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)  # type: ignore[type-var]


_merge_provenance_ufunc = np.frompyfunc(_merge_provenance, 2, 1)


def merge_timelines(
    a: PseudoLabelTimeline,
    b: PseudoLabelTimeline,
) -> PseudoLabelTimeline:
    """
    Cell-wise merge of two timelines of the same video.

    (x, Unassigned) -> x; (x, x) -> x; (Positive, Negative) -> Unassigned.
    A conflicted cell stays Unassigned with provenance ``conflict`` and absorbs
    every later merge, so merge order never matters. Provenance of an agreeing
    pair is the lexicographically smaller tag.
    """
    if a.video_id != b.video_id:
        msg = f"cannot merge timelines of {a.video_id!r} and {b.video_id!r}"
        raise ShapeError(msg)
    if a.labels.shape != b.labels.shape:
        msg = f"cannot merge shapes {a.labels.shape} and {b.labels.shape}"
        raise ShapeError(msg)

    la, lb = a.labels, b.labels
    merged = np.where(la == UNASSIGNED, lb, la)
    merged = np.where(lb == UNASSIGNED, la, merged)
    conflict = (
        ((la != UNASSIGNED) & (lb != UNASSIGNED) & (la != lb))
        | _is_conflict(a.labels, a.provenance)
        | _is_conflict(b.labels, b.provenance)
    )
    merged = np.where(conflict, UNASSIGNED, merged).astype(np.int8)

    if la.size:
        provenance = _merge_provenance_ufunc(a.provenance, b.provenance).astype(object)
    else:
        provenance = np.empty(la.shape, dtype=object)
    provenance[merged == UNASSIGNED] = None
    provenance[conflict] = CONFLICT_TAG

    return PseudoLabelTimeline(video_id=a.video_id, labels=merged, provenance=provenance)


def _is_conflict(labels: np.ndarray, provenance: np.ndarray) -> np.ndarray:
    return (labels == UNASSIGNED) & np.equal(provenance, CONFLICT_TAG)
