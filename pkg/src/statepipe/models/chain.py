"""Outputs of the three-stage prompt chain."""

from pathlib import Path

import numpy as np
from pydantic import Field, model_validator

from statepipe.core.exceptions import FormatError
from statepipe.models.base import StatepipeBaseModel, TernaryLabel


class ManipulationAction(StatepipeBaseModel):
    """An action extracted from narration with the time span of its support."""

    index: int = Field(ge=0, description="Ordinal within the video")
    summary: str
    support_text: str
    start_s: float = Field(ge=0.0)
    end_s: float = Field(ge=0.0)

    @model_validator(mode="after")
    def _check_interval(self) -> "ManipulationAction":
        if self.end_s < self.start_s:
            msg = f"interval end {self.end_s} precedes start {self.start_s}"
            raise ValueError(msg)
        return self

    @property
    def interval(self) -> tuple[float, float]:
        """(start_s, end_s)."""
        return (self.start_s, self.end_s)


class StateDescription(StatepipeBaseModel):
    """Cumulative object condition after one action."""

    action_index: int = Field(ge=0)
    text: str = Field(min_length=1)
    object_alias: str = Field(min_length=1)


class StateVerdict(StatepipeBaseModel):
    """Ternary judgement of one state after one action."""

    action_index: int = Field(ge=0)
    state_index: int = Field(ge=0)
    verdict: TernaryLabel
    rationale_text: str = ""


class ActionStateChain(StatepipeBaseModel):
    """Actions, descriptions and the |actions|×K verdict matrix of one video."""

    video_id: str = Field(min_length=1)
    actions: tuple[ManipulationAction, ...] = ()
    descriptions: tuple[StateDescription, ...] = ()
    verdicts: tuple[tuple[StateVerdict, ...], ...] = ()
    malformed_count: int = Field(default=0, ge=0)
    total_rows: int = Field(default=0, ge=0, description="Parsed plus discarded response rows")

    @model_validator(mode="after")
    def _check_shapes(self) -> "ActionStateChain":
        if len(self.descriptions) != len(self.actions):
            msg = (
                f"{len(self.descriptions)} descriptions for "
                f"{len(self.actions)} actions"
            )
            raise ValueError(msg)
        if self.verdicts and len(self.verdicts) != len(self.actions):
            msg = f"{len(self.verdicts)} verdict rows for {len(self.actions)} actions"
            raise ValueError(msg)
        widths = {len(row) for row in self.verdicts}
        if len(widths) > 1:
            msg = f"ragged verdict matrix: row widths {sorted(widths)}"
            raise ValueError(msg)
        for i, row in enumerate(self.verdicts):
            for k, verdict in enumerate(row):
                if (verdict.action_index, verdict.state_index) != (i, k):
                    msg = (
                        f"verdict at ({i}, {k}) is tagged "
                        f"({verdict.action_index}, {verdict.state_index})"
                    )
                    raise ValueError(msg)
        return self

    @property
    def num_states(self) -> int:
        """K, or 0 for a chain without verdicts."""
        return len(self.verdicts[0]) if self.verdicts else 0

    @property
    def malformed_rate(self) -> float:
        """Fraction of response rows that were discarded or repaired."""
        return self.malformed_count / self.total_rows if self.total_rows else 0.0

    def verdict_matrix(self) -> np.ndarray:
        """|actions|×K int8 matrix of TernaryLabel values."""
        return np.array(
            [[int(verdict.verdict) for verdict in row] for row in self.verdicts],
            dtype=np.int8,
        ).reshape(len(self.verdicts), self.num_states)

    @classmethod
    def from_file(cls, path: Path) -> "ActionStateChain":
        """Load a chain.json file."""
        try:
            return cls.model_validate_json(path.read_bytes())
        except OSError as e:
            msg = f"Cannot read chain {path}: {e}"
            raise FormatError(msg, path=str(path)) from e

    def to_json(self) -> str:
        """Deterministic JSON serialization."""
        return self.model_dump_json(indent=2) + "\n"

    def to_file(self, path: Path) -> None:
        """Write the chain as JSON."""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")


class ChangeItCategory(StatepipeBaseModel):
    """A state-changing action category with its end-state adjectives."""

    object_name: str = Field(min_length=1)
    action_name: str = Field(min_length=1)
    end_states: tuple[str, ...] = Field(min_length=1)
