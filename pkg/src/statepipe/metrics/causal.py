"""Causally ordered initial/action/end frame selection and precision@1."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import Field

from statepipe.core.exceptions import EvaluationError, FormatError
from statepipe.models import StatepipeBaseModel


class PhaseScores(StatepipeBaseModel):
    """Per-frame probabilities of the initial state, the action and the end state."""

    video_id: str
    initial: tuple[float, ...]
    action: tuple[float, ...]
    end: tuple[float, ...]

    @classmethod
    def from_matrix(cls, video_id: str, matrix: np.ndarray) -> "PhaseScores":
        """Columns 0, 1, 2 of a T×3 matrix."""
        if matrix.ndim != 2 or matrix.shape[1] != 3:
            msg = f"{video_id}: phase matrix must be T×3, got {matrix.shape}"
            raise EvaluationError(msg)
        return cls(
            video_id=video_id,
            initial=tuple(map(float, matrix[:, 0])),
            action=tuple(map(float, matrix[:, 1])),
            end=tuple(map(float, matrix[:, 2])),
        )


class PhaseAnnotation(StatepipeBaseModel):
    """Ground-truth frames of each phase of one video."""

    video_id: str
    category: str = Field(min_length=1)
    initial: frozenset[int] = frozenset()
    action: frozenset[int] = frozenset()
    end: frozenset[int] = frozenset()

    @classmethod
    def from_file(cls, path: Path) -> "PhaseAnnotation":
        """Read an annotation JSON file."""
        try:
            return cls.model_validate_json(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            msg = f"Cannot read phase annotation: {e}"
            raise FormatError(msg, path=str(path)) from e


@dataclass(frozen=True)
class CausalTriple:
    """Selected frames i < j < k and their per-phase hits."""

    initial: int
    action: int
    end: int
    initial_hit: bool = False
    action_hit: bool = False
    end_hit: bool = False


def _suffix_first_argmax(values: np.ndarray) -> np.ndarray:
    """Index of the first maximum of values[t:] for every t."""
    best = np.empty(values.size, dtype=np.int64)
    current = values.size - 1
    for t in range(values.size - 1, -1, -1):
        if values[t] >= values[current]:
            current = t
        best[t] = current
    return best


def best_causal_triple(
    initial: np.ndarray,
    action: np.ndarray,
    end: np.ndarray,
) -> tuple[int, int, int]:
    """
    (i, j, k) with i < j < k maximizing initial[i] + action[j] + end[k].

    Linear time from suffix maxima. Among equal sums the smallest i wins,
    then the smallest j, then the smallest k.

    Raises:
        EvaluationError: Fewer than three frames or unequal lengths

    """
    p_init = np.asarray(initial, dtype=np.float64)
    p_act = np.asarray(action, dtype=np.float64)
    p_end = np.asarray(end, dtype=np.float64)
    steps = p_init.size
    if not p_init.shape == p_act.shape == p_end.shape:
        msg = f"phase lengths differ: {p_init.size}, {p_act.size}, {p_end.size}"
        raise EvaluationError(msg)
    if steps < 3:
        msg = f"causal selection needs at least 3 frames, got {steps}"
        raise EvaluationError(msg)

    # Best completion (j, k) after every i, scanning from the right; the
    # suffix arrays hold the first maximum so ties resolve to smaller indices.
    end_at = _suffix_first_argmax(p_end)
    completion = np.full(steps, -np.inf)
    for j in range(1, steps - 1):
        completion[j] = p_act[j] + p_end[end_at[j + 1]]
    action_at = _suffix_first_argmax(completion)

    best: tuple[int, int, int] | None = None
    best_sum = -np.inf
    for i in range(steps - 2):
        j = int(action_at[i + 1])
        total = p_init[i] + completion[j]
        if total > best_sum:
            best, best_sum = (i, j, int(end_at[j + 1])), total
    if best is None:
        msg = "no finite causal triple"
        raise EvaluationError(msg)
    return best


def causal_precision_at_1(scores: PhaseScores, annotation: PhaseAnnotation) -> CausalTriple:
    """Select the causal triple and score each phase against its ground-truth frames."""
    i, j, k = best_causal_triple(np.array(scores.initial), np.array(scores.action), np.array(scores.end))
    return CausalTriple(
        initial=i,
        action=j,
        end=k,
        initial_hit=i in annotation.initial,
        action_hit=j in annotation.action,
        end_hit=k in annotation.end,
    )
