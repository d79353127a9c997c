"""Tests for causally ordered frame selection."""

from pathlib import Path

import numpy as np
import pytest

from statepipe.core.exceptions import EvaluationError, FormatError
from statepipe.metrics import PhaseAnnotation, PhaseScores, best_causal_triple, causal_precision_at_1


def _brute_force(initial: np.ndarray, action: np.ndarray, end: np.ndarray) -> tuple[int, int, int]:
    best, best_sum = (0, 1, 2), -np.inf
    steps = initial.size
    for i in range(steps):
        for j in range(i + 1, steps):
            for k in range(j + 1, steps):
                total = initial[i] + (action[j] + end[k])
                if total > best_sum:
                    best, best_sum = (i, j, k), total
    return best


class TestBestCausalTriple:
    """Linear-time selection against the cubic search."""

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_brute_force(self, seed: int) -> None:
        """Continuous scores up to T = 50."""
        rng = np.random.default_rng(seed)
        steps = int(rng.integers(3, 51))
        initial, action, end = rng.random((3, steps))
        assert best_causal_triple(initial, action, end) == _brute_force(initial, action, end)

    @pytest.mark.parametrize("seed", range(100))
    def test_ties_match_brute_force(self, seed: int) -> None:
        """Coarse scores with many ties resolve lexicographically."""
        rng = np.random.default_rng(1000 + seed)
        steps = int(rng.integers(3, 20))
        initial, action, end = rng.choice([0.0, 0.5, 1.0], size=(3, steps))
        assert best_causal_triple(initial, action, end) == _brute_force(initial, action, end)

    def test_order_is_enforced(self) -> None:
        """The end peak before the initial peak cannot both be chosen."""
        initial = np.array([0.0, 0.0, 0.0, 1.0])
        action = np.array([0.0, 0.0, 0.0, 0.0])
        end = np.array([1.0, 0.0, 0.0, 0.0])
        i, j, k = best_causal_triple(initial, action, end)
        assert i < j < k

    def test_flat_scores_pick_first_frames(self) -> None:
        """All sums equal gives (0, 1, 2)."""
        assert best_causal_triple(np.zeros(6), np.zeros(6), np.zeros(6)) == (0, 1, 2)

    @pytest.mark.parametrize("steps", [0, 1, 2])
    def test_too_short(self, steps: int) -> None:
        """Three frames are the minimum."""
        with pytest.raises(EvaluationError, match="at least 3"):
            best_causal_triple(np.zeros(steps), np.zeros(steps), np.zeros(steps))

    def test_unequal_lengths(self) -> None:
        """Phases must cover the same frames."""
        with pytest.raises(EvaluationError, match="differ"):
            best_causal_triple(np.zeros(4), np.zeros(5), np.zeros(4))


class TestPrecisionAtOne:
    """Hits against annotated phase frames."""

    def test_hits(self) -> None:
        """Each selected frame is checked against its own phase."""
        matrix = np.zeros((6, 3))
        matrix[1, 0], matrix[3, 1], matrix[5, 2] = 1.0, 1.0, 1.0
        scores = PhaseScores.from_matrix("v", matrix)
        annotation = PhaseAnnotation(
            video_id="v",
            category="apple",
            initial=frozenset({0, 1}),
            action=frozenset({2}),
            end=frozenset({5}),
        )
        triple = causal_precision_at_1(scores, annotation)
        assert (triple.initial, triple.action, triple.end) == (1, 3, 5)
        assert (triple.initial_hit, triple.action_hit, triple.end_hit) == (True, False, True)

    def test_phase_matrix_shape(self) -> None:
        """Phase predictions are T×3."""
        with pytest.raises(EvaluationError, match="T×3"):
            PhaseScores.from_matrix("v", np.zeros((5, 2)))

    def test_annotation_file(self, tmp_path: Path) -> None:
        """Annotations load from JSON; unreadable files are format errors."""
        path = tmp_path / "v.phases.json"
        path.write_text('{"video_id": "v", "category": "c", "initial": [0], "action": [1, 2], "end": [4]}')
        assert PhaseAnnotation.from_file(path).action == frozenset({1, 2})
        path.write_text("{")
        with pytest.raises(FormatError):
            PhaseAnnotation.from_file(path)
