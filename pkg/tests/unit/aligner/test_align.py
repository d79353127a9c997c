"""Tests for interval alignment."""

import numpy as np
import pytest

from statepipe.aligner import OTHERS, Aligner, align, assign_background, candidate_actions, select_action
from statepipe.aligner.align import BACKGROUND_TAG
from statepipe.api_clients import ScorerSet, StubScorer
from statepipe.containers.config import AlignmentConfig
from statepipe.core.exceptions import AlignmentError, APIError
from statepipe.models import (
    ActionStateChain,
    ManipulationAction,
    QueryKind,
    StateDescription,
    StateVerdict,
    StateVocabulary,
    TernaryLabel,
)

SERIAL = AlignmentConfig(max_concurrency=1)


def _action(index: int, start: float, end: float, summary: str | None = None) -> ManipulationAction:
    summary = summary or f"Action number {index}"
    return ManipulationAction(index=index, summary=summary, support_text=summary, start_s=start, end_s=end)


def _chain(actions: list[ManipulationAction], rows: list[tuple[int, ...]]) -> ActionStateChain:
    return ActionStateChain(
        video_id="v",
        actions=tuple(actions),
        descriptions=tuple(
            StateDescription(action_index=a.index, text=f"The apple after {a.index}.", object_alias="apple")
            for a in actions
        ),
        verdicts=tuple(
            tuple(StateVerdict(action_index=i, state_index=k, verdict=TernaryLabel(v)) for k, v in enumerate(row))
            for i, row in enumerate(rows)
        ),
    )


def _stub(num_frames: int, choice: str, **answers: str) -> StubScorer:
    table = {StubScorer.key("v", t, QueryKind.ACTION): choice for t in range(num_frames)}
    for key, value in answers.items():
        frame, kind = key.removeprefix("f").split("_")
        table[StubScorer.key("v", int(frame), QueryKind(kind))] = value
    return StubScorer(table)


def _scorers(stub: StubScorer) -> ScorerSet:
    return ScorerSet(action=stub, state=stub, background=stub)


class TestCandidateActions:
    """Temporal candidate windows."""

    def test_window_edges(self) -> None:
        """Frame 20 with a 10 s window sees [28, 35] but not [5, 9]."""
        early, late = _action(0, 5.0, 9.0), _action(1, 28.0, 35.0)
        assert candidate_actions(20, [early, late], 10.0) == [late, OTHERS]

    def test_no_nearby_actions(self) -> None:
        """Only the others option remains."""
        assert candidate_actions(100, [_action(0, 5.0, 9.0)], 10.0) == [OTHERS]

    @pytest.mark.parametrize("frame", [0, 17, 42, 80])
    def test_monotone_in_window(self, frame: int) -> None:
        """A wider window never loses a candidate."""
        rng = np.random.default_rng(frame)
        starts = rng.uniform(0, 90, size=12)
        actions = [_action(i, s, s + rng.uniform(0, 10)) for i, s in enumerate(starts)]
        previous: set[int] = set()
        for delta in (0.5, 2.0, 5.0, 10.0, 30.0):
            current = {c.index for c in candidate_actions(frame, actions, delta) if c is not OTHERS}
            assert previous <= current
            previous = current


class TestSelectAction:
    """Frame-level action choice."""

    def test_match(self) -> None:
        """The scorer's verbatim option maps back to the action."""
        action = _action(0, 0.0, 5.0, "Peel the apple")
        match = select_action("v", 2, [action, OTHERS], _stub(5, "Peel the apple"))
        assert (match.action, match.status) == (action, "matched")

    def test_others_never_maps_to_action(self) -> None:
        """Choosing others gives no action."""
        action = _action(0, 0.0, 5.0, "Peel the apple")
        match = select_action("v", 2, [action, OTHERS], _stub(5, "others"))
        assert (match.action, match.status) == (None, "others")

    def test_scorer_failure(self) -> None:
        """Backend errors become an error status."""

        class Failing(StubScorer):
            def ask(self, video_id: str, frame: int, kind: QueryKind, prompt: str) -> str:  # noqa: ARG002
                raise APIError("down", "vlm")

        match = select_action("v", 0, [OTHERS], Failing())
        assert (match.action, match.status) == (None, "error")


class TestAligner:
    """Whole-video alignment."""

    def test_single_action_interval(self, apple_vocab: StateVocabulary) -> None:
        """A 10-frame video with one action over frames 3..6 labels exactly those frames."""
        chain = _chain([_action(0, 3.0, 7.0, "Peel the apple")], [(1, 1, 0)])
        timeline = align(chain, 10, apple_vocab, _scorers(_stub(10, "Peel the apple")), SERIAL)
        assigned = np.flatnonzero((timeline.labels != -1).any(axis=1))
        assert assigned.tolist() == [3, 4, 5, 6]
        np.testing.assert_array_equal(timeline.labels[3:7], [[1, 1, 0]] * 4)
        assert set(timeline.provenance[3:7].ravel()) == {"action:0"}

    def test_stats(self, apple_vocab: StateVocabulary) -> None:
        """Frames outside the interval are counted."""
        chain = _chain([_action(0, 3.0, 7.0, "Peel the apple")], [(1, 1, 0)])
        aligner = Aligner(_scorers(_stub(10, "Peel the apple")), SERIAL)
        aligner.align(chain, 10, apple_vocab)
        assert aligner.stats.frames == 10
        assert aligner.stats.outside_interval == 6
        assert aligner.stats.assigned_frames == 4

    def test_background_dominates(self, apple_vocab: StateVocabulary) -> None:
        """Absent-object frames are Negative for every state, whatever the verdicts."""
        chain = _chain([_action(0, 0.0, 10.0, "Peel the apple")], [(1, 1, 1)])
        stub = _stub(10, "Peel the apple", f4_background="0.05", f5_background="0.1, 0.15")
        timeline = align(chain, 10, apple_vocab, _scorers(stub), SERIAL)
        np.testing.assert_array_equal(timeline.labels[4:6], np.zeros((2, 3)))
        assert set(timeline.provenance[4:6].ravel()) == {BACKGROUND_TAG}
        np.testing.assert_array_equal(timeline.labels[6], [1, 1, 1])

    def test_threshold_zero_disables_absence(self, apple_vocab: StateVocabulary) -> None:
        """With a zero threshold every frame is taken as showing the object."""
        chain = _chain([_action(0, 0.0, 10.0, "Peel the apple")], [(1, 1, 1)])
        stub = _stub(10, "Peel the apple", f4_background="0.0")
        config = AlignmentConfig(max_concurrency=1, background_threshold=0.0)
        timeline = align(chain, 10, apple_vocab, _scorers(stub), config)
        np.testing.assert_array_equal(timeline.labels[4], [1, 1, 1])

    def test_filter_and_its_ablation(self, apple_vocab: StateVocabulary) -> None:
        """A rejected frame stays Unassigned unless the filter is switched off."""
        chain = _chain([_action(0, 0.0, 10.0, "Peel the apple")], [(1, 0, 0)])
        stub = _stub(10, "Peel the apple", f2_state="Hmm. The answer is False.", f3_state="no judgement")
        aligner = Aligner(_scorers(stub), SERIAL)
        filtered = aligner.align(chain, 10, apple_vocab)
        assert (filtered.labels[2:4] == -1).all()
        assert aligner.stats.filter_rejections == 2
        assert aligner.stats.filter_parse_failures == 1

        unfiltered = align(
            chain,
            10,
            apple_vocab,
            _scorers(stub),
            AlignmentConfig(max_concurrency=1, use_state_filter=False),
        )
        np.testing.assert_array_equal(unfiltered.labels[2:4], [[1, 0, 0]] * 2)

    def test_others_and_unmatched(self, apple_vocab: StateVocabulary) -> None:
        """Frames without a matched action stay Unassigned."""
        chain = _chain([_action(0, 0.0, 10.0, "Peel the apple")], [(1, 0, 0)])
        stub = _stub(10, "Peel the apple", f0_action="others", f1_action="juggling oranges")
        aligner = Aligner(_scorers(stub), SERIAL)
        timeline = aligner.align(chain, 10, apple_vocab)
        assert (timeline.labels[:2] == -1).all()
        assert (aligner.stats.others_chosen, aligner.stats.unmatched_choices) == (1, 1)

    def test_ambiguous_verdicts_stay_unassigned(self, apple_vocab: StateVocabulary) -> None:
        """Unassigned verdict cells are not filled in."""
        chain = _chain([_action(0, 0.0, 4.0, "Peel the apple")], [(1, -1, 0)])
        timeline = align(chain, 4, apple_vocab, _scorers(_stub(4, "Peel the apple")), SERIAL)
        np.testing.assert_array_equal(timeline.labels, [[1, -1, 0]] * 4)

    def test_without_action_selection(self, apple_vocab: StateVocabulary) -> None:
        """Interval membership alone assigns frames; overlapping actions merge."""
        chain = _chain(
            [_action(0, 0.0, 4.0), _action(1, 2.0, 6.0)],
            [(1, 0, 0), (1, 1, 0)],
        )
        config = AlignmentConfig(max_concurrency=1, use_action_selection=False, use_state_filter=False)
        timeline = align(chain, 8, apple_vocab, _scorers(_stub(8, "others")), config)
        np.testing.assert_array_equal(
            timeline.labels,
            [[1, 0, 0], [1, 0, 0], [1, -1, 0], [1, -1, 0], [1, 1, 0], [1, 1, 0], [-1, -1, -1], [-1, -1, -1]],
        )

    def test_concurrency_matches_serial(self, apple_vocab: StateVocabulary) -> None:
        """Thread count never changes the timeline."""
        chain = _chain([_action(0, 2.0, 9.0, "Peel the apple")], [(1, 1, 0)])
        stub = _stub(12, "Peel the apple", f5_background="0.0", f6_state="The answer is False.")
        serial = align(chain, 12, apple_vocab, _scorers(stub), SERIAL)
        parallel = align(chain, 12, apple_vocab, _scorers(stub), AlignmentConfig(max_concurrency=4))
        assert serial == parallel

    def test_state_count_mismatch(self, apple_vocab: StateVocabulary) -> None:
        """Chains for another vocabulary are rejected."""
        chain = _chain([_action(0, 0.0, 4.0)], [(1, 0)])
        with pytest.raises(AlignmentError, match="2 states"):
            align(chain, 4, apple_vocab, _scorers(_stub(4, "others")), SERIAL)

    def test_assign_background(self, apple_vocab: StateVocabulary) -> None:
        """Presence per frame; failed calls are None."""
        stub = _stub(3, "others", f1_background="0.1", f2_background="oops")
        present = assign_background("v", 3, apple_vocab, stub, AlignmentConfig())
        assert present == [True, False, None]
