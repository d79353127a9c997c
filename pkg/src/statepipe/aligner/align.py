"""
Interval alignment: turn per-action verdicts into frame-wise labels.

For every frame the background check runs first; a frame without the object
gets Negative for every state. Otherwise the frame is assigned to one nearby
action (or to "others"), the assignment is checked against that action's
state description, and the action's verdict row is copied into the frame.
"""

import logging
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from statepipe.api_clients.scorers import FrameScorer, ScorerSet
from statepipe.containers.config import AlignmentConfig
from statepipe.core.exceptions import AlignmentError, StatepipeError
from statepipe.labeler import prompts
from statepipe.models import (
    ActionStateChain,
    ManipulationAction,
    PseudoLabelTimeline,
    QueryKind,
    StateDescription,
    StateVocabulary,
    TernaryLabel,
    frame_span,
    merge_timelines,
)
from statepipe.parsers import ChoiceMatch, ChoiceMatcher, JudgementParser

logger = logging.getLogger(__name__)

BACKGROUND_TAG = "background"


class OthersOption:
    """The "none of these actions" candidate appended to every list."""

    summary = prompts.OTHERS_OPTION

    def __repr__(self) -> str:
        """Readable sentinel."""
        return "OTHERS"


OTHERS = OthersOption()

Candidate = ManipulationAction | OthersOption


@dataclass
class AlignmentStats:
    """Counters collected while aligning one or more videos."""

    frames: int = 0
    absent_frames: int = 0
    others_chosen: int = 0
    unmatched_choices: int = 0
    outside_interval: int = 0
    missing_verdicts: int = 0
    filter_rejections: int = 0
    filter_parse_failures: int = 0
    scorer_errors: int = 0
    background_errors: int = 0
    assigned_frames: int = 0

    def add(self, events: Counter[str]) -> None:
        """Accumulate event counts by field name."""
        for name, count in events.items():
            setattr(self, name, getattr(self, name) + count)

    def merge(self, other: "AlignmentStats") -> None:
        """Accumulate another stats object."""
        for item in fields(self):
            setattr(self, item.name, getattr(self, item.name) + getattr(other, item.name))

    def as_dict(self) -> dict[str, int]:
        """Counters by name."""
        return {item.name: getattr(self, item.name) for item in fields(self)}


def candidate_actions(
    frame: int,
    actions: Sequence[ManipulationAction],
    delta_t: float,
) -> list[Candidate]:
    """Actions whose interval meets [frame - Δt, frame + 1 + Δt], then ``others``."""
    low, high = frame - delta_t, frame + 1 + delta_t
    near: list[Candidate] = [a for a in actions if a.start_s <= high and a.end_s >= low]
    return [*near, OTHERS]


def select_action(
    video_id: str,
    frame: int,
    candidates: Sequence[Candidate],
    scorer: FrameScorer,
    matcher: ChoiceMatcher | None = None,
) -> ChoiceMatch:
    """
    Ask the scorer which candidate the frame shows.

    Returns a match whose ``action`` is None for "others", unmatched answers
    and scorer failures (status ``error``).
    """
    matcher = matcher or ChoiceMatcher()
    prompt = prompts.render_choose_action([c.summary for c in candidates])
    try:
        answer = scorer.ask(video_id, frame, QueryKind.ACTION, prompt)
    except StatepipeError as e:
        logger.warning("%s frame %d: action scorer failed: %s", video_id, frame, e)
        return ChoiceMatch(None, "error")
    real = [c for c in candidates if isinstance(c, ManipulationAction)]
    return matcher.match(answer, real)


def filter_by_state(
    video_id: str,
    frame: int,
    action: ManipulationAction,
    description: StateDescription,
    scorer: FrameScorer,
    parser: JudgementParser | None = None,
) -> bool:
    """True iff the scorer judges the description true for the frame."""
    parser = parser or JudgementParser()
    prompt = prompts.render_filter_state(action.summary, description.text)
    return parser.parse(scorer.ask(video_id, frame, QueryKind.STATE, prompt))


def assign_background(
    video_id: str,
    num_frames: int,
    vocab: StateVocabulary,
    scorer: FrameScorer,
    config: AlignmentConfig,
) -> list[bool | None]:
    """
    Per-frame object presence: max prompt similarity ≥ threshold.

    ``None`` marks frames whose backend call failed.
    """
    texts = config.background_prompts or prompts.background_prompts(vocab.object_names)
    present: list[bool | None] = []
    for frame in range(num_frames):
        present.append(_presence(video_id, frame, texts, scorer, config.background_threshold))
    return present


def _presence(video_id: str, frame: int, texts: list[str], scorer: FrameScorer, threshold: float) -> bool | None:
    if threshold <= 0:
        return True
    try:
        scores = scorer.similarities(video_id, frame, texts)
    except StatepipeError as e:
        logger.warning("%s frame %d: background scorer failed: %s", video_id, frame, e)
        return None
    return bool(scores) and max(scores) >= threshold


@dataclass
class FrameOutcome:
    """What alignment decided for one frame."""

    frame: int
    absent: bool = False
    action_indices: tuple[int, ...] = ()
    events: Counter[str] = field(default_factory=Counter)


class Aligner:
    """Assign chain verdicts to frames with pluggable scorers."""

    def __init__(self, scorers: ScorerSet, config: AlignmentConfig | None = None) -> None:
        """
        Initialize the aligner.

        Args:
            scorers: Action, state and optional background scorers
            config: Window, threshold and ablation switches

        """
        self.scorers = scorers
        self.config = config or AlignmentConfig()
        self.stats = AlignmentStats()

    def _score_frame(
        self,
        chain: ActionStateChain,
        frame: int,
        background_texts: list[str],
    ) -> FrameOutcome:
        outcome = FrameOutcome(frame)
        events = outcome.events
        cfg = self.config
        video_id = chain.video_id

        if cfg.use_background and self.scorers.background is not None:
            present = _presence(video_id, frame, background_texts, self.scorers.background, cfg.background_threshold)
            if present is None:
                events["background_errors"] += 1
                return outcome
            if not present:
                events["absent_frames"] += 1
                outcome.absent = True
                return outcome

        if cfg.use_action_selection:
            candidates = candidate_actions(frame, chain.actions, cfg.delta_t)
            matcher = ChoiceMatcher()
            match = select_action(video_id, frame, candidates, self.scorers.action, matcher)
            if match.action is None:
                events[
                    {"others": "others_chosen", "error": "scorer_errors"}.get(match.status, "unmatched_choices")
                ] += 1
                return outcome
            chosen = [match.action]
        else:
            chosen = [a for a in chain.actions if frame in frame_span(a.start_s, a.end_s, frame + 1)]
            if not chosen:
                events["others_chosen"] += 1
                return outcome

        kept: list[int] = []
        for action in chosen:
            if cfg.restrict_to_action_interval and frame not in frame_span(action.start_s, action.end_s, frame + 1):
                events["outside_interval"] += 1
                continue
            if action.index >= len(chain.verdicts):
                events["missing_verdicts"] += 1
                continue
            if cfg.use_state_filter:
                parser = JudgementParser()
                try:
                    passed = filter_by_state(
                        video_id,
                        frame,
                        action,
                        chain.descriptions[action.index],
                        self.scorers.state,
                        parser,
                    )
                except StatepipeError as e:
                    logger.warning("%s frame %d: state scorer failed: %s", video_id, frame, e)
                    events["scorer_errors"] += 1
                    continue
                events["filter_parse_failures"] += parser.malformed_count
                if not passed:
                    events["filter_rejections"] += 1
                    continue
            kept.append(action.index)
        outcome.action_indices = tuple(kept)
        return outcome

    def align(self, chain: ActionStateChain, num_frames: int, vocab: StateVocabulary) -> PseudoLabelTimeline:
        """
        Build the frame-wise timeline of one video.

        Raises:
            AlignmentError: Chain and vocabulary disagree on K, or a frame
                fails unexpectedly (frame index reported)

        """
        if chain.verdicts and chain.num_states != vocab.num_states:
            msg = f"chain has {chain.num_states} states, vocabulary {vocab.num_states}"
            raise AlignmentError(msg, video_id=chain.video_id)

        background_texts = self.config.background_prompts or prompts.background_prompts(vocab.object_names)

        def score(frame: int) -> FrameOutcome:
            try:
                return self._score_frame(chain, frame, background_texts)
            except StatepipeError as e:
                raise AlignmentError(e.message, frame=frame, video_id=chain.video_id) from e

        frames = range(num_frames)
        if self.config.max_concurrency > 1 and num_frames > 1:
            with ThreadPoolExecutor(max_workers=self.config.max_concurrency) as pool:
                outcomes = list(pool.map(score, frames))
        else:
            outcomes = [score(frame) for frame in frames]

        return self._assemble(chain, num_frames, vocab.num_states, outcomes)

    def _assemble(
        self,
        chain: ActionStateChain,
        num_frames: int,
        num_states: int,
        outcomes: list[FrameOutcome],
    ) -> PseudoLabelTimeline:
        unassigned = int(TernaryLabel.UNASSIGNED)
        verdicts = chain.verdict_matrix()

        bg_labels = np.full((num_frames, num_states), unassigned, dtype=np.int8)
        bg_prov = np.full((num_frames, num_states), None, dtype=object)

        # One layer per simultaneous action of a frame; layers are merged cell-wise.
        layers: list[tuple[np.ndarray, np.ndarray]] = []
        stats = AlignmentStats(frames=num_frames)
        for outcome in outcomes:
            stats.add(outcome.events)
            if outcome.absent:
                bg_labels[outcome.frame] = int(TernaryLabel.NEGATIVE)
                bg_prov[outcome.frame] = BACKGROUND_TAG
                continue
            for depth, index in enumerate(outcome.action_indices):
                if depth == len(layers):
                    layers.append(
                        (
                            np.full((num_frames, num_states), unassigned, dtype=np.int8),
                            np.full((num_frames, num_states), None, dtype=object),
                        ),
                    )
                labels, provenance = layers[depth]
                row = verdicts[index]
                labels[outcome.frame] = row
                provenance[outcome.frame] = np.where(row != unassigned, f"action:{index}", None)

        timeline = PseudoLabelTimeline(video_id=chain.video_id, labels=bg_labels, provenance=bg_prov)
        for labels, provenance in layers:
            layer = PseudoLabelTimeline(video_id=chain.video_id, labels=labels, provenance=provenance)
            timeline = merge_timelines(timeline, layer)

        stats.assigned_frames = int(np.count_nonzero((timeline.labels != unassigned).any(axis=1)))
        self.stats.merge(stats)
        logger.info(
            "%s: aligned %d frames, assignment rate %.3f",
            chain.video_id,
            num_frames,
            timeline.assignment_rate,
        )
        return timeline


def align(
    chain: ActionStateChain,
    num_frames: int,
    vocab: StateVocabulary,
    scorers: ScorerSet,
    config: AlignmentConfig | None = None,
) -> PseudoLabelTimeline:
    """Align one chain to ``num_frames`` frames."""
    return Aligner(scorers, config).align(chain, num_frames, vocab)
