"""
Three-stage prompt chain: action extraction, state description, state verdicts.

Stages run sequentially per video. Only stage (c) fans requests out over a
thread pool; every response is parsed on the calling thread in
(description, state) order so counters and outputs are deterministic.
"""

import logging
import re
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Protocol, TypeVar

from statepipe.containers.config import LabelerConfig
from statepipe.core.exceptions import LabelingError, StatepipeError
from statepipe.labeler import prompts
from statepipe.models import (
    ActionStateChain,
    ChangeItCategory,
    ChangePhase,
    ManipulationAction,
    NarrationSentence,
    NarrationTranscript,
    StateDescription,
    StateVerdict,
    StateVocabulary,
)
from statepipe.parsers import ChangePhaseParser, CsvRowParser, VerdictParser
from statepipe.parsers.base.parser import jaccard, normalize_text

logger = logging.getLogger(__name__)

R = TypeVar("R")

_ALIAS = re.compile(r"^the\s+(.+?)\s+(?:is|are|has|have|was|were|had|remains?|becomes?)\b", re.IGNORECASE)


class CompletionClient(Protocol):
    """Anything that turns a prompt into response text."""

    def complete(self, prompt: str) -> str:
        """Return the response text for ``prompt``."""
        ...


def _contains_tokens(haystack: str, needle: str) -> bool:
    """Token-aligned substring test on normalized text."""
    return bool(needle) and f" {needle} " in f" {haystack} "


def match_support(
    support_text: str,
    block: Sequence[NarrationSentence],
    floor: float = 0.5,
) -> tuple[float, float]:
    """
    Interval of the narration sentences that support an action.

    Sentences contained in the support text (or containing it) give the union
    of their spans; otherwise the single sentence with the best token Jaccard
    overlap at or above ``floor``; otherwise the whole block.
    """
    support = normalize_text(support_text)
    hits = [
        sentence
        for sentence in block
        if _contains_tokens(support, normalize_text(sentence.text))
        or _contains_tokens(normalize_text(sentence.text), support)
    ]
    if hits:
        return min(s.start_s for s in hits), max(s.end_s for s in hits)

    best: NarrationSentence | None = None
    best_score = 0.0
    for sentence in block:
        score = jaccard(sentence.text, support_text)
        if score > best_score:
            best, best_score = sentence, score
    if best is not None and best_score >= floor:
        return best.start_s, best.end_s
    return block[0].start_s, block[-1].end_s


def _blocks(items: Sequence[R], size: int) -> list[Sequence[R]]:
    return [items[i : i + size] for i in range(0, len(items), size)]


def history_window(texts: Sequence[str], i: int, cap: int | None) -> list[str]:
    """Descriptions shown with description i: the last ``cap`` up to i, or all of them."""
    first = 0 if cap is None else max(0, i + 1 - cap)
    return list(texts[first : i + 1])


def object_alias(text: str, fallback: str) -> str:
    """Name the description uses for the tracked object."""
    match = _ALIAS.match(text.strip())
    return match.group(1) if match else fallback


class ChainLabeler:
    """Runs the prompt chain for one object vocabulary against one client."""

    def __init__(
        self,
        client: CompletionClient,
        config: LabelerConfig | None = None,
    ) -> None:
        """
        Initialize the labeler.

        Args:
            client: Chat-completion client (live, record or replay)
            config: Block sizes, context cap and concurrency

        """
        self.client = client
        self.config = config or LabelerConfig()
        self.malformed_count = 0
        self.total_rows = 0

    def reset_counters(self) -> None:
        """Zero the malformed/total row counters."""
        self.malformed_count = 0
        self.total_rows = 0

    def _fan_out(self, prompts_in_order: list[str]) -> list[str]:
        """Complete prompts concurrently, returning responses in input order."""
        if self.config.max_concurrency == 1 or len(prompts_in_order) <= 1:
            return [self.client.complete(prompt) for prompt in prompts_in_order]
        with ThreadPoolExecutor(max_workers=self.config.max_concurrency) as pool:
            return list(pool.map(self.client.complete, prompts_in_order))

    # ------------------------------------------------------------------ (a)

    def extract_actions(self, transcript: NarrationTranscript) -> list[ManipulationAction]:
        """Extract manipulation actions block by block, in narration order."""
        actions: list[ManipulationAction] = []
        for block in _blocks(transcript.sentences, self.config.sentences_per_block):
            prompt = prompts.render_extract_actions([s.text for s in block])
            parser = CsvRowParser(columns=2, header_field="action")
            rows = parser.parse(self.client.complete(prompt))
            self.total_rows += parser.total_rows
            self.malformed_count += parser.malformed_count
            if parser.malformed_count:
                logger.warning(
                    "%s: discarded %d malformed action rows",
                    transcript.video_id,
                    parser.malformed_count,
                )
            if not rows:
                logger.warning(
                    "%s: block starting at %.1fs produced no actions",
                    transcript.video_id,
                    block[0].start_s,
                )
            for summary, support in rows:
                start, end = match_support(support, block, self.config.match_floor)
                actions.append(
                    ManipulationAction(
                        index=len(actions),
                        summary=summary,
                        support_text=support,
                        start_s=start,
                        end_s=end,
                    ),
                )
        return actions

    # ------------------------------------------------------------------ (b)

    def describe_states(
        self,
        actions: Sequence[ManipulationAction],
        object_name: str,
        aliases: Sequence[str] = (),
    ) -> list[StateDescription]:
        """
        Describe the object's cumulative state after every action.

        Each block sees the previous block's last description (the unknown
        state sentence for the first block). Rows map to actions by position;
        a missing row or one not starting with "The <object>" carries the
        previous description forward, and surplus rows are dropped. Every
        repaired slot and surplus row counts as malformed.
        """
        names = [object_name, *aliases]
        prefixes = [f"the {name.lower()}" for name in names]
        previous = prompts.unknown_state(object_name)
        descriptions: list[StateDescription] = []
        for block in _blocks(list(actions), self.config.actions_per_block):
            prompt = prompts.render_describe_states(object_name, previous, [a.summary for a in block])
            rows = CsvRowParser(columns=2, header_field="action").parse(self.client.complete(prompt))
            repaired = 0
            for slot, action in enumerate(block):
                text = rows[slot][1].strip() if slot < len(rows) else ""
                if not any(text.lower().startswith(prefix) for prefix in prefixes):
                    text = previous
                    repaired += 1
                descriptions.append(
                    StateDescription(
                        action_index=action.index,
                        text=text,
                        object_alias=object_alias(text, object_name),
                    ),
                )
                previous = text
            surplus = max(0, len(rows) - len(block))
            self.total_rows += len(block) + surplus
            self.malformed_count += repaired + surplus
            if repaired or surplus:
                logger.warning(
                    "Repaired %d description slots, dropped %d surplus rows",
                    repaired,
                    surplus,
                )
        return descriptions

    # ------------------------------------------------------------------ (c)

    def _history(self, descriptions: Sequence[StateDescription], i: int) -> list[str]:
        return history_window([d.text for d in descriptions], i, self.config.context_cap)

    def infer_labels(
        self,
        descriptions: Sequence[StateDescription],
        vocab: StateVocabulary,
    ) -> list[tuple[StateVerdict, ...]]:
        """One verdict per (description, state): the |descriptions|×K matrix."""
        requests = [
            prompts.render_infer_state(
                vocab.object_primary_name,
                self._history(descriptions, i),
                state.state_text,
                state.description,
            )
            for i in range(len(descriptions))
            for state in vocab.states
        ]
        responses = self._fan_out(requests)

        parser = VerdictParser()
        matrix: list[tuple[StateVerdict, ...]] = []
        width = vocab.num_states
        for i in range(len(descriptions)):
            row = []
            for k in range(width):
                text = responses[i * width + k]
                row.append(
                    StateVerdict(
                        action_index=i,
                        state_index=k,
                        verdict=parser.parse(text),
                        rationale_text=text.strip(),
                    ),
                )
            matrix.append(tuple(row))
        self.total_rows += len(requests)
        self.malformed_count += parser.malformed_count
        if parser.malformed_count:
            logger.warning("%d verdict answers were malformed", parser.malformed_count)
        return matrix

    def infer_changeit_labels(
        self,
        descriptions: Sequence[StateDescription],
        category: ChangeItCategory,
    ) -> list[ChangePhase]:
        """Initial/Action/End/Ambiguous phase per description."""
        requests = [
            prompts.render_infer_changeit(
                category.object_name,
                self._history(descriptions, i),
                category.end_states,
                category.action_name,
            )
            for i in range(len(descriptions))
        ]
        parser = ChangePhaseParser()
        phases = [parser.parse(text) for text in self._fan_out(requests)]
        self.total_rows += len(requests)
        self.malformed_count += parser.malformed_count
        return phases

    # ------------------------------------------------------------- chain

    def run_chain(self, transcript: NarrationTranscript, vocab: StateVocabulary) -> ActionStateChain:
        """
        Run all three stages for one video.

        Raises:
            LabelingError: A stage failed; the message carries the stage tag

        """
        self.reset_counters()
        video_id = transcript.video_id
        actions = _stage("extract_actions", video_id, lambda: self.extract_actions(transcript))
        descriptions: list[StateDescription] = []
        verdicts: list[tuple[StateVerdict, ...]] = []
        if actions:
            descriptions = _stage(
                "describe_states",
                video_id,
                lambda: self.describe_states(
                    actions,
                    vocab.object_primary_name,
                    vocab.object_secondary_names,
                ),
            )
            verdicts = _stage("infer_labels", video_id, lambda: self.infer_labels(descriptions, vocab))
        logger.info(
            "%s: %d actions, %d malformed of %d rows",
            video_id,
            len(actions),
            self.malformed_count,
            self.total_rows,
        )
        return ActionStateChain(
            video_id=video_id,
            actions=tuple(actions),
            descriptions=tuple(descriptions),
            verdicts=tuple(verdicts),
            malformed_count=self.malformed_count,
            total_rows=self.total_rows,
        )


def _stage(name: str, video_id: str, call: Callable[[], R]) -> R:
    try:
        return call()
    except LabelingError:
        raise
    except StatepipeError as e:
        raise LabelingError(e.message, stage=name, video_id=video_id) from e


def extract_actions(
    transcript: NarrationTranscript,
    client: CompletionClient,
    config: LabelerConfig | None = None,
) -> list[ManipulationAction]:
    """Stage (a) as a function."""
    return ChainLabeler(client, config).extract_actions(transcript)


def describe_states(
    actions: Sequence[ManipulationAction],
    object_name: str,
    client: CompletionClient,
    config: LabelerConfig | None = None,
) -> list[StateDescription]:
    """Stage (b) as a function."""
    return ChainLabeler(client, config).describe_states(actions, object_name)


def infer_labels(
    descriptions: Sequence[StateDescription],
    vocab: StateVocabulary,
    client: CompletionClient,
    config: LabelerConfig | None = None,
) -> list[tuple[StateVerdict, ...]]:
    """Stage (c) as a function."""
    return ChainLabeler(client, config).infer_labels(descriptions, vocab)


def infer_changeit_labels(
    descriptions: Sequence[StateDescription],
    category: ChangeItCategory,
    client: CompletionClient,
    config: LabelerConfig | None = None,
) -> list[ChangePhase]:
    """Phase inference as a function."""
    return ChainLabeler(client, config).infer_changeit_labels(descriptions, category)


def run_chain(
    transcript: NarrationTranscript,
    vocab: StateVocabulary,
    client: CompletionClient,
    config: LabelerConfig | None = None,
) -> ActionStateChain:
    """All three stages for one video."""
    return ChainLabeler(client, config).run_chain(transcript, vocab)
