"""Parsers for language-model and vision-language-model responses."""

import csv
import logging
import re
from collections.abc import Sequence
from dataclasses import dataclass

from statepipe.models import ChangePhase, ManipulationAction, StateVocabulary, TernaryLabel
from statepipe.parsers.base import BaseParser, ParseResult
from statepipe.parsers.base.parser import jaccard, normalize_text

logger = logging.getLogger(__name__)

OTHERS = "others"
MATCH_FLOOR = 0.5

_ANSWER_LINE = re.compile(r"answer\s*:(.*)$", re.IGNORECASE)
_WORD = re.compile(r"[a-z]+")
_JUDGEMENT = re.compile(r"the\s+answer\s+is\W*(true|false)\b", re.IGNORECASE)

_VERDICTS: dict[str, TernaryLabel] = {
    "yes": TernaryLabel.POSITIVE,
    "no": TernaryLabel.NEGATIVE,
    "ambiguous": TernaryLabel.UNASSIGNED,
}


class CsvRowParser(BaseParser[list[tuple[str, ...]]]):
    """
    Parse a CSV answer into rows of exactly ``columns`` fields.

    Double-quoted fields may contain commas. A header row whose first field
    is ``header_field`` is dropped; rows with any other width are discarded
    and counted.
    """

    def __init__(self, columns: int = 2, header_field: str = "action") -> None:
        """Initialize the parser."""
        super().__init__()
        self.columns = columns
        self.header_field = header_field
        self.total_rows = 0

    def parse(self, text: str) -> list[tuple[str, ...]]:
        """Parse every non-empty line of the response."""
        rows: list[tuple[str, ...]] = []
        lines = self._parse_lines(text)
        for fields in csv.reader(lines, skipinitialspace=True):
            cleaned = tuple(field.strip() for field in fields)
            if not any(cleaned):
                continue
            if cleaned[0].lower() == self.header_field:
                continue
            self.total_rows += 1
            if len(cleaned) != self.columns or not all(cleaned):
                self._add_error(f"expected {self.columns} columns, got {len(cleaned)}: {cleaned}")
                continue
            rows.append(cleaned)
        return rows

    def clear_errors(self) -> None:
        """Reset counters."""
        super().clear_errors()
        self.total_rows = 0


def _last_answer(text: str) -> str | None:
    """Text after the final ``Answer:`` marker, or None when absent."""
    found: str | None = None
    for line in text.splitlines():
        match = _ANSWER_LINE.search(line)
        if match:
            found = match.group(1)
    return found


class VerdictParser(BaseParser[TernaryLabel]):
    """
    Parse a yes/no/ambiguous judgement from the final ``Answer:`` line.

    Exactly one distinct verdict token must occur in the answer; "yes or no"
    and answers without a token map to Unassigned and are counted.
    """

    def parse(self, text: str) -> TernaryLabel:
        """Map the answer to a ternary label."""
        return self.parse_result(text).value

    def parse_result(self, text: str) -> ParseResult[TernaryLabel]:
        """Parse and report whether the answer was well formed."""
        answer = _last_answer(text)
        if answer is None:
            self._add_error("no Answer line")
            return ParseResult(TernaryLabel.UNASSIGNED, ok=False)
        words = _WORD.findall(answer.lower())
        tokens = {word for word in words if word in _VERDICTS}
        if len(tokens) == 1:
            return ParseResult(_VERDICTS[tokens.pop()])
        self._add_error(f"{len(tokens)} verdict tokens in answer {answer.strip()!r}")
        return ParseResult(TernaryLabel.UNASSIGNED, ok=False)


class ChangePhaseParser(BaseParser[ChangePhase]):
    """Leading-token parse of an Initial/Action/End/Ambiguous answer."""

    def parse(self, text: str) -> ChangePhase:
        """Map the final Answer line to a phase; unparseable -> Ambiguous."""
        answer = _last_answer(text)
        words = _WORD.findall(answer.lower()) if answer is not None else []
        if words:
            try:
                return ChangePhase(words[0])
            except ValueError:
                pass
        self._add_error(f"unparseable phase answer {answer!r}")
        return ChangePhase.AMBIGUOUS


class JudgementParser(BaseParser[bool]):
    """Parse ``The answer is True/False``; a missing judgement counts as False."""

    def parse(self, text: str) -> bool:
        """Return the last judgement in the text."""
        matches = _JUDGEMENT.findall(text)
        if not matches:
            self._add_error("no 'The answer is True/False' judgement")
            return False
        return matches[-1].lower() == "true"


@dataclass(frozen=True)
class ChoiceMatch:
    """Outcome of matching a free-text choice against candidate actions."""

    action: ManipulationAction | None
    status: str  # "matched" | "others" | "unmatched"


class ChoiceMatcher(BaseParser[ChoiceMatch]):
    """
    Match a scorer's verbatim choice to a candidate action summary.

    Normalized equality wins; otherwise the highest token Jaccard overlap at or
    above the floor (first candidate on ties). "others" and unmatched answers
    both yield no action.
    """

    def __init__(self, candidates: Sequence[ManipulationAction] = (), floor: float = MATCH_FLOOR) -> None:
        """Initialize with the candidate list."""
        super().__init__()
        self.candidates = list(candidates)
        self.floor = floor

    def parse(self, text: str) -> ChoiceMatch:
        """Match against the configured candidates."""
        return self.match(text, self.candidates)

    def match(self, text: str, candidates: Sequence[ManipulationAction]) -> ChoiceMatch:
        """Match ``text`` against ``candidates``."""
        choice = normalize_text(text.strip().lstrip("-"))
        if choice in {OTHERS, "other"}:
            return ChoiceMatch(None, "others")
        for action in candidates:
            if normalize_text(action.summary) == choice:
                return ChoiceMatch(action, "matched")
        best: ManipulationAction | None = None
        best_score = 0.0
        for action in candidates:
            score = jaccard(action.summary, choice)
            if score > best_score:
                best, best_score = action, score
        if best is not None and best_score >= self.floor:
            return ChoiceMatch(best, "matched")
        self._add_error(f"choice {text.strip()!r} matches no candidate")
        return ChoiceMatch(None, "unmatched")


class VerbRowParser(BaseParser[dict[str, list[str]]]):
    """
    Parse ``"<object state>","<verb>,<verb>,..."`` rows into verbs per state.

    The first column is matched to a state by its sentence form or its name;
    rows that do not resolve to a state, or carry no verbs, are skipped.
    """

    def __init__(self, vocab: StateVocabulary) -> None:
        """Initialize with the vocabulary being expanded."""
        super().__init__()
        self.vocab = vocab
        self._rows = CsvRowParser(columns=2, header_field="object state")

    @property
    def skipped_rows(self) -> int:
        """Rows dropped for bad shape or unknown state."""
        return self.malformed_count + self._rows.malformed_count

    def parse(self, text: str) -> dict[str, list[str]]:
        """Verbs per state name, deduplicated per state in first-seen order."""
        lookup: dict[str, str] = {}
        for state in self.vocab.states:
            lookup[normalize_text(state.state_text)] = state.name
            lookup[normalize_text(state.name)] = state.name

        verbs: dict[str, list[str]] = {name: [] for name in self.vocab.state_names}
        for state_field, verb_field in self._rows.parse(text):
            name = lookup.get(normalize_text(state_field))
            candidates = [verb.strip().lower() for verb in verb_field.split(",")]
            candidates = [verb for verb in candidates if verb and len(verb.split()) == 1]
            if name is None or not candidates:
                self._add_error(f"unusable verb row for {state_field!r}")
                continue
            for verb in candidates:
                if verb not in verbs[name]:
                    verbs[name].append(verb)
        return verbs
