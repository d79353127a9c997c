"""Transcript loading and model-response parsing."""

from statepipe.parsers.base import BaseParser, ParseResult
from statepipe.parsers.responses import (
    OTHERS,
    ChangePhaseParser,
    ChoiceMatch,
    ChoiceMatcher,
    CsvRowParser,
    JudgementParser,
    VerbRowParser,
    VerdictParser,
)
from statepipe.parsers.transcript import (
    TranscriptParser,
    discover_transcripts,
    load_transcript,
    load_video_record,
)

__all__ = [
    "OTHERS",
    "BaseParser",
    "ChangePhaseParser",
    "ChoiceMatch",
    "ChoiceMatcher",
    "CsvRowParser",
    "JudgementParser",
    "ParseResult",
    "TranscriptParser",
    "VerbRowParser",
    "VerdictParser",
    "discover_transcripts",
    "load_transcript",
    "load_video_record",
]
