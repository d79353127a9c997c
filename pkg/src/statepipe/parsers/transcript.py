"""JSON-lines transcript loader."""

import json
import logging
from pathlib import Path
from typing import Any

import pydantic

from statepipe.core.exceptions import ParsingError, ValidationError
from statepipe.models import NarrationSentence, NarrationTranscript, VideoRecord
from statepipe.parsers.base import BaseParser

logger = logging.getLogger(__name__)

TRANSCRIPT_SUFFIX = ".jsonl"
META_SUFFIX = ".meta.json"


class TranscriptParser(BaseParser[NarrationTranscript]):
    """
    Parse a transcript: one ``{text, start_s, end_s}`` object per line.

    Malformed lines raise immediately with their 1-based line number; an
    out-of-order transcript is sorted and flagged with ``was_resorted``.
    """

    def __init__(self, video_id: str, duration_s: float | None = None, source: str | None = None) -> None:
        """Initialize with the video-level metadata."""
        super().__init__()
        self.video_id = video_id
        self.duration_s = duration_s
        self.source = source

    def parse(self, text: str) -> NarrationTranscript:
        """Parse JSON-lines text into a validated transcript."""
        sentences: list[NarrationSentence] = []
        for line_number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            sentences.append(self._parse_sentence(line, line_number))

        ordered = sorted(sentences, key=lambda sentence: sentence.start_s)
        was_resorted = ordered != sentences
        if was_resorted:
            logger.warning("Transcript %s was out of order; sorted by start time", self.video_id)

        duration = self.duration_s
        if duration is None:
            duration = max((sentence.end_s for sentence in ordered), default=0.0)
        try:
            return NarrationTranscript(
                video_id=self.video_id,
                duration_s=duration,
                sentences=tuple(ordered),
                was_resorted=was_resorted,
            )
        except pydantic.ValidationError as e:
            msg = f"Invalid transcript {self.video_id}: {e.errors()[0]['msg']}"
            raise ValidationError(msg, field="sentences") from e

    def _parse_sentence(self, line: str, line_number: int) -> NarrationSentence:
        try:
            record: Any = json.loads(line)
        except json.JSONDecodeError as e:
            msg = f"Malformed JSON: {e.msg}"
            raise ParsingError(msg, source=self.source, line_number=line_number) from e
        if not isinstance(record, dict) or not {"text", "start_s", "end_s"} <= record.keys():
            msg = "Expected an object with text, start_s and end_s"
            raise ParsingError(msg, source=self.source, line_number=line_number)
        try:
            return NarrationSentence(
                text=str(record["text"]),
                start_s=record["start_s"],
                end_s=record["end_s"],
            )
        except pydantic.ValidationError as e:
            msg = f"Invalid sentence at line {line_number}: {e.errors()[0]['msg']}"
            raise ValidationError(msg, field="sentence", value=line.strip()) from e


def meta_path_for(path: Path) -> Path:
    """Sidecar metadata path of a transcript file."""
    stem = path.name.removesuffix(TRANSCRIPT_SUFFIX)
    return path.with_name(stem + META_SUFFIX)


def read_meta(path: Path) -> dict[str, Any]:
    """Sidecar ``{video_id, duration_s, title}``, or an empty dict when absent."""
    meta_path = meta_path_for(path)
    if not meta_path.exists():
        return {}
    try:
        return dict(json.loads(meta_path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, TypeError, ValueError) as e:
        msg = f"Malformed metadata sidecar: {e}"
        raise ParsingError(msg, source=str(meta_path)) from e


def load_transcript(path: Path) -> NarrationTranscript:
    """
    Load and validate a transcript file.

    Args:
        path: ``<video_id>.jsonl`` file; an optional ``<video_id>.meta.json``
            sidecar supplies the video id and duration

    Returns:
        Sorted, validated transcript

    Raises:
        ParsingError: Malformed line (line number reported)
        ValidationError: A sentence or the transcript breaks an invariant

    """
    meta = read_meta(path)
    parser = TranscriptParser(
        video_id=str(meta.get("video_id", path.name.removesuffix(TRANSCRIPT_SUFFIX))),
        duration_s=meta.get("duration_s"),
        source=str(path),
    )
    return parser.parse(path.read_text(encoding="utf-8"))


def load_video_record(path: Path) -> VideoRecord:
    """Load a transcript together with the title from its sidecar."""
    transcript = load_transcript(path)
    return VideoRecord(
        video_id=transcript.video_id,
        title=str(read_meta(path).get("title", "")),
        transcript=transcript,
    )


def discover_transcripts(directory: Path) -> list[Path]:
    """Transcript files of a directory in sorted order."""
    return sorted(directory.glob(f"*{TRANSCRIPT_SUFFIX}"))
