"""Narration transcripts and curated video records."""

from pydantic import Field, model_validator

from statepipe.models.base import StatepipeBaseModel

# End timestamps may overrun the video duration by this much.
DURATION_SLACK_S = 1.0


class NarrationSentence(StatepipeBaseModel):
    """One transcribed narration sentence with its time span in seconds."""

    text: str
    start_s: float = Field(ge=0.0)
    end_s: float

    @model_validator(mode="after")
    def _check_span(self) -> "NarrationSentence":
        if self.end_s <= self.start_s:
            msg = f"end_s ({self.end_s}) must exceed start_s ({self.start_s})"
            raise ValueError(msg)
        return self

    @property
    def word_count(self) -> int:
        """Whitespace-token count."""
        return len(self.text.split())


class NarrationTranscript(StatepipeBaseModel):
    """Timestamped narration of one video, sorted by start time."""

    video_id: str = Field(min_length=1)
    duration_s: float = Field(ge=0.0)
    sentences: tuple[NarrationSentence, ...] = ()
    was_resorted: bool = Field(
        default=False,
        description="True when the loader had to sort out-of-order sentences",
    )

    @model_validator(mode="after")
    def _check_order(self) -> "NarrationTranscript":
        starts = [sentence.start_s for sentence in self.sentences]
        if starts != sorted(starts):
            msg = "sentences must be sorted by start_s"
            raise ValueError(msg)
        for sentence in self.sentences:
            if sentence.end_s > self.duration_s + DURATION_SLACK_S:
                msg = (
                    f"sentence ends at {sentence.end_s}s, beyond duration "
                    f"{self.duration_s}s"
                )
                raise ValueError(msg)
        return self

    @property
    def word_count(self) -> int:
        """Total narration words."""
        return sum(sentence.word_count for sentence in self.sentences)

    @property
    def text(self) -> str:
        """All sentences joined by spaces."""
        return " ".join(sentence.text for sentence in self.sentences)


class VideoRecord(StatepipeBaseModel):
    """A candidate training video: title plus transcript."""

    video_id: str
    title: str = ""
    transcript: NarrationTranscript

    @model_validator(mode="after")
    def _check_ids(self) -> "VideoRecord":
        if self.transcript.video_id != self.video_id:
            msg = (
                f"transcript belongs to {self.transcript.video_id!r}, "
                f"not {self.video_id!r}"
            )
            raise ValueError(msg)
        return self

    @property
    def word_count(self) -> int:
        """Total narration words (sum of per-sentence whitespace tokens)."""
        return self.transcript.word_count
