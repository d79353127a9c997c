"""Per-frame scoring backends used by interval alignment."""

import base64
import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import httpx
import numpy as np

from statepipe.api_clients.chat import LabelerClient
from statepipe.containers.config import LlmClientConfig, VlmScorerConfig
from statepipe.core.exceptions import APIError, ConfigurationError, FormatError
from statepipe.core.formats import feature_path, read_matrix_file
from statepipe.models import QueryKind, ScorerKind

logger = logging.getLogger(__name__)


class FrameScorer(ABC):
    """Answers per-frame questions about one video frame."""

    kind: ScorerKind

    @abstractmethod
    def ask(self, video_id: str, frame: int, kind: QueryKind, prompt: str) -> str:
        """Raw answer text for an action-choice or state-filter prompt."""

    def similarities(self, video_id: str, frame: int, prompts: list[str]) -> list[float]:
        """Image-text similarity of the frame against each prompt."""
        msg = f"{self.kind.value} scorer cannot compute similarities"
        raise APIError(msg, self.kind.value)


class StubScorer(FrameScorer):
    """
    Fixture-driven scorer, a pure function of (video, frame, query kind).

    Fixture JSON::

        {"answers": {"<video_id>/<frame>/<kind>": "<answer>"},
         "defaults": {"<kind>": "<answer>"}}

    Background answers are comma-separated similarity values.
    """

    kind = ScorerKind.STUB

    def __init__(self, answers: dict[str, str] | None = None, defaults: dict[str, str] | None = None) -> None:
        """Initialize from answer tables."""
        self.answers = dict(answers or {})
        self.defaults = {
            QueryKind.ACTION.value: "others",
            QueryKind.STATE.value: "The answer is True.",
            QueryKind.BACKGROUND.value: "1.0",
        } | dict(defaults or {})

    @classmethod
    def from_file(cls, path: Path) -> "StubScorer":
        """Load a stub fixture."""
        try:
            payload: dict[str, Any] = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            msg = f"Cannot read scorer fixture {path}: {e}"
            raise FormatError(msg, path=str(path)) from e
        return cls(payload.get("answers"), payload.get("defaults"))

    @staticmethod
    def key(video_id: str, frame: int, kind: QueryKind) -> str:
        """Fixture key of one query."""
        return f"{video_id}/{frame}/{kind.value}"

    def ask(self, video_id: str, frame: int, kind: QueryKind, prompt: str) -> str:  # noqa: ARG002
        """Fixture answer, falling back to the per-kind default."""
        return self.answers.get(self.key(video_id, frame, kind), self.defaults[kind.value])

    def similarities(self, video_id: str, frame: int, prompts: list[str]) -> list[float]:  # noqa: ARG002
        """Similarities from the background answer."""
        raw = self.ask(video_id, frame, QueryKind.BACKGROUND, "")
        try:
            return [float(value) for value in raw.split(",") if value.strip()]
        except ValueError as e:
            msg = f"Bad background answer {raw!r} for {video_id}/{frame}"
            raise APIError(msg, self.kind.value) from e


class VlmScorer(FrameScorer):
    """Vision-language model over the chat-completion protocol with a base64 image."""

    def __init__(self, client: LabelerClient, frames_dir: Path, kind: ScorerKind = ScorerKind.VLM_CHOICE) -> None:
        """Initialize with a chat client and the extracted-frame directory."""
        self.client = client
        self.frames_dir = frames_dir
        self.kind = kind

    def frame_path(self, video_id: str, frame: int) -> Path:
        """Image file of a frame."""
        return self.frames_dir / video_id / f"{frame:06d}.jpg"

    def ask(self, video_id: str, frame: int, kind: QueryKind, prompt: str) -> str:  # noqa: ARG002
        """Send the prompt with the frame attached."""
        path = self.frame_path(video_id, frame)
        try:
            image = base64.b64encode(path.read_bytes()).decode("ascii")
        except OSError as e:
            msg = f"Missing frame image {path}"
            raise APIError(msg, self.kind.value) from e
        messages = [
            {
                "role": "user",
                "content": [
                    {"type": "text", "text": prompt},
                    {"type": "image_url", "image_url": {"url": f"data:image/jpeg;base64,{image}"}},
                ],
            },
        ]
        return self.client.chat(messages)


class EmbeddingScorer(FrameScorer):
    """Cosine similarity between stored frame embeddings and text embeddings."""

    kind = ScorerKind.EMBEDDING_SIMILARITY

    def __init__(self, frame_embeddings_dir: Path, text_embeddings: dict[str, list[float]]) -> None:
        """Initialize from an embedding directory and a prompt -> vector table."""
        self.frame_embeddings_dir = frame_embeddings_dir
        self.text_embeddings = {
            prompt: np.asarray(vector, dtype=np.float64) for prompt, vector in text_embeddings.items()
        }
        self._frames: dict[str, np.ndarray] = {}

    @classmethod
    def from_files(cls, frame_embeddings_dir: Path, text_embeddings: Path) -> "EmbeddingScorer":
        """Load the text-embedding table from JSON."""
        try:
            table = json.loads(text_embeddings.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            msg = f"Cannot read text embeddings {text_embeddings}: {e}"
            raise FormatError(msg, path=str(text_embeddings)) from e
        return cls(frame_embeddings_dir, table)

    def ask(self, video_id: str, frame: int, kind: QueryKind, prompt: str) -> str:  # noqa: ARG002
        """Embedding backends cannot answer free-text prompts."""
        msg = "embedding-similarity scorer only answers background queries"
        raise APIError(msg, self.kind.value)

    def _frame_matrix(self, video_id: str) -> np.ndarray:
        if video_id not in self._frames:
            path = feature_path(self.frame_embeddings_dir, video_id)
            try:
                self._frames[video_id] = read_matrix_file(path).astype(np.float64)
            except OSError as e:
                msg = f"Missing frame embeddings {path}"
                raise APIError(msg, self.kind.value) from e
        return self._frames[video_id]

    def similarities(self, video_id: str, frame: int, prompts: list[str]) -> list[float]:
        """Raw cosine similarity per prompt."""
        matrix = self._frame_matrix(video_id)
        if not 0 <= frame < len(matrix):
            msg = f"Frame {frame} outside embeddings of {video_id} ({len(matrix)} frames)"
            raise APIError(msg, self.kind.value)
        image = matrix[frame]
        scores = []
        for prompt in prompts:
            if prompt not in self.text_embeddings:
                msg = f"No text embedding for prompt {prompt!r}"
                raise APIError(msg, self.kind.value)
            text = self.text_embeddings[prompt]
            denom = float(np.linalg.norm(image) * np.linalg.norm(text))
            scores.append(float(image @ text) / denom if denom else 0.0)
        return scores


@dataclass(frozen=True)
class ScorerSet:
    """Scorers for the three per-frame query kinds; no background scorer disables it."""

    action: FrameScorer
    state: FrameScorer
    background: FrameScorer | None = None


def build_scorers(config: VlmScorerConfig, transport: httpx.BaseTransport | None = None) -> ScorerSet:
    """
    Build the scorer set described by the configuration.

    Action and state queries use ``config.kind``; background queries use
    embedding similarity when embeddings are configured, else the stub
    fixture when present, else nothing.
    """
    stub = StubScorer.from_file(Path(config.stub_fixture)) if config.stub_fixture else None
    embedding = None
    if config.frame_embeddings_dir and config.text_embeddings:
        embedding = EmbeddingScorer.from_files(Path(config.frame_embeddings_dir), Path(config.text_embeddings))

    if config.kind in {ScorerKind.VLM_CHOICE, ScorerKind.VLM_BOOLEAN}:
        client = LabelerClient(
            LlmClientConfig(
                url=config.url,
                api_key=config.api_key,
                model=config.model,
                timeout=config.timeout,
                retries=config.retries,
                cache_dir=config.cache_dir,
                mode=config.mode,
            ),
            transport=transport,
            api_name="vlm",
        )
        frame_scorer: FrameScorer = VlmScorer(client, Path(config.frames_dir), config.kind)
    elif stub is not None:
        frame_scorer = stub
    else:
        msg = f"Scorer kind {config.kind.value} needs vlm.stub_fixture for action/state queries"
        raise ConfigurationError(msg)

    background = embedding or stub
    if background is None:
        logger.warning("No background scorer configured; object-absence labeling disabled")
    return ScorerSet(action=frame_scorer, state=frame_scorer, background=background)
