"""External model endpoints: chat completion and frame scorers."""

from statepipe.api_clients.chat import LabelerClient, ResponseCache
from statepipe.api_clients.scorers import (
    EmbeddingScorer,
    FrameScorer,
    ScorerSet,
    StubScorer,
    VlmScorer,
    build_scorers,
)

__all__ = [
    "EmbeddingScorer",
    "FrameScorer",
    "LabelerClient",
    "ResponseCache",
    "ScorerSet",
    "StubScorer",
    "VlmScorer",
    "build_scorers",
]
