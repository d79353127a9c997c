"""Base model components."""

from statepipe.models.base.base import ArrayModel, StatepipeBaseModel, frozen_array
from statepipe.models.base.enums import (
    CacheMode,
    ChangePhase,
    Precision,
    QueryKind,
    ScorerKind,
    StageName,
    TernaryLabel,
)

__all__ = [
    "ArrayModel",
    "CacheMode",
    "ChangePhase",
    "Precision",
    "QueryKind",
    "ScorerKind",
    "StageName",
    "StatepipeBaseModel",
    "TernaryLabel",
    "frozen_array",
]
