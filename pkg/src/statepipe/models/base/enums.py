"""Common enumerations across all models."""

from enum import Enum, IntEnum

import numpy as np


class TernaryLabel(IntEnum):
    """Frame-wise state label; Unassigned cells are excluded from every loss."""

    NEGATIVE = 0
    POSITIVE = 1
    UNASSIGNED = -1

    @property
    def tag(self) -> str:
        """Short tag used in label files."""
        return _LABEL_TAGS[self]

    @classmethod
    def from_tag(cls, tag: str) -> "TernaryLabel":
        """Parse a label-file tag ("pos" / "neg")."""
        for label, known in _LABEL_TAGS.items():
            if known == tag:
                return label
        msg = f"Unknown label tag: {tag!r}"
        raise ValueError(msg)


_LABEL_TAGS: dict[TernaryLabel, str] = {
    TernaryLabel.POSITIVE: "pos",
    TernaryLabel.NEGATIVE: "neg",
    TernaryLabel.UNASSIGNED: "unassigned",
}


class CacheMode(str, Enum):
    """Response-cache behavior of the chat client."""

    LIVE = "live"  # network only, cache untouched
    RECORD = "record"  # cache hit served, miss fetched and stored
    REPLAY = "replay"  # cache only, never touches the network


class ScorerKind(str, Enum):
    """Frame scorer backends."""

    VLM_CHOICE = "vlm-choice"
    VLM_BOOLEAN = "vlm-boolean"
    EMBEDDING_SIMILARITY = "embedding-similarity"
    STUB = "stub"


class QueryKind(str, Enum):
    """Kinds of per-frame scorer queries."""

    ACTION = "action"
    STATE = "state"
    BACKGROUND = "background"


class ChangePhase(str, Enum):
    """Phase of a state-changing action for the initial/action/end label space."""

    INITIAL = "initial"
    ACTION = "action"
    END = "end"
    AMBIGUOUS = "ambiguous"


class Precision(str, Enum):
    """Numerical precision of the training kernel."""

    SINGLE = "single"
    DOUBLE = "double"

    @property
    def dtype(self) -> type:
        """Numpy dtype for this precision."""
        return np.float64 if self is Precision.DOUBLE else np.float32


class StageName(str, Enum):
    """Pipeline stages in execution order."""

    CURATE = "curate"
    LABEL = "label"
    ALIGN = "align"
    TRAIN = "train"
    SELFTRAIN = "selftrain"
    EVAL = "eval"
