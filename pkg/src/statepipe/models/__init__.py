"""Domain models for Statepipe."""

from statepipe.models.base import (
    ArrayModel,
    CacheMode,
    ChangePhase,
    Precision,
    QueryKind,
    ScorerKind,
    StageName,
    StatepipeBaseModel,
    TernaryLabel,
)
from statepipe.models.chain import (
    ActionStateChain,
    ChangeItCategory,
    ManipulationAction,
    StateDescription,
    StateVerdict,
)
from statepipe.models.features import FeatureSequence
from statepipe.models.lexicon import VerbLexicon
from statepipe.models.timeline import (
    GroundTruthTimeline,
    PseudoLabelTimeline,
    frame_span,
    merge_timelines,
)
from statepipe.models.transcript import NarrationSentence, NarrationTranscript, VideoRecord
from statepipe.models.vocabulary import StateDef, StateVocabulary

__all__ = [
    "ActionStateChain",
    "ArrayModel",
    "ChangeItCategory",
    "CacheMode",
    "ChangePhase",
    "FeatureSequence",
    "GroundTruthTimeline",
    "ManipulationAction",
    "NarrationSentence",
    "NarrationTranscript",
    "Precision",
    "PseudoLabelTimeline",
    "QueryKind",
    "ScorerKind",
    "StageName",
    "StateDef",
    "StateDescription",
    "StateVerdict",
    "StateVocabulary",
    "StatepipeBaseModel",
    "TernaryLabel",
    "VerbLexicon",
    "VideoRecord",
    "frame_span",
    "merge_timelines",
]
