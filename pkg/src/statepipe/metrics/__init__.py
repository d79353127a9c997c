"""Frame-wise state metrics and ChangeIt-style causal precision."""

from statepipe.metrics.causal import (
    CausalTriple,
    PhaseAnnotation,
    PhaseScores,
    best_causal_triple,
    causal_precision_at_1,
)
from statepipe.metrics.evaluation import (
    PHASE_SUFFIX,
    ChangeItCategoryScores,
    ChangeItReport,
    EvalReport,
    PseudoLabelReport,
    PseudoLabelStateQuality,
    StateScores,
    evaluate_changeit,
    evaluate_changeit_directories,
    evaluate_directories,
    evaluate_predictions,
    evaluate_pseudo_labels,
)
from statepipe.metrics.ranking import F1Max, average_precision, f1_at, f1_max, map_over_states

__all__ = [
    "PHASE_SUFFIX",
    "CausalTriple",
    "ChangeItCategoryScores",
    "ChangeItReport",
    "EvalReport",
    "F1Max",
    "PhaseAnnotation",
    "PhaseScores",
    "PseudoLabelReport",
    "PseudoLabelStateQuality",
    "StateScores",
    "average_precision",
    "best_causal_triple",
    "causal_precision_at_1",
    "evaluate_changeit",
    "evaluate_changeit_directories",
    "evaluate_directories",
    "evaluate_predictions",
    "evaluate_pseudo_labels",
    "f1_at",
    "f1_max",
    "map_over_states",
]
