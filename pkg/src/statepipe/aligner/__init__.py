"""Frame-level alignment of chain verdicts."""

from statepipe.aligner.align import (
    OTHERS,
    Aligner,
    AlignmentStats,
    align,
    assign_background,
    candidate_actions,
    filter_by_state,
    select_action,
)

__all__ = [
    "OTHERS",
    "Aligner",
    "AlignmentStats",
    "align",
    "assign_background",
    "candidate_actions",
    "filter_by_state",
    "select_action",
]
