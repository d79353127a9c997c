"""Prompt-chain pseudo-labeling."""

from statepipe.labeler.chain import (
    ChainLabeler,
    describe_states,
    extract_actions,
    history_window,
    infer_changeit_labels,
    infer_labels,
    match_support,
    run_chain,
)

__all__ = [
    "ChainLabeler",
    "describe_states",
    "extract_actions",
    "history_window",
    "infer_changeit_labels",
    "infer_labels",
    "match_support",
    "run_chain",
]
