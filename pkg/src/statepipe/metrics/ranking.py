"""
Threshold-free scores of one state: F1-max and tie-averaged average precision.

Both rank frames by descending score. Frames with equal scores form a tied
block; F1-max only places thresholds between blocks, and average precision
is the expectation over every ordering inside each block.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from statepipe.core.exceptions import EvaluationError


@dataclass(frozen=True)
class F1Max:
    """Best F1 over thresholds and the threshold achieving it."""

    f1: float
    threshold: float
    defined: bool = True


def _ranked(scores: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scores and labels in descending score order, plus the last index of each tied block."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1).astype(bool)
    if scores.size == 0:
        msg = "cannot score an empty ranking"
        raise EvaluationError(msg)
    if scores.shape != labels.shape:
        msg = f"{scores.size} scores for {labels.size} labels"
        raise EvaluationError(msg)
    order = np.argsort(-scores, kind="stable")
    ranked_scores = scores[order]
    ranked_labels = labels[order]
    block_ends = np.flatnonzero(np.append(ranked_scores[1:] != ranked_scores[:-1], True))
    return ranked_scores, ranked_labels, block_ends


def f1_max(scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray) -> F1Max:
    """
    Maximum F1 of ``score >= τ`` over τ in the distinct scores and +∞.

    Ties in F1 go to the largest τ. Without a positive label the result is
    0 at τ = +∞ and flagged undefined.

    Raises:
        EvaluationError: Empty input or mismatched lengths

    """
    ranked_scores, ranked_labels, ends = _ranked(np.asarray(scores), np.asarray(labels))
    positives = int(ranked_labels.sum())
    if positives == 0:
        return F1Max(0.0, math.inf, defined=False)
    true_pos = np.cumsum(ranked_labels)[ends]
    predicted = ends + 1
    f1 = np.concatenate(([0.0], 2.0 * true_pos / (predicted + positives)))
    thresholds = np.concatenate(([math.inf], ranked_scores[ends]))
    best = int(np.argmax(f1))
    return F1Max(float(f1[best]), float(thresholds[best]))


def f1_at(scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray, threshold: float) -> float:
    """F1 of ``score >= threshold``; 0 when nothing is predicted and nothing is positive."""
    predicted = np.asarray(scores, dtype=np.float64) >= threshold
    actual = np.asarray(labels).astype(bool)
    denominator = int(predicted.sum()) + int(actual.sum())
    return 2.0 * int((predicted & actual).sum()) / denominator if denominator else 0.0


def average_precision(scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray) -> float:
    """
    Average precision, averaged over all orderings of tied scores.

    A tied block of n frames holding p positives, preceded by N frames with
    Q positives, contributes Σ_r (p/n)·(Q + 1 + (r − 1)(p − 1)/(n − 1))/(N + r)
    over its ranks r = 1..n: position r is positive with probability p/n and
    then expects (r − 1)(p − 1)/(n − 1) earlier positives inside the block.

    Raises:
        EvaluationError: Empty input, mismatched lengths or no positive label

    """
    _, ranked_labels, ends = _ranked(np.asarray(scores), np.asarray(labels))
    positives = int(ranked_labels.sum())
    if positives == 0:
        msg = "average precision is undefined without positive labels"
        raise EvaluationError(msg)

    total = 0.0
    seen = 0
    seen_pos = 0
    start = 0
    for end in ends:
        n = int(end) + 1 - start
        p = int(ranked_labels[start : end + 1].sum())
        if p:
            r = np.arange(1, n + 1, dtype=np.float64)
            inside = (r - 1) * (p - 1) / (n - 1) if n > 1 else np.zeros(1)
            total += float(np.sum((p / n) * (seen_pos + 1 + inside) / (seen + r)))
        seen += n
        seen_pos += p
        start = int(end) + 1
    return total / positives


def map_over_states(aps: Sequence[float | None]) -> tuple[float, int]:
    """
    Unweighted mean of the defined per-state APs.

    Returns:
        (mAP, number of undefined states excluded)

    Raises:
        EvaluationError: No state has a defined AP

    """
    defined = [ap for ap in aps if ap is not None]
    if not defined:
        msg = "no state has a defined average precision"
        raise EvaluationError(msg)
    return float(np.mean(defined)), len(aps) - len(defined)
