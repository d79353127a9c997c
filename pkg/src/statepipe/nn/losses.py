"""Masked binary cross-entropy on logits."""

from collections.abc import Sequence

import numpy as np

from statepipe.core.exceptions import ShapeError
from statepipe.nn.layers import sigmoid


def masked_bce(
    logits: np.ndarray,
    targets: np.ndarray,
    mask: np.ndarray,
    denominator: int | None = None,
) -> tuple[float, np.ndarray]:
    """
    Mean binary cross-entropy over valid cells, with its logit gradient.

    Uses the fused form max(z, 0) − y·z + log(1 + e^−|z|), so targets may be
    hard 0/1 labels or soft probabilities. Masked cells contribute nothing:
    their gradient is exactly zero whatever their logits hold.

    Args:
        logits: T×K pre-sigmoid scores
        targets: T×K targets in [0, 1]
        mask: T×K boolean validity mask
        denominator: Normalizer; defaults to the number of valid cells

    Returns:
        (loss, gradient wrt logits); (0.0, zeros) when nothing is valid

    Raises:
        ShapeError: Shapes disagree

    """
    if logits.shape != targets.shape or logits.shape != mask.shape:
        msg = f"masked_bce: logits {logits.shape}, targets {targets.shape}, mask {mask.shape}"
        raise ShapeError(msg)
    mask = mask.astype(bool)
    count = int(np.count_nonzero(mask)) if denominator is None else denominator
    if count == 0:
        return 0.0, np.zeros_like(logits)

    z = logits[mask]
    y = targets[mask].astype(logits.dtype)
    per_cell = np.maximum(z, 0) - y * z + np.log1p(np.exp(-np.abs(z)))
    loss = float(per_cell.sum(dtype=np.float64) / count)

    grad = np.zeros_like(logits)
    grad[mask] = (sigmoid(z) - y) / logits.dtype.type(count)
    return loss, grad


def multi_stage_loss(
    stage_logits: Sequence[np.ndarray],
    targets: np.ndarray,
    mask: np.ndarray,
    denominator: int | None = None,
) -> tuple[float, list[np.ndarray]]:
    """Sum of masked BCE over stages, with one logit gradient per stage."""
    if not stage_logits:
        msg = "multi_stage_loss needs at least one stage"
        raise ShapeError(msg)
    total = 0.0
    grads = []
    for logits in stage_logits:
        loss, grad = masked_bce(logits, targets, mask, denominator)
        total += loss
        grads.append(grad)
    return total, grads
