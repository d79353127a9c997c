"""Tests for masked binary cross-entropy."""

import math

import numpy as np
import pytest

from statepipe.core.exceptions import ShapeError
from statepipe.nn import masked_bce, multi_stage_loss, numerical_gradient, relative_error


def _problem(seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    shape = (int(rng.integers(1, 9)), int(rng.integers(1, 4)))
    logits = rng.standard_normal(shape) * 3
    targets = rng.integers(0, 2, size=shape).astype(np.float64)
    mask = rng.random(shape) < 0.7
    mask.flat[0] = True
    return logits, targets, mask


class TestMaskedBce:
    """Loss values, gradients and masking."""

    @pytest.mark.parametrize("seed", range(10))
    def test_gradient(self, seed: int) -> None:
        """The analytic logit gradient matches central differences."""
        logits, targets, mask = _problem(seed)
        _, grad = masked_bce(logits, targets, mask)
        numeric = numerical_gradient(lambda: masked_bce(logits, targets, mask)[0], logits)
        assert relative_error(grad, numeric) < 1e-5

    def test_half_probability_positive(self) -> None:
        """p = 0.5 and y = 1 costs ln 2."""
        loss, grad = masked_bce(np.zeros((1, 1)), np.ones((1, 1)), np.ones((1, 1), dtype=bool))
        assert loss == pytest.approx(math.log(2), abs=1e-12)
        assert grad[0, 0] == pytest.approx(-0.5)

    @pytest.mark.parametrize(
        ("logit", "target", "expected"),
        [(500.0, 1.0, 0.0), (-500.0, 0.0, 0.0), (-500.0, 1.0, 500.0), (500.0, 0.0, 500.0)],
    )
    def test_extreme_logits(self, logit: float, target: float, expected: float) -> None:
        """Saturated logits give finite, exact losses."""
        with np.errstate(over="raise"):
            loss, grad = masked_bce(np.array([[logit]]), np.array([[target]]), np.ones((1, 1), dtype=bool))
        assert math.isfinite(loss)
        assert loss == pytest.approx(expected, abs=1e-9)
        assert np.isfinite(grad).all()

    def test_masked_cells_do_not_matter(self) -> None:
        """Anything in a masked cell leaves loss and gradient unchanged; its gradient is zero."""
        logits, targets, mask = _problem(42)
        loss, grad = masked_bce(logits, targets, mask)
        noisy_logits = np.where(mask, logits, 1e6)
        noisy_targets = np.where(mask, targets, 1.0 - targets)
        noisy_loss, noisy_grad = masked_bce(noisy_logits, noisy_targets, mask)
        assert noisy_loss == loss
        np.testing.assert_array_equal(noisy_grad, grad)
        assert (grad[~mask] == 0).all()

    def test_empty_mask(self) -> None:
        """Nothing valid gives zero loss and zero gradient."""
        loss, grad = masked_bce(np.ones((3, 2)), np.ones((3, 2)), np.zeros((3, 2), dtype=bool))
        assert loss == 0.0
        assert not grad.any()

    def test_explicit_denominator(self) -> None:
        """A larger shared denominator scales loss and gradient down."""
        logits, targets, mask = _problem(7)
        loss, grad = masked_bce(logits, targets, mask)
        count = int(mask.sum())
        scaled_loss, scaled_grad = masked_bce(logits, targets, mask, denominator=2 * count)
        assert scaled_loss == pytest.approx(loss / 2)
        np.testing.assert_allclose(scaled_grad, grad / 2)

    def test_soft_targets(self) -> None:
        """Probabilities are valid targets; the minimum sits at z = logit(y)."""
        y = np.array([[0.8]])
        z = np.array([[math.log(0.8 / 0.2)]])
        _, grad = masked_bce(z, y, np.ones((1, 1), dtype=bool))
        assert grad[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_shape_mismatch(self) -> None:
        """Logits, targets and mask share one shape."""
        with pytest.raises(ShapeError):
            masked_bce(np.zeros((2, 2)), np.zeros((2, 3)), np.ones((2, 2), dtype=bool))


class TestMultiStageLoss:
    """Sum over stages."""

    def test_sum_of_stages(self) -> None:
        """Total loss adds the per-stage losses; each stage keeps its own gradient."""
        logits, targets, mask = _problem(3)
        second = logits * -0.5
        total, grads = multi_stage_loss([logits, second], targets, mask)
        assert total == pytest.approx(masked_bce(logits, targets, mask)[0] + masked_bce(second, targets, mask)[0])
        np.testing.assert_array_equal(grads[1], masked_bce(second, targets, mask)[1])

    def test_needs_a_stage(self) -> None:
        """An empty stage list is an error."""
        with pytest.raises(ShapeError):
            multi_stage_loss([], np.zeros((1, 1)), np.ones((1, 1), dtype=bool))
