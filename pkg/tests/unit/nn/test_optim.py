"""Tests for AdamW."""

import numpy as np
import pytest

from statepipe.core.exceptions import ShapeError
from statepipe.nn import AdamW, Parameter


def _param(values: list[float], grads: list[float]) -> Parameter:
    param = Parameter("w", np.array(values, dtype=np.float64))
    param.grad[...] = grads
    return param


class TestAdamW:
    """Closed-form updates."""

    def test_first_step(self) -> None:
        """Bias correction makes step one θ(1 − lr·wd) − lr·g/(|g| + eps)."""
        theta0 = np.array([1.0, -2.0, 0.5])
        g = np.array([0.3, -0.1, 0.0])
        param = _param(theta0.tolist(), g.tolist())
        AdamW([param], lr=0.01, weight_decay=0.1).step()
        expected = theta0 * (1 - 0.01 * 0.1) - 0.01 * g / (np.abs(g) + 1e-8)
        np.testing.assert_allclose(param.value, expected, rtol=1e-12, atol=1e-15)

    def test_two_steps(self) -> None:
        """Moments carry across steps."""
        lr, b1, b2, eps, wd = 0.1, 0.9, 0.999, 1e-8, 0.0
        param = _param([1.0], [2.0])
        optimizer = AdamW([param], lr=lr, beta1=b1, beta2=b2, eps=eps, weight_decay=wd)
        optimizer.step()
        param.grad[...] = -1.0
        optimizer.step()

        m1, v1 = (1 - b1) * 2.0, (1 - b2) * 4.0
        theta1 = 1.0 - lr * (m1 / (1 - b1)) / (np.sqrt(v1 / (1 - b2)) + eps)
        m2, v2 = b1 * m1 + (1 - b1) * -1.0, b2 * v1 + (1 - b2) * 1.0
        theta2 = theta1 - lr * (m2 / (1 - b1**2)) / (np.sqrt(v2 / (1 - b2**2)) + eps)
        assert param.value[0] == pytest.approx(theta2, rel=1e-12)

    def test_decay_without_gradient(self) -> None:
        """A zero gradient still shrinks the weights."""
        param = _param([4.0], [0.0])
        AdamW([param], lr=0.5, weight_decay=0.1).step()
        assert param.value[0] == pytest.approx(4.0 * 0.95)

    def test_zero_grad(self) -> None:
        """Gradients are cleared through the optimizer."""
        param = _param([1.0, 2.0], [3.0, 4.0])
        AdamW([param]).zero_grad()
        assert not param.grad.any()

    def test_gradient_shape_mismatch(self) -> None:
        """A gradient of the wrong shape is rejected."""
        param = _param([1.0, 2.0], [0.0, 0.0])
        param.grad = np.zeros(3)
        with pytest.raises(ShapeError, match="gradient"):
            AdamW([param]).step()
