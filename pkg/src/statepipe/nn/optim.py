"""Adam with decoupled weight decay."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from statepipe.core.exceptions import ShapeError
from statepipe.nn.layers import Parameter

logger = logging.getLogger(__name__)


@dataclass
class AdamWState:
    """First/second moments and step count of one parameter."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0


class AdamW:
    """
    Bias-corrected Adam whose weight decay is applied directly to the weights.

    Each step first shrinks θ by ``lr·weight_decay·θ`` and then applies the
    adaptive update, so decay never passes through the moment estimates.
    """

    def __init__(
        self,
        parameters: Sequence[Parameter],
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.01,
    ) -> None:
        """
        Initialize optimizer state for ``parameters``.

        Args:
            parameters: Parameters updated in place by ``step``
            lr: Learning rate
            beta1: First-moment decay
            beta2: Second-moment decay
            eps: Denominator epsilon
            weight_decay: Decoupled decay coefficient

        """
        self.parameters = list(parameters)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.state = {
            id(p): AdamWState(m=np.zeros_like(p.value), v=np.zeros_like(p.value)) for p in self.parameters
        }
        logger.debug(
            "AdamW over %d parameters (lr=%g, weight_decay=%g)",
            len(self.parameters),
            lr,
            weight_decay,
        )

    def zero_grad(self) -> None:
        """Reset every parameter's gradient."""
        for param in self.parameters:
            param.zero_grad()

    def step(self) -> None:
        """Update every parameter from its accumulated gradient."""
        for param in self.parameters:
            if param.grad.shape != param.value.shape:
                msg = f"{param.name}: gradient {param.grad.shape} vs value {param.value.shape}"
                raise ShapeError(msg)
            state = self.state[id(param)]
            state.step += 1
            dtype = param.value.dtype.type

            if self.weight_decay:
                param.value -= dtype(self.lr * self.weight_decay) * param.value

            g = param.grad
            state.m *= dtype(self.beta1)
            state.m += dtype(1 - self.beta1) * g
            state.v *= dtype(self.beta2)
            state.v += dtype(1 - self.beta2) * g * g
            m_hat = state.m / dtype(1 - self.beta1**state.step)
            v_hat = state.v / dtype(1 - self.beta2**state.step)
            param.value -= dtype(self.lr) * m_hat / (np.sqrt(v_hat) + dtype(self.eps))
