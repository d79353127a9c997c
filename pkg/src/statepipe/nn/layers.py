"""
Layers with hand-derived gradients over row-major T×C numpy arrays.

Every layer caches what its backward pass needs during ``forward`` and
accumulates parameter gradients into ``Parameter.grad`` in ``backward``.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from statepipe.core.exceptions import ShapeError


@dataclass(eq=False)
class Parameter:
    """A trainable array and its gradient accumulator."""

    name: str
    value: np.ndarray
    grad: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.grad = np.zeros_like(self.value)

    def zero_grad(self) -> None:
        """Reset the accumulated gradient."""
        self.grad.fill(0)


def check_shape(x: np.ndarray, ndim: int, last: int | None, where: str) -> None:
    """Raise ShapeError unless ``x`` has ``ndim`` dims and trailing size ``last``."""
    if x.ndim != ndim or (last is not None and x.shape[-1] != last):
        expected = f"{ndim}-D with last dimension {last}" if last is not None else f"{ndim}-D"
        msg = f"{where}: expected {expected}, got shape {x.shape}"
        raise ShapeError(msg, details={"shape": x.shape})


def he_normal(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, dtype: type) -> np.ndarray:
    """He-normal initialization for ReLU-adjacent weights."""
    std = np.sqrt(2.0 / max(fan_in, 1))
    return (rng.standard_normal(shape) * std).astype(dtype)


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Logistic function, split by sign so neither branch overflows."""
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class Layer(ABC):
    """A differentiable map over T×C arrays."""

    @abstractmethod
    def forward(self, x: np.ndarray, *, training: bool = False) -> np.ndarray:
        """Compute the output, caching what ``backward`` needs."""

    @abstractmethod
    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Accumulate parameter gradients and return the input gradient."""

    def parameters(self) -> list[Parameter]:
        """Trainable parameters, in a fixed order."""
        return []


class Linear(Layer):
    """y = xW + b, applied to every frame independently."""

    def __init__(
        self,
        name: str,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        dtype: type = np.float32,
        scale: float = 1.0,
    ) -> None:
        """
        Initialize He-normal weights (times ``scale``) and zero bias.

        Args:
            name: Parameter name prefix
            in_dim: Input width
            out_dim: Output width
            rng: Initialization generator
            dtype: Parameter dtype
            scale: Multiplier on the initial weights

        """
        self.in_dim = in_dim
        self.out_dim = out_dim
        weight = he_normal(rng, (in_dim, out_dim), in_dim, dtype) * dtype(scale)
        self.weight = Parameter(f"{name}.weight", weight.astype(dtype))
        self.bias = Parameter(f"{name}.bias", np.zeros(out_dim, dtype=dtype))
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray, *, training: bool = False) -> np.ndarray:  # noqa: ARG002
        """Affine map."""
        check_shape(x, 2, self.in_dim, self.weight.name)
        self._x = x
        return x @ self.weight.value + self.bias.value

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """dW = xᵀg, db = Σg, dx = gWᵀ."""
        if self._x is None:
            msg = f"{self.weight.name}: backward before forward"
            raise ShapeError(msg)
        check_shape(grad_out, 2, self.out_dim, self.weight.name)
        self.weight.grad += self._x.T @ grad_out
        self.bias.grad += grad_out.sum(axis=0)
        return grad_out @ self.weight.value.T

    def parameters(self) -> list[Parameter]:
        """Weight then bias."""
        return [self.weight, self.bias]


class ReLU(Layer):
    """max(x, 0)."""

    def __init__(self) -> None:
        """Initialize the activation cache."""
        self._active: np.ndarray | None = None

    def forward(self, x: np.ndarray, *, training: bool = False) -> np.ndarray:  # noqa: ARG002
        """Elementwise rectification."""
        self._active = x > 0
        return np.where(self._active, x, 0).astype(x.dtype)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Pass the gradient where the input was positive."""
        if self._active is None:
            msg = "relu: backward before forward"
            raise ShapeError(msg)
        return np.where(self._active, grad_out, 0).astype(grad_out.dtype)


class Sigmoid(Layer):
    """Stable logistic activation."""

    def __init__(self) -> None:
        """Initialize the output cache."""
        self._y: np.ndarray | None = None

    def forward(self, x: np.ndarray, *, training: bool = False) -> np.ndarray:  # noqa: ARG002
        """Elementwise sigmoid."""
        self._y = sigmoid(x)
        return self._y

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """σ'(x) = σ(x)(1 − σ(x))."""
        if self._y is None:
            msg = "sigmoid: backward before forward"
            raise ShapeError(msg)
        return grad_out * self._y * (1 - self._y)


class DilatedConv1d(Layer):
    """
    Kernel-3 dilated temporal convolution with zero "same" padding.

    ``weight[0]``, ``weight[1]`` and ``weight[2]`` are the taps for
    x[t − d], x[t] and x[t + d]: y[t] = Σ_j x[t + (j − 1)d] · weight[j] + b.
    """

    def __init__(
        self,
        name: str,
        in_channels: int,
        out_channels: int,
        dilation: int,
        rng: np.random.Generator,
        dtype: type = np.float32,
    ) -> None:
        """Initialize He-normal taps and zero bias."""
        if dilation < 1:
            msg = f"{name}: dilation must be >= 1, got {dilation}"
            raise ShapeError(msg)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.dilation = dilation
        weight = he_normal(rng, (3, in_channels, out_channels), 3 * in_channels, dtype)
        self.weight = Parameter(f"{name}.weight", weight)
        self.bias = Parameter(f"{name}.bias", np.zeros(out_channels, dtype=dtype))
        self._padded: np.ndarray | None = None

    def forward(self, x: np.ndarray, *, training: bool = False) -> np.ndarray:  # noqa: ARG002
        """Direct-form convolution."""
        check_shape(x, 2, self.in_channels, self.weight.name)
        d = self.dilation
        steps = x.shape[0]
        padded = np.pad(x, ((d, d), (0, 0)))
        self._padded = padded
        w = self.weight.value
        return (
            padded[0:steps] @ w[0]
            + padded[d : d + steps] @ w[1]
            + padded[2 * d : 2 * d + steps] @ w[2]
            + self.bias.value
        )

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Scatter the gradient back through the three shifted taps."""
        if self._padded is None:
            msg = f"{self.weight.name}: backward before forward"
            raise ShapeError(msg)
        check_shape(grad_out, 2, self.out_channels, self.weight.name)
        d = self.dilation
        steps = grad_out.shape[0]
        padded = self._padded
        w = self.weight.value
        grad_padded = np.zeros_like(padded)
        for tap in range(3):
            window = slice(tap * d, tap * d + steps)
            self.weight.grad[tap] += padded[window].T @ grad_out
            grad_padded[window] += grad_out @ w[tap].T
        self.bias.grad += grad_out.sum(axis=0)
        return grad_padded[d : d + steps]

    def parameters(self) -> list[Parameter]:
        """Weight then bias."""
        return [self.weight, self.bias]


class Dropout(Layer):
    """Inverted dropout; identity outside training or at rate 0."""

    def __init__(self, rate: float, rng: np.random.Generator) -> None:
        """Initialize with a drop rate in [0, 1) and a mask generator."""
        if not 0.0 <= rate < 1.0:
            msg = f"dropout rate must be in [0, 1), got {rate}"
            raise ShapeError(msg)
        self.rate = rate
        self.rng = rng
        self._scale: np.ndarray | None = None

    def forward(self, x: np.ndarray, *, training: bool = False) -> np.ndarray:
        """Zero units with probability ``rate`` and rescale the survivors."""
        if not training or self.rate == 0.0:
            self._scale = None
            return x
        keep = self.rng.random(x.shape) >= self.rate
        self._scale = (keep / (1.0 - self.rate)).astype(x.dtype)
        return x * self._scale

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Apply the forward mask."""
        return grad_out if self._scale is None else grad_out * self._scale


class DilatedResidualLayer(Layer):
    """x + dropout(conv1x1(relu(dilated_conv(x))))."""

    def __init__(
        self,
        name: str,
        channels: int,
        dilation: int,
        dropout: float,
        rng: np.random.Generator,
        dtype: type = np.float32,
    ) -> None:
        """Initialize the dilated and pointwise convolutions."""
        self.conv = DilatedConv1d(f"{name}.conv_dilated", channels, channels, dilation, rng, dtype)
        self.relu = ReLU()
        self.pointwise = Linear(f"{name}.conv_1x1", channels, channels, rng, dtype)
        self.dropout = Dropout(dropout, rng)

    def forward(self, x: np.ndarray, *, training: bool = False) -> np.ndarray:
        """Residual block."""
        h = self.relu.forward(self.conv.forward(x, training=training))
        h = self.dropout.forward(self.pointwise.forward(h), training=training)
        return x + h

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Branch gradient plus the identity path."""
        g = self.pointwise.backward(self.dropout.backward(grad_out))
        return self.conv.backward(self.relu.backward(g)) + grad_out

    def parameters(self) -> list[Parameter]:
        """Dilated convolution then pointwise convolution."""
        return [*self.conv.parameters(), *self.pointwise.parameters()]
