"""
Frame-wise state classifiers: a per-frame MLP and a multi-stage dilated TCN.

Both return a list of per-stage T×K logit arrays from ``forward`` (one entry
for the MLP); probabilities come from ``predict``. Stage s > 1 of the TCN
consumes the sigmoid of stage s − 1's logits.
"""

import json
import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import Field

from statepipe.core.exceptions import FormatError, ShapeError
from statepipe.core.formats import read_checkpoint, write_checkpoint
from statepipe.models.base import StatepipeBaseModel
from statepipe.nn.layers import DilatedResidualLayer, Layer, Linear, Parameter, ReLU, check_shape, sigmoid

logger = logging.getLogger(__name__)

HEAD_SCALE = 0.1
CHECKPOINT_SUFFIX = ".spw"
SPEC_SUFFIX = ".json"


class ModelSpec(StatepipeBaseModel):
    """Architecture hyperparameters stored next to a checkpoint."""

    kind: Literal["mlp", "tcn"]
    input_dim: int = Field(ge=1)
    num_states: int = Field(ge=1)
    hidden_dim: int = Field(default=512, ge=1)
    stages: int = Field(default=4, ge=1)
    layers: int = Field(default=10, ge=1)
    channels: int = Field(default=512, ge=1)
    dropout: float = Field(default=0.5, ge=0.0, lt=1.0)


class SequenceModel(ABC):
    """Common interface of the classifiers."""

    spec: ModelSpec

    @abstractmethod
    def forward(self, features: np.ndarray, *, training: bool = False) -> list[np.ndarray]:
        """Per-stage T×K logits."""

    @abstractmethod
    def backward(self, stage_grads: Sequence[np.ndarray]) -> np.ndarray:
        """Accumulate gradients from per-stage logit gradients; return the input gradient."""

    @abstractmethod
    def parameters(self) -> list[Parameter]:
        """All trainable parameters in a fixed order."""

    def stage_probabilities(self, features: np.ndarray) -> list[np.ndarray]:
        """Per-stage T×K probabilities in evaluation mode."""
        return [sigmoid(logits) for logits in self.forward(features)]

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Final-stage T×K probabilities."""
        return self.stage_probabilities(features)[-1]

    def zero_grad(self) -> None:
        """Reset every gradient."""
        for param in self.parameters():
            param.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        """Copies of the parameters keyed by name."""
        return {p.name: p.value.copy() for p in self.parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """
        Overwrite parameters from a name -> array mapping.

        Raises:
            ShapeError: A name is missing or a shape differs

        """
        params = self.parameters()
        missing = [p.name for p in params if p.name not in state]
        if missing:
            msg = f"state is missing parameters: {missing[:5]}"
            raise ShapeError(msg, details={"missing": missing})
        for param in params:
            value = np.asarray(state[param.name])
            if value.shape != param.value.shape:
                msg = f"{param.name}: checkpoint shape {value.shape}, model shape {param.value.shape}"
                raise ShapeError(msg)
            param.value[...] = value.astype(param.value.dtype)

    def _check_input(self, features: np.ndarray) -> None:
        check_shape(features, 2, self.spec.input_dim, f"{self.spec.kind} input")


class MlpModel(SequenceModel):
    """Linear(D → hidden), ReLU, Linear(hidden → K); every frame independent."""

    def __init__(self, spec: ModelSpec, rng: np.random.Generator, dtype: type = np.float32) -> None:
        """Initialize from a spec with He-normal weights and a down-scaled head."""
        self.spec = spec
        self.hidden = Linear("hidden", spec.input_dim, spec.hidden_dim, rng, dtype)
        self.relu = ReLU()
        self.head = Linear("head", spec.hidden_dim, spec.num_states, rng, dtype, scale=HEAD_SCALE)

    def forward(self, features: np.ndarray, *, training: bool = False) -> list[np.ndarray]:
        """Single-stage logits."""
        self._check_input(features)
        h = self.relu.forward(self.hidden.forward(features, training=training))
        return [self.head.forward(h, training=training)]

    def backward(self, stage_grads: Sequence[np.ndarray]) -> np.ndarray:
        """Backpropagate the single stage."""
        if len(stage_grads) != 1:
            msg = f"mlp has one stage, got {len(stage_grads)} gradients"
            raise ShapeError(msg)
        g = self.relu.backward(self.head.backward(stage_grads[0]))
        return self.hidden.backward(g)

    def parameters(self) -> list[Parameter]:
        """Hidden then head."""
        return [*self.hidden.parameters(), *self.head.parameters()]


class TcnStage(Layer):
    """Pointwise projection, dilated residual layers (dilation 2^l), pointwise head."""

    def __init__(
        self,
        name: str,
        in_dim: int,
        spec: ModelSpec,
        rng: np.random.Generator,
        dtype: type = np.float32,
    ) -> None:
        """Initialize one stage reading ``in_dim``-wide frames."""
        self.projection = Linear(f"{name}.conv_1x1", in_dim, spec.channels, rng, dtype)
        self.layers = [
            DilatedResidualLayer(f"{name}.layers.{i}", spec.channels, 2**i, spec.dropout, rng, dtype)
            for i in range(spec.layers)
        ]
        self.head = Linear(f"{name}.conv_out", spec.channels, spec.num_states, rng, dtype, scale=HEAD_SCALE)

    def forward(self, x: np.ndarray, *, training: bool = False) -> np.ndarray:
        """Stage logits."""
        h = self.projection.forward(x, training=training)
        for layer in self.layers:
            h = layer.forward(h, training=training)
        return self.head.forward(h, training=training)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Gradient wrt the stage input."""
        g = self.head.backward(grad_out)
        for layer in reversed(self.layers):
            g = layer.backward(g)
        return self.projection.backward(g)

    def parameters(self) -> list[Parameter]:
        """Projection, layers, head."""
        params = list(self.projection.parameters())
        for layer in self.layers:
            params.extend(layer.parameters())
        params.extend(self.head.parameters())
        return params


class TcnModel(SequenceModel):
    """Multi-stage TCN; stage 1 owns the feature projection D → channels."""

    def __init__(self, spec: ModelSpec, rng: np.random.Generator, dtype: type = np.float32) -> None:
        """Initialize ``spec.stages`` stages."""
        self.spec = spec
        self.stages = [
            TcnStage(f"stages.{s}", spec.input_dim if s == 0 else spec.num_states, spec, rng, dtype)
            for s in range(spec.stages)
        ]
        self._stage_probs: list[np.ndarray] = []

    def forward(self, features: np.ndarray, *, training: bool = False) -> list[np.ndarray]:
        """Logits of every stage, in order."""
        self._check_input(features)
        outputs = [self.stages[0].forward(features, training=training)]
        self._stage_probs = []
        for stage in self.stages[1:]:
            probs = sigmoid(outputs[-1])
            self._stage_probs.append(probs)
            outputs.append(stage.forward(probs, training=training))
        return outputs

    def backward(self, stage_grads: Sequence[np.ndarray]) -> np.ndarray:
        """Walk stages backwards, routing each stage's input gradient through the sigmoid."""
        if len(stage_grads) != len(self.stages):
            msg = f"tcn has {len(self.stages)} stages, got {len(stage_grads)} gradients"
            raise ShapeError(msg)
        carry: np.ndarray | None = None
        for s in range(len(self.stages) - 1, -1, -1):
            g = stage_grads[s] if carry is None else stage_grads[s] + carry
            grad_in = self.stages[s].backward(g)
            if s > 0:
                probs = self._stage_probs[s - 1]
                carry = grad_in * probs * (1 - probs)
            else:
                return grad_in
        msg = "tcn has no stages"
        raise ShapeError(msg)

    def parameters(self) -> list[Parameter]:
        """Parameters of every stage, in order."""
        return [p for stage in self.stages for p in stage.parameters()]


def build_model(
    spec: ModelSpec,
    rng: np.random.Generator | int = 0,
    dtype: type = np.float32,
) -> SequenceModel:
    """Instantiate the architecture named by ``spec.kind``."""
    generator = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if spec.kind == "mlp":
        return MlpModel(spec, generator, dtype)
    return TcnModel(spec, generator, dtype)


def mlp_forward(model: MlpModel, features: np.ndarray) -> np.ndarray:
    """T×K probabilities of the MLP."""
    return model.predict(features)


def tcn_forward(model: TcnModel, features: np.ndarray) -> list[np.ndarray]:
    """T×K probabilities of every TCN stage; the last one is the prediction."""
    return model.stage_probabilities(features)


def save_model(model: SequenceModel, path: Path) -> None:
    """Write ``<path>.spw`` parameters and the ``<path>.json`` spec sidecar."""
    path.parent.mkdir(parents=True, exist_ok=True)
    write_checkpoint(model.state_dict(), path.with_suffix(CHECKPOINT_SUFFIX))
    path.with_suffix(SPEC_SUFFIX).write_text(
        json.dumps(model.spec.model_dump(mode="json"), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    logger.info("Saved %s model to %s", model.spec.kind, path.with_suffix(CHECKPOINT_SUFFIX))


def load_model(path: Path, dtype: type = np.float32) -> SequenceModel:
    """
    Rebuild a model from its spec sidecar and checkpoint.

    Raises:
        FormatError: Sidecar or checkpoint missing or unreadable

    """
    spec_path = path.with_suffix(SPEC_SUFFIX)
    try:
        spec = ModelSpec.model_validate_json(spec_path.read_text(encoding="utf-8"))
    except OSError as e:
        msg = f"Cannot read model spec {spec_path}: {e}"
        raise FormatError(msg, path=str(spec_path)) from e
    checkpoint = path.with_suffix(CHECKPOINT_SUFFIX)
    if not checkpoint.is_file():
        msg = f"Checkpoint not found: {checkpoint}"
        raise FormatError(msg, path=str(checkpoint))
    model = build_model(spec, 0, dtype)
    model.load_state_dict(read_checkpoint(checkpoint))
    return model
