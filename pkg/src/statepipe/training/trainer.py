"""
Teacher training on pseudo-labels and ensemble mean-teacher self-training.

Phase one fits a teacher MLP and a teacher TCN on the ternary pseudo-labels
with masked BCE. Phase two fits freshly initialized student models on the
α-weighted ensemble of the teachers' predictions while the teachers track the
students by exponential moving average. Only the student TCN is kept for
inference.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from statepipe.containers.config import TrainConfig
from statepipe.core.exceptions import ShapeError
from statepipe.nn import AdamW, MlpModel, ModelSpec, SequenceModel, TcnModel, multi_stage_loss
from statepipe.training.dataset import Example, TrainingItem, prepare

logger = logging.getLogger(__name__)

# Seed-stream offsets; each model and each shuffle draws from its own stream.
_STREAMS = {
    "teacher_mlp": 0,
    "teacher_tcn": 1,
    "student_mlp": 2,
    "student_tcn": 3,
    "shuffle_teachers": 10,
    "shuffle_students": 11,
}


def model_specs(input_dim: int, num_states: int, config: TrainConfig) -> tuple[ModelSpec, ModelSpec]:
    """MLP and TCN specs for the configured hyperparameters."""
    mlp = ModelSpec(kind="mlp", input_dim=input_dim, num_states=num_states, hidden_dim=config.hidden_dim)
    tcn = ModelSpec(
        kind="tcn",
        input_dim=input_dim,
        num_states=num_states,
        stages=config.tcn_stages,
        layers=config.tcn_layers,
        channels=config.tcn_channels,
        dropout=config.dropout,
    )
    return mlp, tcn


def ensemble_target(tcn_out: np.ndarray, mlp_out: np.ndarray, alpha: float) -> np.ndarray:
    """
    Soft targets α·tcn + (1 − α)·mlp, elementwise.

    Raises:
        ShapeError: Predictions differ in shape

    """
    if tcn_out.shape != mlp_out.shape:
        msg = f"ensemble inputs differ in shape: {tcn_out.shape} vs {mlp_out.shape}"
        raise ShapeError(msg)
    return alpha * tcn_out + (1 - alpha) * mlp_out


def ema_update(teacher: SequenceModel, student: SequenceModel, momentum: float) -> None:
    """
    θ_teacher ← m·θ_teacher + (1 − m)·θ_student, in place.

    Raises:
        ShapeError: The two models are not the same architecture

    """
    teacher_params = teacher.parameters()
    student_params = student.parameters()
    if len(teacher_params) != len(student_params):
        msg = f"teacher has {len(teacher_params)} parameters, student {len(student_params)}"
        raise ShapeError(msg)
    for t, s in zip(teacher_params, student_params, strict=True):
        if t.value.shape != s.value.shape:
            msg = f"{t.name}: teacher {t.value.shape} vs student {s.value.shape}"
            raise ShapeError(msg)
        t.value *= t.value.dtype.type(momentum)
        t.value += t.value.dtype.type(1 - momentum) * s.value


@dataclass
class TeacherPair:
    """The two stage-one models."""

    mlp: MlpModel
    tcn: TcnModel


@dataclass
class TrainingRun:
    """Models, optimizers and bookkeeping of one training session."""

    teachers: TeacherPair | None = None
    student_mlp: MlpModel | None = None
    student_tcn: TcnModel | None = None
    optimizers: dict[str, AdamW] = field(default_factory=dict)
    steps: dict[str, int] = field(default_factory=dict)
    epochs: dict[str, int] = field(default_factory=dict)
    loss_history: dict[str, list[float]] = field(default_factory=dict)


class Trainer:
    """Runs both training phases under one TrainConfig."""

    def __init__(self, config: TrainConfig | None = None) -> None:
        """
        Initialize the trainer.

        Args:
            config: Optimization and architecture settings

        """
        self.config = config or TrainConfig()
        self.dtype = self.config.precision.dtype
        self.run = TrainingRun()

    def _rng(self, stream: str) -> np.random.Generator:
        return np.random.default_rng([self.config.seed, _STREAMS[stream]])

    def _optimizer(self, model: SequenceModel) -> AdamW:
        return AdamW(model.parameters(), lr=self.config.lr, weight_decay=self.config.weight_decay)

    def _batches(self, count: int, rng: np.random.Generator) -> list[np.ndarray]:
        order = rng.permutation(count)
        size = self.config.batch_size
        return [order[i : i + size] for i in range(0, count, size)]

    def _step(
        self,
        model: SequenceModel,
        optimizer: AdamW,
        batch: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]],
        *,
        final_stage_only: bool = False,
    ) -> float:
        """
        One optimizer step over whole sequences.

        The loss of every sequence is normalized by the batch's total valid
        cells, so the batch loss is the mean over all valid cells of the batch.
        """
        optimizer.zero_grad()
        denominator = sum(int(np.count_nonzero(mask)) for _, _, mask in batch)
        if denominator == 0:
            return 0.0
        total = 0.0
        for features, targets, mask in batch:
            stage_logits = model.forward(features, training=True)
            if final_stage_only:
                loss, grads = multi_stage_loss(stage_logits[-1:], targets, mask, denominator)
                grads = [np.zeros_like(logits) for logits in stage_logits[:-1]] + grads
            else:
                loss, grads = multi_stage_loss(stage_logits, targets, mask, denominator)
            model.backward(grads)
            total += loss
        optimizer.step()
        return total

    def _budget_left(self, name: str) -> bool:
        cap = self.config.max_steps
        return cap is None or self.run.steps.get(name, 0) < cap

    def fit(
        self,
        name: str,
        model: SequenceModel,
        items: Sequence[TrainingItem],
        epochs: int,
    ) -> list[float]:
        """
        Train one model on hard labels for ``epochs`` epochs.

        Returns:
            Mean batch loss per epoch

        """
        optimizer = self.run.optimizers.setdefault(name, self._optimizer(model))
        rng = self._rng("shuffle_teachers")
        history = self.run.loss_history.setdefault(name, [])
        for epoch in range(epochs):
            if not self._budget_left(name):
                logger.info("%s: step cap %s reached at epoch %d", name, self.config.max_steps, epoch)
                break
            losses = []
            for batch in self._batches(len(items), rng):
                if not self._budget_left(name):
                    break
                arrays = [(items[i].features, items[i].targets, items[i].mask) for i in batch]
                losses.append(self._step(model, optimizer, arrays))
                self.run.steps[name] = self.run.steps.get(name, 0) + 1
            history.append(float(np.mean(losses)) if losses else 0.0)
            self.run.epochs[name] = epoch + 1
            logger.debug("%s epoch %d: loss %.6f", name, epoch + 1, history[-1])
        if history:
            logger.info("%s: %d epochs, final loss %.6f", name, len(history), history[-1])
        return history

    def train_teachers(self, dataset: list[Example]) -> TeacherPair:
        """
        Fit the teacher MLP and teacher TCN on pseudo-labels.

        Raises:
            TrainingError: Empty dataset or no assigned cell
            ShapeError: Features and labels do not pair up

        """
        items = prepare(dataset, self.dtype)
        mlp_spec, tcn_spec = model_specs(items[0].features.shape[1], items[0].targets.shape[1], self.config)
        mlp = MlpModel(mlp_spec, self._rng("teacher_mlp"), self.dtype)
        tcn = TcnModel(tcn_spec, self._rng("teacher_tcn"), self.dtype)
        logger.info(
            "Training teachers on %d videos (%d epochs, batch %d)",
            len(items),
            self.config.epochs_stage1,
            self.config.batch_size,
        )
        self.fit("teacher_mlp", mlp, items, self.config.epochs_stage1)
        self.fit("teacher_tcn", tcn, items, self.config.epochs_stage1)
        self.run.teachers = TeacherPair(mlp=mlp, tcn=tcn)
        return self.run.teachers

    def _soft_targets(
        self,
        teachers: TeacherPair,
        items: Sequence[TrainingItem],
        batch: np.ndarray,
    ) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Ensemble targets of a batch from the current teacher snapshot."""
        arrays = []
        for i in batch:
            item = items[i]
            target = ensemble_target(
                teachers.tcn.predict(item.features),
                teachers.mlp.predict(item.features),
                self.config.alpha,
            ).astype(self.dtype)
            mask = item.mask if self.config.targets_on == "assigned" else np.ones_like(item.mask)
            arrays.append((item.features, target, mask))
        return arrays

    def self_train(self, teachers: TeacherPair, dataset: list[Example]) -> TcnModel:
        """
        Fit fresh student models on ensemble targets with EMA teacher updates.

        With ``targets_on="all"`` the label timelines only name the videos, so
        an all-Unassigned dataset is accepted.

        Returns:
            The student TCN

        """
        cfg = self.config
        items = prepare(dataset, self.dtype, require_assigned=cfg.targets_on == "assigned")
        student_mlp = MlpModel(teachers.mlp.spec, self._rng("student_mlp"), self.dtype)
        student_tcn = TcnModel(teachers.tcn.spec, self._rng("student_tcn"), self.dtype)
        self.run.student_mlp, self.run.student_tcn = student_mlp, student_tcn
        opt_mlp = self.run.optimizers.setdefault("student_mlp", self._optimizer(student_mlp))
        opt_tcn = self.run.optimizers.setdefault("student_tcn", self._optimizer(student_tcn))
        rng = self._rng("shuffle_students")
        history = self.run.loss_history.setdefault("student_tcn", [])
        final_only = cfg.student_loss == "final_stage"
        logger.info("Self-training students for %d epochs (alpha=%.2f)", cfg.epochs_stage2, cfg.alpha)

        for epoch in range(cfg.epochs_stage2):
            if not self._budget_left("student_tcn"):
                break
            losses = []
            for batch in self._batches(len(items), rng):
                if not self._budget_left("student_tcn"):
                    break
                arrays = self._soft_targets(teachers, items, batch)
                self._step(student_mlp, opt_mlp, arrays)
                losses.append(self._step(student_tcn, opt_tcn, arrays, final_stage_only=final_only))
                self.run.steps["student_tcn"] = self.run.steps.get("student_tcn", 0) + 1
                if cfg.ema_per == "step":
                    ema_update(teachers.mlp, student_mlp, cfg.ema_momentum)
                    ema_update(teachers.tcn, student_tcn, cfg.ema_momentum)
            if cfg.ema_per == "epoch":
                ema_update(teachers.mlp, student_mlp, cfg.ema_momentum)
                ema_update(teachers.tcn, student_tcn, cfg.ema_momentum)
            history.append(float(np.mean(losses)) if losses else 0.0)
            self.run.epochs["student_tcn"] = epoch + 1
            logger.debug("student epoch %d: loss %.6f", epoch + 1, history[-1])
        return student_tcn


def train_teachers(dataset: list[Example], config: TrainConfig | None = None) -> tuple[MlpModel, TcnModel]:
    """Phase one as a function."""
    pair = Trainer(config).train_teachers(dataset)
    return pair.mlp, pair.tcn


def self_train(teachers: TeacherPair, dataset: list[Example], config: TrainConfig | None = None) -> TcnModel:
    """Phase two as a function."""
    return Trainer(config).self_train(teachers, dataset)
