"""Numerical kernel and the two classifier architectures."""

from statepipe.nn.gradcheck import numerical_gradient, relative_error
from statepipe.nn.layers import (
    DilatedConv1d,
    DilatedResidualLayer,
    Dropout,
    Layer,
    Linear,
    Parameter,
    ReLU,
    Sigmoid,
    sigmoid,
)
from statepipe.nn.losses import masked_bce, multi_stage_loss
from statepipe.nn.models import (
    MlpModel,
    ModelSpec,
    SequenceModel,
    TcnModel,
    build_model,
    load_model,
    mlp_forward,
    save_model,
    tcn_forward,
)
from statepipe.nn.optim import AdamW, AdamWState

__all__ = [
    "AdamW",
    "AdamWState",
    "DilatedConv1d",
    "DilatedResidualLayer",
    "Dropout",
    "Layer",
    "Linear",
    "MlpModel",
    "ModelSpec",
    "Parameter",
    "ReLU",
    "SequenceModel",
    "Sigmoid",
    "TcnModel",
    "build_model",
    "load_model",
    "masked_bce",
    "mlp_forward",
    "multi_stage_loss",
    "numerical_gradient",
    "relative_error",
    "save_model",
    "sigmoid",
    "tcn_forward",
]
