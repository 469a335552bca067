from .functional import (
    ActivationKind,
    ConvParams,
    LinearParams,
    activation,
    avg_pool2d,
    bce_loss,
    conv2d,
    leaky_relu,
    linear,
    mse_loss,
    relu,
    sigmoid,
    tanh,
)
from .optim import Adam, AdamState, adam_step
from .tensor import Tensor, concat, no_grad, parameter

__all__ = [
    "ActivationKind",
    "Adam",
    "AdamState",
    "ConvParams",
    "LinearParams",
    "Tensor",
    "activation",
    "adam_step",
    "avg_pool2d",
    "bce_loss",
    "concat",
    "conv2d",
    "leaky_relu",
    "linear",
    "mse_loss",
    "no_grad",
    "parameter",
    "relu",
    "sigmoid",
    "tanh",
]
