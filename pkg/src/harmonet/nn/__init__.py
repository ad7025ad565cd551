from .tensor import DimensionError, Tensor, UsageError, as_tensor, grad_enabled, no_grad
from .layers import Conv1d, Dense, LayerNorm, Parameter, ParameterSet, glorot_uniform
from .optim import Adam, AdamState, adam_step
from .gradcheck import grad_check
from . import ops

__all__ = [
    "Adam",
    "AdamState",
    "Conv1d",
    "Dense",
    "DimensionError",
    "LayerNorm",
    "Parameter",
    "ParameterSet",
    "Tensor",
    "UsageError",
    "adam_step",
    "as_tensor",
    "glorot_uniform",
    "grad_check",
    "grad_enabled",
    "no_grad",
    "ops",
]
