"""Adam with bias-corrected moments, the only optimizer the pipeline uses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import DimensionError
from .layers import Parameter


@dataclass
class AdamState:
    """First/second moment accumulators for one parameter tensor."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_shape(cls, shape, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        return cls(m=np.zeros(shape), v=np.zeros(shape), beta1=beta1, beta2=beta2, eps=eps)


def adam_step(values: np.ndarray, grad: np.ndarray, state: AdamState, lr: float) -> np.ndarray:
    """One bias-corrected update; mutates ``values`` and ``state`` in place."""
    if lr <= 0.0:
        raise ValueError("learning rate must be positive")
    if grad.shape != values.shape:
        raise DimensionError(f"gradient shape {grad.shape} != parameter shape {values.shape}")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    values -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return values


class Adam:
    """Per-parameter Adam over a parameter collection; lr is passed per step
    so a schedule can drive it."""

    def __init__(self, params, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params: list[Parameter] = list(params)
        self.states = [
            AdamState.for_shape(p.values.shape, beta1, beta2, eps) for p in self.params
        ]

    def step(self, lr: float):
        for p, state in zip(self.params, self.states):
            if p.grad is None:
                continue
            adam_step(p.values, p.grad, state, lr)

    def zero_grad(self):
        for p in self.params:
            p.grad = None
