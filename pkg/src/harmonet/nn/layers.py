"""Parameter containers and the layer objects models are wired from."""

from __future__ import annotations

import math

import numpy as np

from . import ops
from .tensor import DimensionError, Tensor


class Parameter(Tensor):
    """A named learnable tensor. ``kind`` separates weights (L2-penalized)
    from biases and normalization gains/shifts (never penalized)."""

    __slots__ = ("name", "kind")

    def __init__(self, values, name: str, kind: str = "weight"):
        if kind not in ("weight", "bias", "gain", "shift"):
            raise ValueError(f"unknown parameter kind: {kind}")
        super().__init__(values, requires_grad=True)
        self.name = name
        self.kind = kind


class ParameterSet:
    """Ordered collection of uniquely named, non-aliased parameters."""

    def __init__(self):
        self._params: dict[str, Parameter] = {}

    def register(self, p: Parameter) -> Parameter:
        if p.name in self._params:
            raise ValueError(f"duplicate parameter name: {p.name}")
        for existing in self._params.values():
            if existing is p:
                raise ValueError(f"parameter {p.name} aliases {existing.name}")
        self._params[p.name] = p
        return p

    def extend(self, params):
        for p in params:
            self.register(p)

    def __iter__(self):
        return iter(self._params.values())

    def __len__(self):
        return len(self._params)

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def names(self):
        return list(self._params)

    def weights(self) -> list[Parameter]:
        return [p for p in self._params.values() if p.kind == "weight"]

    def n_scalars(self) -> int:
        return sum(p.size for p in self._params.values())

    def zero_grad(self):
        for p in self._params.values():
            p.grad = None

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.values.copy() for name, p in self._params.items()}

    def load_state(self, state: dict[str, np.ndarray]):
        """Bit-exact restore; every parameter must be present with its shape."""
        missing = [n for n in self._params if n not in state]
        if missing:
            raise KeyError(f"state is missing parameters: {missing}")
        for name, p in self._params.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != p.values.shape:
                raise DimensionError(
                    f"parameter {name}: stored shape {arr.shape} != {p.values.shape}"
                )
            p.values = np.ascontiguousarray(arr)


def glorot_uniform(rng: np.random.Generator, n_out: int, n_in: int) -> np.ndarray:
    bound = math.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-bound, bound, size=(n_out, n_in))


class Dense:
    """Fully connected layer y = W x + b, weight shape (out, in)."""

    def __init__(self, n_in: int, n_out: int, name: str, rng: np.random.Generator | None = None,
                 bias: bool = True):
        self.n_in = n_in
        self.n_out = n_out
        self.name = name
        w = glorot_uniform(rng, n_out, n_in) if rng is not None else np.zeros((n_out, n_in))
        self.w = Parameter(w, f"{name}.w", "weight")
        self.b = Parameter(np.zeros(n_out), f"{name}.b", "bias") if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return ops.linear(x, self.w, self.b, name=self.name)

    def parameters(self):
        return [self.w] if self.b is None else [self.w, self.b]


class LayerNorm:
    def __init__(self, n: int, name: str, eps: float = 1e-5):
        self.n = n
        self.name = name
        self.eps = eps
        self.gain = Parameter(np.ones(n), f"{name}.gain", "gain")
        self.shift = Parameter(np.zeros(n), f"{name}.shift", "shift")

    def __call__(self, x: Tensor) -> Tensor:
        if x.values.shape[-1] != self.n:
            raise DimensionError(f"layer '{self.name}': expected width {self.n}, got {x.values.shape[-1]}")
        return ops.layer_norm(x, self.gain, self.shift, self.eps)

    def parameters(self):
        return [self.gain, self.shift]


class Conv1d:
    """Size-3 same-padding 1-d convolution layer."""

    def __init__(self, c_in: int, c_out: int, name: str, rng: np.random.Generator | None = None):
        self.c_in = c_in
        self.c_out = c_out
        self.name = name
        if rng is not None:
            bound = math.sqrt(6.0 / (3 * c_in + 3 * c_out))
            w = rng.uniform(-bound, bound, size=(c_out, c_in, 3))
        else:
            w = np.zeros((c_out, c_in, 3))
        self.w = Parameter(w, f"{name}.w", "weight")
        self.b = Parameter(np.zeros(c_out), f"{name}.b", "bias")

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv1d_same(x, self.w, self.b, name=self.name)

    def parameters(self):
        return [self.w, self.b]
