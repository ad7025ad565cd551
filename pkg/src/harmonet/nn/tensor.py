"""Dense float64 tensors with reverse-mode automatic differentiation.

The graph is a dynamic tape: every operation touching a tensor that
requires gradients records its inputs and a vector-Jacobian closure.
Calling ``backward()`` on a scalar output walks the tape once in reverse
topological order and accumulates gradients into the participating
tensors. Everything is 64-bit; gradient-check tolerances depend on it.
"""

from __future__ import annotations

import contextlib

import numpy as np


class UsageError(RuntimeError):
    """Autograd misuse, e.g. backward() without a recorded forward pass."""


class DimensionError(ValueError):
    """Operand extents incompatible with a layer's declared widths."""


_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block (inference / finite differences)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    """A contiguous float64 array plus the tape bookkeeping for autodiff."""

    __slots__ = ("values", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(self, values, requires_grad: bool = False):
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._vjp = None

    @property
    def shape(self):
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return self.values.size

    def item(self) -> float:
        return float(self.values.reshape(-1)[0]) if self.size == 1 else _scalar_error(self)

    def zero_grad(self):
        self.grad = None

    def backward(self):
        """Accumulate d(self)/d(leaf) into every requires-grad tensor on the tape."""
        if self._vjp is None and not self._parents:
            raise UsageError("backward() called with no recorded forward computation")
        if self.size != 1:
            raise UsageError(f"backward() requires a scalar output, got shape {self.shape}")

        order = _toposort(self)
        self.grad = np.ones_like(self.values)
        for node in reversed(order):
            if node.grad is None or node._vjp is None:
                continue
            for parent, g in zip(node._parents, node._vjp(node.grad)):
                if g is None or not parent.requires_grad:
                    continue
                parent.grad = g if parent.grad is None else parent.grad + g

    # Small operator surface; models compose the named ops in harmonet.nn.ops.
    def __add__(self, other):
        from . import ops

        return ops.add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        from . import ops

        return ops.mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        from . import ops

        return ops.sub(self, other)

    def __neg__(self):
        from . import ops

        return ops.scale(self, -1.0)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def _scalar_error(t: Tensor):
    raise UsageError(f"item() requires a scalar tensor, got shape {t.shape}")


def _toposort(root: Tensor) -> list[Tensor]:
    """Iterative post-order over the tape (inputs before consumers)."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen and parent.requires_grad:
                stack.append((parent, False))
    return order


def result(values: np.ndarray, parents: tuple, vjp) -> Tensor:
    """Create an op output, recording the tape only when gradients are live."""
    if not _grad_enabled or not any(p.requires_grad for p in parents):
        return Tensor(values)
    out = Tensor(values, requires_grad=True)
    out._parents = parents
    out._vjp = vjp
    return out


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)
