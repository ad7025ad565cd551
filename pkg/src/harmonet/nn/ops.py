"""Differentiable kernels: dense layers, normalization, activations,
attention, 1-d convolution and pooling.

Every function takes and returns :class:`~harmonet.nn.tensor.Tensor` and
registers a vector-Jacobian closure on the tape. Inputs may carry leading
batch axes; the last axis (or last two for the grid ops) is the feature
axis. Nothing here broadcasts beyond what the layers need.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf

from .tensor import DimensionError, Tensor, as_tensor, result

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient back down to the shape it was broadcast from."""
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.values + b.values

    def vjp(g):
        return _unbroadcast(g, a.values.shape), _unbroadcast(g, b.values.shape)

    return result(out, (a, b), vjp)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.values - b.values

    def vjp(g):
        return _unbroadcast(g, a.values.shape), -_unbroadcast(g, b.values.shape)

    return result(out, (a, b), vjp)


def mul(a, b) -> Tensor:
    """Hadamard product (or tensor-by-python-scalar)."""
    if isinstance(b, (int, float)) and not isinstance(b, bool):
        return scale(as_tensor(a), float(b))
    if isinstance(a, (int, float)) and not isinstance(a, bool):
        return scale(as_tensor(b), float(a))
    a, b = as_tensor(a), as_tensor(b)
    out = a.values * b.values

    def vjp(g):
        return _unbroadcast(g * b.values, a.values.shape), _unbroadcast(g * a.values, b.values.shape)

    return result(out, (a, b), vjp)


def scale(a: Tensor, c: float) -> Tensor:
    a = as_tensor(a)

    def vjp(g):
        return (g * c,)

    return result(a.values * c, (a,), vjp)


def add_n(tensors) -> Tensor:
    """Element-wise sum of same-shape tensors (the fusion op)."""
    tensors = [as_tensor(t) for t in tensors]
    shape = tensors[0].values.shape
    for t in tensors:
        if t.values.shape != shape:
            raise DimensionError(f"add_n operands disagree: {t.values.shape} vs {shape}")
    out = tensors[0].values.copy()
    for t in tensors[1:]:
        out += t.values

    def vjp(g):
        return tuple(g for _ in tensors)

    return result(out, tuple(tensors), vjp)


def sum_all(a: Tensor) -> Tensor:
    a = as_tensor(a)

    def vjp(g):
        return (np.broadcast_to(g, a.values.shape),)

    return result(np.asarray(a.values.sum()), (a,), vjp)


def mean_all(a: Tensor) -> Tensor:
    a = as_tensor(a)
    n = a.values.size

    def vjp(g):
        return (np.broadcast_to(g / n, a.values.shape),)

    return result(np.asarray(a.values.mean()), (a,), vjp)


def reshape(a: Tensor, shape) -> Tensor:
    a = as_tensor(a)
    old = a.values.shape

    def vjp(g):
        return (np.ascontiguousarray(g).reshape(old),)

    return result(a.values.reshape(shape), (a,), vjp)


def transpose_last2(a: Tensor) -> Tensor:
    a = as_tensor(a)

    def vjp(g):
        return (g.swapaxes(-1, -2),)

    return result(a.values.swapaxes(-1, -2).copy(), (a,), vjp)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Stacked matrix product; operands must be at least rank 2."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError("matmul operands must be rank >= 2")
    if a.values.shape[-1] != b.values.shape[-2]:
        raise DimensionError(f"matmul inner extents disagree: {a.values.shape} @ {b.values.shape}")
    out = a.values @ b.values

    def vjp(g):
        ga = _unbroadcast(g @ b.values.swapaxes(-1, -2), a.values.shape)
        gb = _unbroadcast(a.values.swapaxes(-1, -2) @ g, b.values.shape)
        return ga, gb

    return result(out, (a, b), vjp)


def linear(x: Tensor, w: Tensor, b: Tensor | None = None, name: str = "linear") -> Tensor:
    """y = x W^T + b with weight laid out (out, in); x may be a vector or batched."""
    x, w = as_tensor(x), as_tensor(w)
    n_out, n_in = w.values.shape
    if x.values.shape[-1] != n_in:
        raise DimensionError(
            f"layer '{name}': expected input width {n_in}, got {x.values.shape[-1]}"
        )
    out = x.values @ w.values.T
    if b is not None:
        b = as_tensor(b)
        if b.values.shape != (n_out,):
            raise DimensionError(f"layer '{name}': bias extent {b.values.shape} != ({n_out},)")
        out = out + b.values

    def vjp(g):
        gx = g @ w.values
        g2 = g.reshape(-1, n_out)
        gw = g2.T @ x.values.reshape(-1, n_in)
        if b is None:
            return gx, gw
        return gx, gw, g2.sum(axis=0)

    parents = (x, w) if b is None else (x, w, b)
    return result(out, parents, vjp)


def relu(a: Tensor) -> Tensor:
    a = as_tensor(a)
    mask = a.values > 0.0

    def vjp(g):
        return (g * mask,)

    return result(np.where(mask, a.values, 0.0), (a,), vjp)


def gelu(a: Tensor) -> Tensor:
    """Exact form x * Phi(x) with Phi the standard normal CDF (erf based)."""
    a = as_tensor(a)
    x = a.values
    cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    out = x * cdf

    def vjp(g):
        pdf = _INV_SQRT2PI * np.exp(-0.5 * x * x)
        return (g * (cdf + x * pdf),)

    return result(out, (a,), vjp)


def layer_norm(x: Tensor, gain: Tensor, shift: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit population variance, then rescale."""
    if eps <= 0.0:
        raise ValueError("layer_norm eps must be positive")
    x, gain, shift = as_tensor(x), as_tensor(gain), as_tensor(shift)
    n = x.values.shape[-1]
    if gain.values.shape != (n,) or shift.values.shape != (n,):
        raise DimensionError(f"layer_norm gain/shift must have extent ({n},)")
    mu = x.values.mean(axis=-1, keepdims=True)
    xc = x.values - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = gain.values * xhat + shift.values

    def vjp(g):
        dxhat = g * gain.values
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        gx = inv * (dxhat - m1 - xhat * m2)
        axes = tuple(range(g.ndim - 1))
        ggain = (g * xhat).sum(axis=axes) if axes else g * xhat
        gshift = g.sum(axis=axes) if axes else g
        return gx, ggain, gshift

    return result(out, (x, gain, shift), vjp)


def softmax_rows(a: Tensor) -> Tensor:
    """Exp-normalize the last axis with max subtraction; rows sum to one."""
    a = as_tensor(a)
    z = a.values - a.values.max(axis=-1, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=-1, keepdims=True)

    def vjp(g):
        dot = (g * s).sum(axis=-1, keepdims=True)
        return (s * (g - dot),)

    return result(s, (a,), vjp)


def attention(x: Tensor, wq: Tensor, wk: Tensor, wv: Tensor, wo: Tensor) -> Tensor:
    """Single-head self-attention on a square feature grid.

    y = softmax((xWq)(xWk)^T / sqrt(d)) (xWv) Wo, with d the grid width.
    Projections carry no bias. x may be one grid or a batch of grids.
    """
    x = as_tensor(x)
    d = x.values.shape[-1]
    for label, w in (("wq", wq), ("wk", wk), ("wv", wv), ("wo", wo)):
        if as_tensor(w).values.shape != (d, d):
            raise DimensionError(f"attention {label} must be ({d}, {d})")
    q = matmul(x, wq)
    k = matmul(x, wk)
    v = matmul(x, wv)
    scores = scale(matmul(q, transpose_last2(k)), 1.0 / math.sqrt(d))
    weights = softmax_rows(scores)
    return matmul(matmul(weights, v), wo)


def conv1d_same(x: Tensor, w: Tensor, b: Tensor, name: str = "conv") -> Tensor:
    """Cross-correlation with kernel size 3 and zero padding that keeps length.

    x: (..., c_in, L); w: (c_out, c_in, 3); b: (c_out,).
    """
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    c_out, c_in, ksize = w.values.shape
    if ksize != 3:
        raise DimensionError(f"layer '{name}': kernel size must be 3, got {ksize}")
    if x.values.shape[-2] != c_in:
        raise DimensionError(
            f"layer '{name}': expected {c_in} input channels, got {x.values.shape[-2]}"
        )
    if b.values.shape != (c_out,):
        raise DimensionError(f"layer '{name}': bias extent {b.values.shape} != ({c_out},)")
    length = x.values.shape[-1]
    pad = [(0, 0)] * (x.values.ndim - 1) + [(1, 1)]
    xp = np.pad(x.values, pad)
    out = np.zeros(x.values.shape[:-2] + (c_out, length))
    for k in range(3):
        out += w.values[:, :, k] @ xp[..., k : k + length]
    out += b.values.reshape((c_out, 1))

    def vjp(g):
        gxp = np.zeros_like(xp)
        gw = np.zeros_like(w.values)
        gflat = g.reshape(-1, c_out, length)
        for k in range(3):
            gxp[..., k : k + length] += w.values[:, :, k].T @ g
            xs = xp[..., k : k + length].reshape(-1, c_in, length)
            gw[:, :, k] = np.einsum("bol,bcl->oc", gflat, xs)
        gx = gxp[..., 1 : 1 + length]
        gb = gflat.sum(axis=(0, 2))
        return gx, gw, gb

    return result(out, (x, w, b), vjp)


def maxpool1d(x: Tensor, size: int = 2, stride: int = 2) -> Tensor:
    """Non-overlapping max pooling along the last axis; trailing remainder drops."""
    if size != stride:
        raise DimensionError("maxpool1d supports size == stride only")
    x = as_tensor(x)
    length = x.values.shape[-1]
    n_win = length // size
    lead = x.values.shape[:-1]
    windows = x.values[..., : n_win * size].reshape(lead + (n_win, size))
    arg = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, arg[..., None], axis=-1)[..., 0]

    def vjp(g):
        gw = np.zeros(lead + (n_win, size))
        np.put_along_axis(gw, arg[..., None], g[..., None], axis=-1)
        gx = np.zeros_like(x.values)
        gx[..., : n_win * size] = gw.reshape(lead + (n_win * size,))
        return (gx,)

    return result(out, (x,), vjp)


def l2_sum(tensors) -> Tensor:
    """Sum of squared entries over a list of tensors, as one scalar node."""
    tensors = tuple(as_tensor(t) for t in tensors)
    total = 0.0
    for t in tensors:
        total += float(np.dot(t.values.reshape(-1), t.values.reshape(-1)))

    def vjp(g):
        return tuple(2.0 * g * t.values for t in tensors)

    return result(np.asarray(total), tensors, vjp)


def mse(pred: Tensor, target) -> Tensor:
    """Mean squared error over every entry of the residual."""
    target = as_tensor(target)
    if target.values.shape != as_tensor(pred).values.shape:
        raise DimensionError(
            f"mse operands disagree: {as_tensor(pred).values.shape} vs {target.values.shape}"
        )
    diff = sub(pred, target)
    return mean_all(mul(diff, diff))
