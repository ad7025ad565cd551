"""Numerical verification of analytic gradients by central differences."""

from __future__ import annotations

import numpy as np

from .tensor import no_grad


def grad_check(loss_fn, params, step: float = 1e-5, max_entries: int | None = None,
               seed: int = 0) -> float:
    """Worst relative error between analytic and central-difference gradients.

    ``loss_fn`` rebuilds the scalar loss from the current parameter values on
    every call. Relative error uses the guard denominator max(|a|, |n|, 1e-8).
    ``max_entries`` caps the checked entries per parameter tensor (seeded
    subsample); None checks every entry.
    """
    params = list(params)
    if not params:
        return 0.0
    for p in params:
        p.grad = None
    out = loss_fn()
    out.backward()
    analytic = [np.zeros_like(p.values) if p.grad is None else p.grad.copy() for p in params]

    rng = np.random.default_rng(seed)
    worst = 0.0
    with no_grad():
        for p, a in zip(params, analytic):
            n = p.values.size
            if n == 0:
                continue
            if max_entries is None or n <= max_entries:
                indices = range(n)
            else:
                indices = np.sort(rng.choice(n, size=max_entries, replace=False))
            flat = p.values.reshape(-1)
            a_flat = a.reshape(-1)
            for i in indices:
                original = flat[i]
                flat[i] = original + step
                f_plus = float(loss_fn().values)
                flat[i] = original - step
                f_minus = float(loss_fn().values)
                flat[i] = original
                numeric = (f_plus - f_minus) / (2.0 * step)
                err = abs(a_flat[i] - numeric) / max(abs(a_flat[i]), abs(numeric), 1e-8)
                worst = max(worst, err)
    return worst
