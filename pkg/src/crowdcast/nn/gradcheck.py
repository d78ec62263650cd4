"""Central-difference verification of analytic gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor import Parameter, Tensor
from .optim import zero_grads


@dataclass
class GradCheckReport:
    max_rel_error: float
    n_checked: int
    tol: float
    passed: bool
    worst: tuple[str, int, float, float] | None = None  # (param, flat index, analytic, numeric)

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        line = f"gradcheck {status}: max rel error {self.max_rel_error:.3e} over {self.n_checked} coords (tol {self.tol:g})"
        if self.worst is not None:
            name, idx, a, n = self.worst
            line += f"; worst {name}[{idx}] analytic={a:.6e} numeric={n:.6e}"
        return line


def finite_diff_check(loss_fn, params, h: float = 1e-5, tol: float = 1e-4,
                      n_samples: int = 100, rng=None, scale_floor: float = 1e-3) -> GradCheckReport:
    """Compare analytic gradients of ``loss_fn()`` against central differences.

    Samples at least ``n_samples`` parameter coordinates (all of them when
    there are fewer).  The relative error of a coordinate uses
    max(|analytic|, |numeric|, scale_floor) as denominator so near-zero
    gradients are compared on an absolute scale.
    """
    params = [p for p in params if isinstance(p, Parameter)]
    if not params:
        raise ValueError("no parameters to check")
    rng = rng if rng is not None else np.random.default_rng(0)

    zero_grads(params)
    loss = loss_fn()
    if not isinstance(loss, Tensor) or loss.data.size != 1:
        raise ValueError("loss_fn must return a scalar Tensor")
    if not np.isfinite(loss.data).all():
        raise ValueError("loss_fn returned a non-finite value")
    loss.backward()
    analytic = [p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params]
    zero_grads(params)

    coords = [(i, j) for i, p in enumerate(params) for j in range(p.data.size)]
    if len(coords) > n_samples:
        picks = rng.choice(len(coords), size=n_samples, replace=False)
        coords = [coords[k] for k in picks]

    max_err, worst = 0.0, None
    for i, j in coords:
        p = params[i]
        flat = p.data.reshape(-1)
        orig = flat[j]
        flat[j] = orig + h
        f_plus = float(loss_fn().data)
        flat[j] = orig - h
        f_minus = float(loss_fn().data)
        flat[j] = orig
        if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
            raise ValueError("loss_fn returned a non-finite value during perturbation")
        numeric = (f_plus - f_minus) / (2.0 * h)
        a = float(analytic[i].reshape(-1)[j])
        err = abs(a - numeric) / max(abs(a), abs(numeric), scale_floor)
        if err > max_err:
            max_err, worst = err, (p.name or f"param{i}", j, a, numeric)
    return GradCheckReport(max_err, len(coords), tol, max_err <= tol, worst)
