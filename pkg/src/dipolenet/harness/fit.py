"""Least-squares fits of mean active-link counts to ``C1 + a * n**b``."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import least_squares

from dipolenet.errors import FitError

START_EXPONENTS = (0.1, 0.25, 0.4)
MIN_POINTS = 4


@dataclass(frozen=True)
class ScalingFit:
    c1: float
    exponent: float
    amplitude: float
    residual_rms: float
    n_range: tuple
    fixed_exponent: float | None = None
    fixed_amplitude: float | None = None
    n_points: int = 0

    def predict(self, n):
        return self.c1 + self.amplitude * np.asarray(n, dtype=float) ** self.exponent

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_range"] = list(self.n_range)
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ScalingFit":
        doc = dict(doc)
        doc["n_range"] = tuple(doc["n_range"])
        return cls(**doc)


def mean_counts(records) -> tuple[np.ndarray, np.ndarray]:
    """Per-``n`` mean of ``eta_n``, sorted by ``n``."""
    groups = defaultdict(list)
    for r in records:
        groups[float(r.n)].append(r.eta_n)
    ns = np.array(sorted(groups))
    return ns, np.array([np.mean(groups[n]) for n in ns])


def _linear(ns, ys, b, amplitude=None):
    x = ns ** b
    if amplitude is not None:
        return float(np.mean(ys - amplitude * x)), float(amplitude)
    design = np.column_stack((np.ones_like(x), x))
    (c, a), *_ = np.linalg.lstsq(design, ys, rcond=None)
    return float(c), float(a)


def _rms(ns, ys, c, a, b):
    return float(np.sqrt(np.mean((c + a * ns ** b - ys) ** 2)))


def fit_curve(ns, ys, fix_exponent: float | None = None,
              fix_amplitude: float | None = None) -> ScalingFit:
    """Fit ``ys ~ C1 + a * ns**b``.

    With ``fix_exponent`` the problem is linear in ``(C1, a)`` (or in ``C1``
    alone when ``fix_amplitude`` is also given). Otherwise ``b`` is found by
    nonlinear least squares started from each of ``START_EXPONENTS``, keeping
    the lowest residual.
    """
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(np.unique(ns)) < MIN_POINTS:
        raise FitError(f"need at least {MIN_POINTS} distinct n values, got {len(np.unique(ns))}")
    if np.ptp(ys) == 0:
        raise FitError("counts are constant in n; the exponent is not identifiable")
    span = (float(ns.min()), float(ns.max()))

    if fix_exponent is not None:
        c, a = _linear(ns, ys, fix_exponent, fix_amplitude)
        return ScalingFit(c, float(fix_exponent), a, _rms(ns, ys, c, a, fix_exponent), span,
                          float(fix_exponent), fix_amplitude, len(ns))

    # work in n / n_max so the amplitude stays well scaled
    scale = ns.max()
    u = ns / scale
    best = None
    for b0 in START_EXPONENTS:
        c0, a0 = _linear(u, ys, b0, fix_amplitude)
        if fix_amplitude is None:
            x0 = [c0, a0, b0]
            fun = lambda v: v[0] + v[1] * u ** v[2] - ys
        else:
            x0 = [c0, b0]
            fun = lambda v: v[0] + fix_amplitude * scale ** v[1] * u ** v[1] - ys
        try:
            sol = least_squares(fun, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
        except (ValueError, FloatingPointError):
            continue
        if not np.all(np.isfinite(sol.x)):
            continue
        if fix_amplitude is None:
            c, a_scaled, b = sol.x
            a = a_scaled * scale ** -b
        else:
            (c, b), a = sol.x, fix_amplitude
        rms = _rms(ns, ys, c, a, b)
        if math.isfinite(rms) and (best is None or rms < best[0]):
            best = (rms, c, a, b)
    if best is None:
        raise FitError("nonlinear fit failed from every starting exponent")
    rms, c, a, b = best
    return ScalingFit(float(c), float(b), float(a), rms, span, None, fix_amplitude, len(ns))


def fit_scaling(records, fix_exponent: float | None = None,
                fix_amplitude: float | None = None) -> ScalingFit:
    """Fit the per-``n`` mean of ``eta_n`` over a list of experiment records."""
    ns, ys = mean_counts(records)
    return fit_curve(ns, ys, fix_exponent, fix_amplitude)
