"""Diagnostics read off a computed Jacobi matrix.

Indicators only: summable deviations from constant limits point to absolute
continuity, and the running mean of -log b_j estimates the capacity exponent
C with h_n ~ exp(n C). Nothing here classifies a measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyWindow, SizeMismatch
from .jacobi import JacobiMatrix


def default_window(size: int) -> Tuple[int, int]:
    return max(1, size // 10), size


def powerlaw_fit(values: Sequence[float], window: Optional[Tuple[int, int]] = None):
    """Least-squares fit of log values[n] = log C + gamma log n over n in [lo, hi).

    Returns ``(gamma, C, rms_residual)``; ``n = 0`` is skipped.
    """
    v = np.asarray(values, dtype=float)
    lo, hi = window if window is not None else default_window(v.size)
    lo = max(int(lo), 1)
    hi = min(int(hi), v.size)
    if hi - lo < 2:
        raise EmptyWindow(f"window [{lo}, {hi}) holds fewer than two points")
    y = v[lo:hi]
    if np.any(~(y > 0.0)):
        raise ValueError("values must be positive on the fit window")
    ln = np.log(np.arange(lo, hi, dtype=float))
    ly = np.log(y)
    A = np.column_stack([ln, np.ones_like(ln)])
    (gamma, logc), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (gamma * ln + logc)
    return float(gamma), float(math.exp(logc)), float(np.sqrt(np.mean(resid**2)))


def _tail_mean(x: np.ndarray) -> float:
    k = max(1, x.size // 10)
    return float(np.mean(x[-k:]))


@dataclass
class NevaiReport:
    a_inf: float
    b_inf: float
    limits_estimated: bool
    n: np.ndarray
    a_deviations: np.ndarray
    b_deviations: np.ndarray
    deviations: np.ndarray
    partial_sums: np.ndarray
    fit_window: Tuple[int, int]
    fitted_exponent: float
    fit_prefactor: float
    fit_residual: float

    def to_dict(self) -> dict:
        return {
            "a_inf": self.a_inf,
            "b_inf": self.b_inf,
            "limits_estimated": self.limits_estimated,
            "fit_window": list(self.fit_window),
            "fitted_exponent": self.fitted_exponent,
            "fit_prefactor": self.fit_prefactor,
            "fit_residual": self.fit_residual,
            "final_partial_sum": float(self.partial_sums[-1]),
        }


def nevai_report(J: JacobiMatrix, a_inf: Optional[float] = None, b_inf: Optional[float] = None,
                 window: Optional[Tuple[int, int]] = None) -> NevaiReport:
    """Deviations |a_n - a_inf| + |b_n - b_inf| for n >= 1 and their partial sums.

    Missing limits are estimated from the mean of the last 10% of entries and
    flagged as such. The exponent is fitted to the deviations (indexed by n);
    it is NaN when some deviation in the window is exactly zero.
    """
    if J.size < 2:
        raise SizeMismatch("need a Jacobi matrix of size >= 2")
    estimated = a_inf is None or b_inf is None
    if a_inf is None:
        a_inf = _tail_mean(J.a[1:])
    if b_inf is None:
        b_inf = _tail_mean(J.b[1:])
    da = np.abs(J.a - a_inf)
    db = np.abs(J.b - b_inf)
    dev = da + db
    n = np.arange(1, J.size)
    sums = np.cumsum(dev[1:])
    win = window if window is not None else default_window(J.size)
    try:
        gamma, pref, res = powerlaw_fit(dev, win)
    except ValueError:
        gamma, pref, res = float("nan"), float("nan"), float("nan")
    return NevaiReport(
        a_inf=float(a_inf),
        b_inf=float(b_inf),
        limits_estimated=estimated,
        n=n,
        a_deviations=da[1:],
        b_deviations=db[1:],
        deviations=dev[1:],
        partial_sums=sums,
        fit_window=(int(win[0]), int(win[1])),
        fitted_exponent=gamma,
        fit_prefactor=pref,
        fit_residual=res,
    )


@dataclass
class CapacityReport:
    n: np.ndarray
    estimates: np.ndarray
    final: float
    sigma_estimate: Optional[float] = None
    bounds: Optional[Tuple[float, float]] = field(default=None)

    def to_dict(self) -> dict:
        d = {"final": self.final}
        if self.bounds is not None:
            d["sigma_estimate"] = self.sigma_estimate
            d["bounds"] = list(self.bounds)
        return d


def _running_capacity(J: JacobiMatrix) -> np.ndarray:
    logs = np.log(J.b[1:])
    n = np.arange(1, J.size)
    return -np.cumsum(logs) / n


def capacity_report(J: JacobiMatrix, sigma_info: Optional[Tuple[JacobiMatrix, float]] = None
                    ) -> CapacityReport:
    """Running estimates c_n = -(1/n) sum_{j<=n} log b_j; no extrapolation.

    With ``sigma_info = (J_sigma, delta)`` the bracket
    [C_sigma, C_sigma + log(1/(1-delta))] is added, C_sigma estimated the same way.
    """
    if J.size < 2:
        raise SizeMismatch("need a Jacobi matrix of size >= 2")
    est = _running_capacity(J)
    rep = CapacityReport(n=np.arange(1, J.size), estimates=est, final=float(est[-1]))
    if sigma_info is not None:
        J_sigma, delta = sigma_info
        if J_sigma.size < 2:
            raise SizeMismatch("sigma Jacobi matrix must have size >= 2")
        cs = float(_running_capacity(J_sigma)[-1])
        rep.sigma_estimate = cs
        rep.bounds = (cs, cs + math.log(1.0 / (1.0 - delta)))
    return rep


def difference_series(J: JacobiMatrix, reference: JacobiMatrix):
    """Absolute entrywise differences (|a_n - a'_n|, |b_n - b'_n|) over the common size."""
    n = min(J.size, reference.size)
    return np.abs(J.a[:n] - reference.a[:n]), np.abs(J.b[:n] - reference.b[:n])
