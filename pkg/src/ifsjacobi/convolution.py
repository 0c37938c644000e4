"""IFS convolution of two Jacobi matrices and its fixed-point iteration."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import NoConvergence
from .jacobi import JacobiMatrix, frobenius_distance, jacobi_lebesgue
from .scaling import (
    ScalingState,
    diag_step,
    matrix_scale,
    offdiag_step_convolution,
    omega_tilde_step,
    recurrence_arrays,
    require_positive,
)

log = logging.getLogger(__name__)


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta!r}")
    return delta


def convolve(sigma, eta, delta: float, nbar: int, *, check_normalization: bool = False,
             use_caps: bool = True) -> JacobiMatrix:
    """Jacobi matrix (size ``nbar``) of the IFS convolution of ``sigma`` and ``eta``.

    ``sigma`` and ``eta`` are JacobiMatrix objects of size >= nbar or
    DiscreteMeasure objects; for the latter the scaling matrices are
    truncated at the atom count.
    """
    delta = _check_delta(delta)
    if nbar < 1:
        raise ValueError("truncation size must be positive")
    length = nbar + 3
    a_s, b_s, cap_s = recurrence_arrays(sigma, nbar, length, use_caps)
    a_e, b_e, cap_e = recurrence_arrays(eta, nbar, length, use_caps)
    state = ScalingState(nbar, row_cap=cap_e, column_cap=cap_s)
    scale = max(matrix_scale(sigma), matrix_scale(eta))

    a = np.zeros(nbar)
    b = np.zeros(nbar)
    for n in range(nbar):
        a[n] = diag_step(state, a_e, b_e, a_s, b_s, delta)
        if n + 1 == nbar:
            break
        primed = omega_tilde_step(state, a_e, b_e, a_s, b_s, a[n], b[n], delta)
        bn = offdiag_step_convolution(
            primed, b_e[n + 1], b_s[n + 1], state.omega_n0, state.omega_0n, delta
        )
        require_positive(bn, scale, n, "convolve")
        b[n + 1] = bn
        state.advance(bn, check=check_normalization)
    return JacobiMatrix(a, b[1:])


@dataclass(frozen=True)
class FixpointConfig:
    """Stopping rule for the fixed-point iteration.

    ``tolerance`` bounds the Frobenius distance between successive iterates;
    when left as None it becomes 1e-13 * sqrt(nbar).
    """

    tolerance: Optional[float] = None
    max_iterations: int = 200
    record_trajectory: bool = False
    strict: bool = True

    def __post_init__(self):
        if self.tolerance is not None and not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    def resolved_tolerance(self, nbar: int) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return 1e-13 * math.sqrt(nbar)


@dataclass
class FixpointReport:
    iterations_run: int = 0
    distances: List[float] = field(default_factory=list)
    converged: bool = False
    tolerance: float = 0.0
    trajectory: Optional[List[JacobiMatrix]] = None

    def to_dict(self) -> dict:
        return {
            "iterations_run": self.iterations_run,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "distances": list(self.distances),
        }


def iterate_to_fixpoint(step: Callable[[JacobiMatrix], JacobiMatrix], J_init: JacobiMatrix,
                        nbar: int, cfg: FixpointConfig, label: str = "fixpoint"):
    """Run J_m = step(J_{m-1}) until the Frobenius step size drops below tolerance."""
    tol = cfg.resolved_tolerance(nbar)
    report = FixpointReport(tolerance=tol)
    if cfg.record_trajectory:
        report.trajectory = []
    J_prev = J_init.truncate(nbar)
    for m in range(1, cfg.max_iterations + 1):
        J = step(J_prev)
        d = frobenius_distance(J, J_prev)
        report.iterations_run = m
        report.distances.append(d)
        if report.trajectory is not None:
            report.trajectory.append(J)
        log.debug("%s iteration %d: distance %.3e", label, m, d)
        J_prev = J
        if d <= tol:
            report.converged = True
            return J, report
    if cfg.strict:
        raise NoConvergence(
            f"{label}: distance {report.distances[-1]:.3e} > {tol:.3e} "
            f"after {cfg.max_iterations} iterations",
            jacobi=J_prev,
            report=report,
        )
    return J_prev, report


def fixpoint(sigma, delta: float, nbar: int, J_init: Optional[JacobiMatrix] = None,
             cfg: Optional[FixpointConfig] = None):
    """Invariant-measure Jacobi matrix by iterating the IFS convolution.

    Starts from the Legendre matrix unless ``J_init`` is given. Returns
    ``(J, report)``; raises NoConvergence (carrying both) when the cap is hit
    and ``cfg.strict`` is set.
    """
    delta = _check_delta(delta)
    cfg = cfg or FixpointConfig()
    if J_init is None:
        J_init = jacobi_lebesgue(nbar)
    return iterate_to_fixpoint(
        lambda J: convolve(sigma, J, delta, nbar), J_init, nbar, cfg, "fixpoint"
    )
