"""IFS convolution through Gaussian rules and discrete reconstruction.

The n-point Gauss rules of eta and sigma combine into an n^2-atom measure
that integrates every polynomial of degree <= 2n-1 against the convolution
exactly, so Lanczos on that measure recovers the n x n Jacobi truncation.
Accuracy degrades once the n^2 atoms crowd onto a fractal set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .convolution import FixpointConfig, _check_delta, iterate_to_fixpoint
from .errors import EigenFailure, SizeMismatch
from .jacobi import DiscreteMeasure, JacobiMatrix, _trusted_measure, jacobi_from_discrete, jacobi_lebesgue


@dataclass(frozen=True)
class GaussRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return self.nodes.size

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def as_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure.normalized(self.nodes, self.weights)


def gauss_rule(J: JacobiMatrix, n: int) -> GaussRule:
    """Golub-Welsch: eigenvalues of the n x n truncation and squared first
    eigenvector components."""
    if not 1 <= n <= J.size:
        raise SizeMismatch(f"rule of order {n} needs a Jacobi matrix of size >= {n}")
    if n == 1:
        return GaussRule(np.array([J.a[0]]), np.array([1.0]))
    try:
        x, V = eigh_tridiagonal(J.a[:n], J.b[1:n])
    except LinAlgError as exc:
        raise EigenFailure(f"tridiagonal eigensolver failed: {exc}") from exc
    w = V[0] ** 2
    order = np.argsort(x, kind="stable")
    return GaussRule(x[order], w[order])


def _rule_for(measure, n: int) -> GaussRule:
    # an atomic measure integrates every polynomial exactly against itself
    if isinstance(measure, DiscreteMeasure):
        m = measure.merged()
        return GaussRule(m.nodes, m.weights)
    return gauss_rule(measure, n)


def product_rule(rule_eta: GaussRule, rule_sigma: GaussRule, delta: float) -> DiscreteMeasure:
    """Atoms delta*x_j(eta) + (1-delta)*x_k(sigma) with weights w_j(eta) w_k(sigma),
    in row-major (j, k) order, coincident nodes merged."""
    dbar = 1.0 - delta
    nodes = (delta * rule_eta.nodes[:, None] + dbar * rule_sigma.nodes[None, :]).ravel()
    weights = (rule_eta.weights[:, None] * rule_sigma.weights[None, :]).ravel()
    weights = weights / weights.sum()
    return _trusted_measure(nodes, weights).merged()


def convolve_spectral(sigma, eta, delta: float, nbar: int) -> JacobiMatrix:
    """Same map as ``convolve`` computed through quadrature and Lanczos."""
    delta = _check_delta(delta)
    m = product_rule(_rule_for(eta, nbar), _rule_for(sigma, nbar), delta)
    return jacobi_from_discrete(m, nbar)


def fixpoint_spectral(sigma, delta: float, nbar: int, J_init: Optional[JacobiMatrix] = None,
                      cfg: Optional[FixpointConfig] = None):
    delta = _check_delta(delta)
    cfg = cfg or FixpointConfig()
    if J_init is None:
        J_init = jacobi_lebesgue(nbar)
    return iterate_to_fixpoint(
        lambda J: convolve_spectral(sigma, J, delta, nbar), J_init, nbar, cfg,
        "fixpoint_spectral",
    )
