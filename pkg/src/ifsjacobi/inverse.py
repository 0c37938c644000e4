"""Recovering the fixed-point law sigma from a target Jacobi matrix.

Running the closure recursion backwards: at each step the diagonal formula
is solved for a_n(sigma), whose coefficient (1-delta)*Omega_{0,n}^2 never
vanishes, and the off-diagonal relation for b_{n+1}(sigma)^2. The latter can
turn non-positive, meaning no IFS with this contraction matches the target
beyond that size.

Sizes follow the usual truncation convention: a size-n matrix carries
a_0..a_{n-1} and b_1..b_{n-1}. ``feasible_size`` is the largest n for which
b_1..b_{n-1}(sigma) all came out positive, and ``delta_frontier`` reports,
for each n, the supremum of the deltas that are feasible at size n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from .convolution import _check_delta
from .errors import InvalidTarget, SizeMismatch
from .jacobi import JacobiMatrix, degeneracy_threshold
from .scaling import ScalingState, contraction_gap, diag_step, omega_tilde_step

FRONTIER_TOP = 0.999


@dataclass(frozen=True)
class InverseResult:
    sigma_jacobi: JacobiMatrix
    feasible_size: int
    requested_size: int

    @property
    def terminated_early(self) -> bool:
        return self.feasible_size < self.requested_size


def _target_arrays(J_mu: JacobiMatrix, nbar: int):
    if not isinstance(J_mu, JacobiMatrix):
        raise TypeError("target must be a JacobiMatrix")
    if J_mu.size < nbar:
        raise SizeMismatch(f"target of size {J_mu.size} cannot cover {nbar}")
    if np.any(J_mu.b[1:nbar] <= 0.0):
        raise InvalidTarget("target off-diagonal entries must be positive")
    length = nbar + 3
    a = np.zeros(length)
    b = np.zeros(length)
    a[:nbar] = J_mu.a[:nbar]
    b[:nbar] = J_mu.b[:nbar]
    # b_nbar is never used: the loop stops before forming Omega^nbar
    return a, b


def invert(J_mu: JacobiMatrix, delta: float, nbar: int) -> InverseResult:
    """Jacobi matrix of sigma such that the (delta, sigma) IFS matches ``J_mu``.

    Early termination is reported through ``feasible_size``; it is not an error.
    """
    delta = _check_delta(delta)
    if nbar < 1:
        raise ValueError("truncation size must be positive")
    a_m, b_m = _target_arrays(J_mu, nbar)
    dbar = 1.0 - delta
    length = a_m.size
    a_s = np.zeros(length)
    b_s = np.zeros(length)
    state = ScalingState(nbar)
    scale = float(max(np.max(np.abs(a_m[:nbar])), np.max(b_m[:nbar])))
    thresh = degeneracy_threshold(scale)

    feasible = nbar
    for n in range(nbar):
        w0 = state.omega_0n
        coef = dbar * w0 * w0
        if not coef > 0.0:
            raise InvalidTarget(f"Omega_(0,{n}) underflowed; delta={delta!r} too close to 1")
        rest = diag_step(state, a_m, b_m, a_s, b_s, delta)
        a_s[n] = (a_m[n] - rest) / coef
        if n + 1 == nbar:
            break
        primed = omega_tilde_step(state, a_m, b_m, a_s, b_s, a_m[n], b_m[n], delta)
        num = contraction_gap(delta, n) * b_m[n + 1] ** 2 - primed
        t = num / (dbar * w0)
        b2 = t / (dbar * w0)
        if not b2 > thresh * thresh:
            feasible = n + 1
            break
        b_s[n + 1] = math.sqrt(b2)
        scale = max(scale, abs(a_s[n]), b_s[n + 1])
        thresh = degeneracy_threshold(scale)
        state.set_tilde_entry(0, n + 1, dbar * w0 * b_s[n + 1])
        state.advance(b_m[n + 1])
    sigma = JacobiMatrix(a_s[:feasible], b_s[1:feasible])
    return InverseResult(sigma, feasible, nbar)


@dataclass(frozen=True)
class FeasibilityFrontier:
    entries: Tuple[Tuple[int, float], ...]

    def as_dict(self) -> dict:
        return {int(n): float(d) for n, d in self.entries}

    def __getitem__(self, n: int) -> float:
        return self.as_dict()[n]


def _feasible(J_mu, delta, n) -> bool:
    return invert(J_mu, delta, n).feasible_size == n


def _frontier_one(J_mu: JacobiMatrix, n: int, tol_rel: float) -> float:
    hi = FRONTIER_TOP
    if _feasible(J_mu, hi, n):
        return hi
    lo = hi
    while True:
        lo /= 10.0
        if lo < 1e-300:
            raise InvalidTarget(f"no feasible contraction found at size {n}")
        if _feasible(J_mu, lo, n):
            break
        hi = lo
    # geometric bisection: the frontier spans many decades
    while hi / lo - 1.0 > tol_rel:
        mid = math.sqrt(lo * hi)
        if _feasible(J_mu, mid, n):
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def delta_frontier(J_mu: JacobiMatrix, n_values: Iterable[int], tol_rel: float = 1e-3
                   ) -> FeasibilityFrontier:
    """Estimate delta_n(mu) for every requested truncation size by bisection."""
    if not tol_rel > 0.0:
        raise ValueError("tol_rel must be positive")
    ns: List[int] = sorted(set(int(n) for n in n_values))
    if not ns:
        return FeasibilityFrontier(())
    if ns[0] < 1:
        raise ValueError("truncation sizes must be positive")
    _target_arrays(J_mu, ns[-1])
    return FeasibilityFrontier(tuple((n, _frontier_one(J_mu, n, tol_rel)) for n in ns))


def fibonacci_word(length: int, seed: str = "A") -> str:
    """Prefix of the fixed point of A -> AB, B -> A."""
    word = seed
    while len(word) < length:
        word = "".join("AB" if c == "A" else "A" for c in word)
    return word[:length]


def fibonacci_jacobi(nbar: int, A: float = 0.4, B: float = 0.5) -> JacobiMatrix:
    """Zero diagonal; b_j takes A or B according to letter j-1 of the word."""
    if nbar < 1:
        raise ValueError("size must be positive")
    if not (A > 0 and B > 0):
        raise ValueError("A and B must be positive")
    word = fibonacci_word(max(nbar - 1, 1))
    b = np.array([A if c == "A" else B for c in word[: nbar - 1]])
    return JacobiMatrix(np.zeros(nbar), b)
