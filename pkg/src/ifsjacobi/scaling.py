"""Scaling matrices and the one-step recurrences that advance them.

Omega^n expands p_n(etabar; delta*s + (1-delta)*beta) in the tensor basis
p_k(eta; s) p_r(sigma; beta). Entry (k, r) is nonzero only for k, r >= 0 and
k + r <= n; the row index k belongs to eta, the column index r to sigma.

Only Omega^n and Omega^{n-1} are kept. Both live in dense buffers padded
with one ring of zeros, so the kernels read neighbours without bounds
checks: entry (k, r) sits at ``buf[k + 1, r + 1]``. The kernels also track
the last row and column holding a nonzero, and later steps only sweep up to
one past those extents. Coefficient arrays handed to the kernels must be
zero-padded to length ``ScalingState.coeff_length``.

In this module ``a_eta, b_eta`` and ``a_sig, b_sig`` are raw recurrence
arrays (``b[j]`` is b_j, ``b[0] == 0``). Entries that are still unknown
when a kernel runs must be zero; the closure and inverse drivers rely on
that to isolate the unknown term.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from numba import njit

from .errors import DegenerateStep, IndexOutOfRange, NormalizationError, SizeMismatch
from .jacobi import DiscreteMeasure, JacobiMatrix, degeneracy_threshold, jacobi_from_discrete

NORMALIZATION_TOL = 1e-10
# Entries this small are flushed to zero: they cannot influence sums of
# unit-normalized terms, and subnormal arithmetic is very slow.
FLUSH = 1e-290


@njit(cache=True)
def _diag_kernel(W, n, klim, rlim, a_eta, b_eta, a_sig, b_sig, delta, dbar):
    s = 0.0
    for k in range(min(n, klim) + 1):
        rtop = min(n - k, rlim)
        for r in range(rtop + 1):
            w = W[k + 1, r + 1]
            s += w * (
                delta * (a_eta[k] * w + 2.0 * b_eta[k] * W[k, r + 1])
                + dbar * (a_sig[r] * w + 2.0 * b_sig[r] * W[k + 1, r])
            )
    return s


@njit(cache=True)
def _tilde_kernel(P, W, n, klim, rlim, a_eta, b_eta, a_sig, b_sig, delta, dbar, an, bn):
    # Overwrites P (holding Omega^{n-1}) with the unnormalized Omega~^{n+1}.
    # Returns the sum of squares over all entries except (n+1, 0) and
    # (0, n+1), plus the row/column extents of the result.
    ss = 0.0
    kext = -1
    rext = -1
    for j in range(min(n + 1, klim) + 1):
        ltop = min(n + 1 - j, rlim)
        for l in range(ltop + 1):
            w = W[j + 1, l + 1]
            v = (
                delta * (a_eta[j] * w + b_eta[j + 1] * W[j + 2, l + 1] + b_eta[j] * W[j, l + 1])
                + dbar * (a_sig[l] * w + b_sig[l + 1] * W[j + 1, l + 2] + b_sig[l] * W[j + 1, l])
                - an * w
                - bn * P[j + 1, l + 1]
            )
            if abs(v) < FLUSH:
                v = 0.0
            P[j + 1, l + 1] = v
            if v != 0.0:
                if j > kext:
                    kext = j
                if l > rext:
                    rext = l
                if not ((j == n + 1 and l == 0) or (j == 0 and l == n + 1)):
                    ss += v * v
    return ss, kext, rext


@njit(cache=True)
def _scale_kernel(P, klim, rlim, factor):
    for j in range(klim + 1):
        for l in range(rlim + 1):
            P[j + 1, l + 1] *= factor


class ScalingMatrix:
    """Read-only snapshot of a triangular scaling matrix of a given order."""

    def __init__(self, order: int, entries: np.ndarray):
        self.order = order
        e = np.array(entries, dtype=float)
        k, r = np.indices(e.shape)
        e[k + r > order] = 0.0
        e.setflags(write=False)
        self.entries = e

    def __getitem__(self, kr) -> float:
        k, r = kr
        if k < 0 or r < 0 or k + r > self.order:
            return 0.0
        if k >= self.entries.shape[0] or r >= self.entries.shape[1]:
            return 0.0
        return float(self.entries[k, r])

    def frobenius_squared(self) -> float:
        return float(np.sum(self.entries**2))

    def dump(self) -> str:
        """Text dump: header ``omega v1 <n>`` then one row per k (r = 0..n-k)."""
        rows = [f"omega v1 {self.order}"]
        for k in range(self.order + 1):
            rows.append(" ".join(format(self[k, r], ".17g") for r in range(self.order - k + 1)))
        return "\n".join(rows) + "\n"


class ScalingState:
    """Rolling pair (Omega^{n-1}, Omega^n) plus the spare slot for Omega~^{n+1}.

    ``row_cap`` / ``column_cap`` bound the eta / sigma index when that measure
    has finitely many atoms (b_M = 0 makes every entry with index >= M vanish).
    """

    def __init__(self, nbar: int, row_cap: Optional[int] = None, column_cap: Optional[int] = None):
        if nbar < 1:
            raise ValueError("truncation size must be positive")
        self.nbar = nbar
        self.row_cap = row_cap
        self.column_cap = column_cap
        self.rows = min(nbar, row_cap) if row_cap else nbar
        self.cols = min(nbar, column_cap) if column_cap else nbar
        self.coeff_length = max(self.rows, self.cols, nbar) + 3
        shape = (self.rows + 2, self.cols + 2)
        self._curr = np.zeros(shape)
        self._prev = np.zeros(shape)
        self._curr[1, 1] = 1.0
        self.order = 0
        self._ext_curr = (0, 0)
        self._ext_prev = (-1, -1)
        self._tilde_ready = False
        self._ext_tilde = (-1, -1)

    # -- accessors ---------------------------------------------------------
    def _entry(self, buf, k, r):
        if 0 <= k < self.rows and 0 <= r < self.cols:
            return float(buf[k + 1, r + 1])
        return 0.0

    def omega(self, k: int, r: int) -> float:
        """Entry (k, r) of the current Omega^n; zero outside the triangle."""
        if k < 0 or r < 0 or k + r > self.order:
            return 0.0
        return self._entry(self._curr, k, r)

    @property
    def omega_n0(self) -> float:
        return self.omega(self.order, 0)

    @property
    def omega_0n(self) -> float:
        return self.omega(0, self.order)

    @property
    def omega_curr(self) -> ScalingMatrix:
        return ScalingMatrix(self.order, self._curr[1 : self.rows + 1, 1 : self.cols + 1])

    @property
    def omega_prev(self) -> Optional[ScalingMatrix]:
        if self.order == 0:
            return None
        return ScalingMatrix(self.order - 1, self._prev[1 : self.rows + 1, 1 : self.cols + 1])

    def tilde(self) -> ScalingMatrix:
        if not self._tilde_ready:
            raise RuntimeError("no Omega~ computed for this step")
        return ScalingMatrix(self.order + 1, self._prev[1 : self.rows + 1, 1 : self.cols + 1])

    def _limits(self):
        kc, rc = self._ext_curr
        kp, rp = self._ext_prev
        klim = min(max(kc, kp) + 1, self.rows - 1)
        rlim = min(max(rc, rp) + 1, self.cols - 1)
        return klim, rlim

    def _check_coeffs(self, *arrays):
        for arr in arrays:
            if arr.shape[0] < self.coeff_length:
                raise IndexOutOfRange(
                    f"coefficient array of length {arr.shape[0]} < {self.coeff_length}"
                )

    # -- kernels -----------------------------------------------------------
    def diag_sum(self, a_eta, b_eta, a_sig, b_sig, delta: float) -> float:
        self._check_coeffs(a_eta, b_eta, a_sig, b_sig)
        kc, rc = self._ext_curr
        return float(
            _diag_kernel(self._curr, self.order, kc, rc, a_eta, b_eta, a_sig, b_sig,
                         delta, 1.0 - delta)
        )

    def compute_tilde(self, a_eta, b_eta, a_sig, b_sig, a_n: float, b_n: float,
                      delta: float) -> float:
        """Fill Omega~^{n+1}; returns the primed sum of squares."""
        if self.order + 1 >= self.nbar:
            raise IndexOutOfRange(f"Omega^{self.order + 1} exceeds truncation {self.nbar}")
        self._check_coeffs(a_eta, b_eta, a_sig, b_sig)
        klim, rlim = self._limits()
        ss, kext, rext = _tilde_kernel(
            self._prev, self._curr, self.order, klim, rlim,
            a_eta, b_eta, a_sig, b_sig, delta, 1.0 - delta, a_n, b_n,
        )
        self._ext_tilde = (int(kext), int(rext))
        self._tilde_ready = True
        return float(ss)

    def set_tilde_entry(self, k: int, r: int, value: float) -> None:
        """Overwrite an entry of Omega~^{n+1} (used for the extremal entries)."""
        if not self._tilde_ready:
            raise RuntimeError("no Omega~ computed for this step")
        if not (0 <= k < self.rows and 0 <= r < self.cols):
            if value != 0.0:
                raise IndexOutOfRange(f"entry ({k}, {r}) is outside the capped buffer")
            return
        self._prev[k + 1, r + 1] = value
        if value != 0.0:
            ke, re = self._ext_tilde
            self._ext_tilde = (max(ke, k), max(re, r))

    def advance(self, b_next: float, check: bool = False) -> None:
        """Divide Omega~^{n+1} by b_{n+1}(etabar) and make it the current matrix."""
        if not self._tilde_ready:
            raise RuntimeError("no Omega~ computed for this step")
        ke, re_ = self._ext_tilde
        if ke >= 0:
            _scale_kernel(self._prev, ke, re_, 1.0 / b_next)
        self._prev, self._curr = self._curr, self._prev
        self._ext_prev = self._ext_curr
        self._ext_curr = self._ext_tilde
        self._tilde_ready = False
        self.order += 1
        if check:
            self.check_normalization()

    def normalization_defect(self) -> float:
        ke, re_ = self._ext_curr
        block = self._curr[1 : ke + 2, 1 : re_ + 2]
        return abs(float(np.sum(block * block)) - 1.0)

    def check_normalization(self, tol: float = NORMALIZATION_TOL) -> None:
        d = self.normalization_defect()
        if not d <= tol:
            raise NormalizationError(
                f"sum of squares of Omega^{self.order} deviates from 1 by {d:.3e}",
                step=self.order,
            )


# -- one-step operations ----------------------------------------------------

def diag_step(state: ScalingState, a_eta, b_eta, a_sig, b_sig, delta: float) -> float:
    """a_n(etabar) as the quadratic form of Omega^n against both recurrences."""
    return state.diag_sum(a_eta, b_eta, a_sig, b_sig, delta)


def omega_tilde_step(state: ScalingState, a_eta, b_eta, a_sig, b_sig,
                     a_n: float, b_n: float, delta: float) -> float:
    """Compute Omega~^{n+1} inside ``state``; returns its primed sum of squares.

    The two extremal entries come out as delta*Omega_{n,0}*b_eta[n+1] and
    (1-delta)*Omega_{0,n}*b_sig[n+1]; use ``state.tilde()`` for a snapshot.
    """
    return state.compute_tilde(a_eta, b_eta, a_sig, b_sig, a_n, b_n, delta)


def offdiag_step_convolution(primed_sum: float, b_eta_next: float, b_sigma_next: float,
                             omega_n0: float, omega_0n: float, delta: float) -> float:
    dbar = 1.0 - delta
    b2 = (
        (delta * b_eta_next * omega_n0) ** 2
        + (dbar * b_sigma_next * omega_0n) ** 2
        + primed_sum
    )
    return math.sqrt(b2) if b2 > 0.0 else 0.0


def contraction_gap(delta: float, n: int) -> float:
    """1 - delta^(2(n+1)), computed without cancellation for delta near 1."""
    if delta == 0.0:
        return 1.0
    return -math.expm1(2.0 * (n + 1) * math.log(delta))


def offdiag_step_closure(primed_sum: float, b_sigma_next: float, omega_0n: float,
                         delta: float, n: int) -> float:
    dbar = 1.0 - delta
    num = (dbar * b_sigma_next * omega_0n) ** 2 + primed_sum
    b2 = num / contraction_gap(delta, n)
    return math.sqrt(b2) if b2 > 0.0 else 0.0


def require_positive(b: float, scale: float, n: int, routine: str) -> None:
    if not b > degeneracy_threshold(scale):
        raise DegenerateStep(
            f"{routine}: b_{n + 1} = {b:.3e} vanished at step n={n}",
            step=n,
            routine=routine,
        )


def recurrence_arrays(measure, nbar: int, length: int, use_cap: bool = True):
    """Zero-padded (a, b, cap) for a JacobiMatrix or a DiscreteMeasure.

    An M-atom measure with M < nbar yields b_j = 0 for j >= M and cap = M.
    """
    a = np.zeros(length)
    b = np.zeros(length)
    cap = None
    if isinstance(measure, DiscreteMeasure):
        m = measure.merged()
        J = jacobi_from_discrete(m, min(m.count, nbar))
        if m.count < nbar and use_cap:
            cap = m.count
    elif isinstance(measure, JacobiMatrix):
        if measure.size < nbar:
            raise SizeMismatch(f"need a Jacobi matrix of size >= {nbar}, got {measure.size}")
        J = measure
    else:
        raise TypeError(f"expected JacobiMatrix or DiscreteMeasure, got {type(measure).__name__}")
    k = min(J.size, nbar)
    a[:k] = J.a[:k]
    b[:k] = J.b[:k]
    return a, b, cap


def matrix_scale(measure) -> float:
    if isinstance(measure, DiscreteMeasure):
        return float(np.max(np.abs(measure.nodes)))
    return float(max(np.max(np.abs(measure.a)), np.max(measure.b)))
