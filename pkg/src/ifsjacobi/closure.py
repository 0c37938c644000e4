"""Single-pass Jacobi matrix of an IFS invariant measure."""

from __future__ import annotations

import numpy as np

from .convolution import _check_delta
from .jacobi import DiscreteMeasure, JacobiMatrix
from .scaling import (
    ScalingState,
    diag_step,
    matrix_scale,
    offdiag_step_closure,
    omega_tilde_step,
    recurrence_arrays,
    require_positive,
)


def closure(sigma, delta: float, nbar: int, *, check_normalization: bool = False,
            use_column_cap: bool = True) -> JacobiMatrix:
    """Jacobi matrix (size ``nbar``) of the invariant measure of the (delta, sigma) IFS.

    The convolution recurrences are run with eta = etabar = mu. Two terms
    then involve unknowns: a_n(mu) appears on both sides of the diagonal
    formula with weight delta*Omega_{n,0}^2 < 1, and b_{n+1}(mu) enters the
    extremal entry Omega~_{n+1,0}; both are solved for explicitly.

    ``sigma`` may be a JacobiMatrix (size >= nbar) or a DiscreteMeasure.
    """
    delta = _check_delta(delta)
    if nbar < 1:
        raise ValueError("truncation size must be positive")
    length = nbar + 3
    a_s, b_s, cap = recurrence_arrays(sigma, nbar, length, use_column_cap)
    state = ScalingState(nbar, column_cap=cap)
    scale = matrix_scale(sigma)

    # mu plays eta and etabar at once; unknown entries stay zero until solved
    a = np.zeros(length)
    b = np.zeros(length)
    for n in range(nbar):
        w = state.omega_n0
        rest = diag_step(state, a, b, a_s, b_s, delta)
        a[n] = rest / (1.0 - delta * w * w)
        if n + 1 == nbar:
            break
        primed = omega_tilde_step(state, a, b, a_s, b_s, a[n], b[n], delta)
        bn = offdiag_step_closure(primed, b_s[n + 1], state.omega_0n, delta, n)
        require_positive(bn, scale, n, "closure")
        b[n + 1] = bn
        state.set_tilde_entry(n + 1, 0, delta * w * bn)
        state.advance(bn, check=check_normalization)
    return JacobiMatrix(a[:nbar], b[1:nbar])


def closure_atoms(sigma: DiscreteMeasure, delta: float, nbar: int, *,
                  use_column_cap: bool = True, check_normalization: bool = False) -> JacobiMatrix:
    """``closure`` for a finite sigma given by its atoms.

    The recurrence of sigma is built by Lanczos and padded with b_j = 0 for
    j >= M; with ``use_column_cap`` the scaling matrices keep only M columns,
    giving O(M nbar^2) work and O(M nbar) storage.
    """
    if not isinstance(sigma, DiscreteMeasure):
        raise TypeError("closure_atoms expects a DiscreteMeasure")
    return closure(sigma, delta, nbar, check_normalization=check_normalization,
                   use_column_cap=use_column_cap)
