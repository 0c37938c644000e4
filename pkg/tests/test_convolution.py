import math

import numpy as np
import pytest

from ifsjacobi import (
    DegenerateStep,
    DiscreteMeasure,
    FixpointConfig,
    NoConvergence,
    closure,
    convolve,
    fixpoint,
    frobenius_distance,
    jacobi_lebesgue,
)

TWO = DiscreteMeasure([-1.0, 1.0], [0.5, 0.5])


def test_delta_zero_returns_sigma():
    L = jacobi_lebesgue(30)
    eta = closure(TWO, 0.3, 30)
    J = convolve(L, eta, 0.0, 30)
    assert frobenius_distance(J, L) < 1e-13


def test_two_atoms_half():
    J = convolve(TWO, TWO, 0.5, 2)
    assert J.a[0] == 0.0
    assert J.b[1] == pytest.approx(math.sqrt(0.5), abs=1e-16)


def test_exchange_symmetry():
    L = jacobi_lebesgue(200)
    C = closure(TWO, 0.3, 200)
    for d in (0.2, 0.5, 0.65):
        A = convolve(L, C, d, 200)
        B = convolve(C, L, 1 - d, 200)
        assert frobenius_distance(A, B) <= 1e-12


def test_prefix_stability_bit_exact():
    L = jacobi_lebesgue(150)
    C = closure(TWO, 0.3, 150)
    big = convolve(L, C, 0.37, 150)
    small = convolve(L.truncate(60), C.truncate(60), 0.37, 60)
    assert np.array_equal(big.a[:60], small.a)
    assert np.array_equal(big.b[:60], small.b)


def test_input_validation():
    L = jacobi_lebesgue(5)
    with pytest.raises(ValueError):
        convolve(L, L, 1.0, 5)
    with pytest.raises(ValueError):
        convolve(L, L, -0.1, 5)
    with pytest.raises(ValueError):
        convolve(L, L, 0.3, 6)


def test_degenerate_step_at_delta_zero():
    one = DiscreteMeasure([0.3], [1.0])
    with pytest.raises(DegenerateStep) as exc:
        convolve(one, jacobi_lebesgue(4), 0.0, 4)
    assert exc.value.step == 0


def test_fixpoint_from_fixed_point():
    C = closure(TWO, 0.3, 64)
    J, rep = fixpoint(TWO, 0.3, 64, J_init=C, cfg=FixpointConfig(tolerance=1e-10))
    assert rep.distances[0] <= 1e-10 and rep.iterations_run == 1 and rep.converged


def test_fixpoint_delta_zero_one_step():
    L = jacobi_lebesgue(16)
    J, rep = fixpoint(L, 0.0, 16, J_init=closure(TWO, 0.3, 16), cfg=FixpointConfig(tolerance=1e-12))
    assert rep.iterations_run == 2  # first step lands on sigma, second confirms
    assert rep.distances[1] == 0.0


def test_fixpoint_matches_closure_and_contracts():
    cfg = FixpointConfig(record_trajectory=True)
    J, rep = fixpoint(TWO, 0.3, 128, cfg=cfg)
    tol = rep.tolerance
    assert frobenius_distance(J, closure(TWO, 0.3, 128)) <= 10 * tol
    assert len(rep.trajectory) == rep.iterations_run == len(rep.distances)
    d = np.log(rep.distances[-10:])
    assert np.polyfit(np.arange(10), d, 1)[0] < 0


def test_no_convergence():
    with pytest.raises(NoConvergence) as exc:
        fixpoint(TWO, 0.3, 32, cfg=FixpointConfig(tolerance=1e-15, max_iterations=3))
    assert exc.value.report.iterations_run == 3 and exc.value.jacobi.size == 32
    J, rep = fixpoint(TWO, 0.3, 32, cfg=FixpointConfig(max_iterations=3, strict=False))
    assert not rep.converged and J.size == 32


def test_config_validation():
    with pytest.raises(ValueError):
        FixpointConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        FixpointConfig(max_iterations=0)
    assert FixpointConfig().resolved_tolerance(100) == pytest.approx(1e-12)
