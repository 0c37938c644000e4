import math
from fractions import Fraction

import numpy as np
import pytest

from ifsjacobi import (
    DiscreteMeasure,
    JacobiMatrix,
    closure,
    convolve,
    convolve_spectral,
    fixpoint_spectral,
    frobenius_distance,
    gauss_rule,
    jacobi_lebesgue,
    product_rule,
)
from ifsjacobi.spectral import GaussRule
from oracles import convolution_moments, legendre_moments

TWO = DiscreteMeasure([-1.0, 1.0], [0.5, 0.5])


def test_gauss_two_atoms():
    r = gauss_rule(JacobiMatrix([0.0, 0.0], [1.0]), 2)
    assert r.nodes == pytest.approx([-1.0, 1.0], abs=1e-15)
    assert r.weights == pytest.approx([0.5, 0.5], abs=1e-15)


def test_gauss_small_cases():
    r = gauss_rule(JacobiMatrix([0.3, 0.1], [0.5]), 1)
    assert r.nodes.tolist() == [0.3] and r.weights.tolist() == [1.0]
    r = gauss_rule(jacobi_lebesgue(5), 2)
    assert r.nodes == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)], abs=1e-15)
    assert r.weights == pytest.approx([0.5, 0.5], abs=1e-15)


def test_gauss_invariants():
    r = gauss_rule(jacobi_lebesgue(50), 50)
    assert np.all(np.diff(r.nodes) > 0)
    assert np.all(r.weights > 0) and abs(r.weights.sum() - 1) < 1e-12
    assert np.all(np.abs(r.nodes) < 1)
    g, w = np.polynomial.legendre.leggauss(50)
    assert np.max(np.abs(r.nodes - g)) < 1e-14
    assert np.max(np.abs(r.weights - w / 2)) < 1e-14


def test_product_rule_trivial_cases():
    a = GaussRule(np.array([0.2]), np.array([1.0]))
    b = GaussRule(np.array([-0.4]), np.array([1.0]))
    m = product_rule(a, b, 0.25)
    assert m.count == 1 and m.nodes[0] == pytest.approx(0.25 * 0.2 - 0.75 * 0.4)
    r = gauss_rule(jacobi_lebesgue(4), 4)
    m0 = product_rule(r, r, 0.0)
    assert m0.count == 4 and np.allclose(m0.weights, r.weights)


def test_product_rule_moment_exactness():
    n = 5
    r = gauss_rule(jacobi_lebesgue(n), n)
    m = product_rule(r, r, 0.25)
    exact = convolution_moments(legendre_moments(2 * n), legendre_moments(2 * n), Fraction(1, 4))
    for p in range(2 * n):
        assert np.sum(m.weights * m.nodes**p) == pytest.approx(float(exact[p]), abs=1e-12)


def test_product_rule_matches_direct_moments():
    # moments of the Algorithm-1 output through its Gauss rule of the same order
    n = 20
    L = jacobi_lebesgue(n)
    C = closure(TWO, 0.3, n)
    m = product_rule(gauss_rule(C, n), gauss_rule(L, n), 0.4)
    direct = gauss_rule(convolve(L, C, 0.4, n), n)
    for p in range(2 * n):
        assert np.sum(m.weights * m.nodes**p) == pytest.approx(
            np.sum(direct.weights * direct.nodes**p), abs=1e-11)


def test_spectral_vs_direct():
    L = jacobi_lebesgue(40)
    for sigma in (L, TWO):
        for d in (0.25, 0.6):
            assert frobenius_distance(convolve(sigma, L, d, 40), convolve_spectral(sigma, L, d, 40)) <= 1e-10


def test_spectral_delta_zero():
    L = jacobi_lebesgue(12)
    C = closure(TWO, 0.3, 12)
    assert frobenius_distance(convolve_spectral(L, C, 0.0, 12), L) < 1e-13


def test_fixpoint_spectral_example_ac():
    L = jacobi_lebesgue(64)
    J, rep = fixpoint_spectral(L, 0.25, 64)
    assert rep.converged
    assert frobenius_distance(J, closure(L, 0.25, 64)) <= 1e-8
    J0, rep0 = fixpoint_spectral(L, 0.0, 64, J_init=L)
    assert rep0.iterations_run == 1
