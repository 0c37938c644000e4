import math

import numpy as np
import pytest

from ifsjacobi import EmptyWindow, JacobiMatrix, SizeMismatch, capacity_report, jacobi_lebesgue, nevai_report, powerlaw_fit
from ifsjacobi.analysis import difference_series


def test_powerlaw_exact():
    n = np.arange(0, 500, dtype=float)
    v = np.r_[1.0, 3.0 * n[1:] ** -2.0]
    g, c, res = powerlaw_fit(v, (10, 500))
    assert abs(g + 2) < 1e-10 and abs(c - 3) < 1e-9 and res < 1e-12
    g, c, res = powerlaw_fit(np.full(100, 0.3))
    assert abs(g) < 1e-12 and c == pytest.approx(0.3)


def test_powerlaw_planted_exponents():
    rng = np.random.default_rng(0)
    for gamma in rng.uniform(-3, 1, 5):
        v = np.r_[0.0, np.arange(1, 300, dtype=float) ** gamma]
        assert abs(powerlaw_fit(v, (1, 300))[0] - gamma) < 1e-10


def test_powerlaw_window_errors():
    with pytest.raises(EmptyWindow):
        powerlaw_fit(np.ones(10), (5, 6))
    with pytest.raises(EmptyWindow):
        powerlaw_fit(np.ones(10), (20, 30))
    with pytest.raises(ValueError):
        powerlaw_fit(np.r_[1.0, 0.0, 1.0, 1.0], (1, 4))


def test_nevai_legendre():
    J = jacobi_lebesgue(2000)
    r = nevai_report(J, 0.0, 0.5)
    assert not r.limits_estimated
    assert abs(r.fitted_exponent + 2) < 0.01
    assert np.all(np.diff(r.partial_sums) >= 0)
    # b_n - 1/2 ~ 1/(16 n^2): the partial sums settle
    assert r.partial_sums[-1] - r.partial_sums[999] < 1e-4
    assert r.deviations[99] == pytest.approx(1 / (16 * 100**2), rel=1e-2)


def test_nevai_constant_and_estimated_limits():
    J = JacobiMatrix(np.full(50, 0.2), np.full(49, 0.7))
    r = nevai_report(J, 0.2, 0.7)
    assert np.all(r.deviations == 0) and np.all(r.partial_sums == 0)
    assert math.isnan(r.fitted_exponent)
    r = nevai_report(J)
    assert r.limits_estimated and r.a_inf == pytest.approx(0.2) and r.b_inf == pytest.approx(0.7)
    with pytest.raises(SizeMismatch):
        nevai_report(JacobiMatrix([0.0]))


def test_capacity():
    J = JacobiMatrix(np.zeros(20), np.full(19, 0.3))
    r = capacity_report(J)
    assert np.allclose(r.estimates, -math.log(0.3), rtol=0, atol=1e-15)
    L = jacobi_lebesgue(4000)
    r = capacity_report(L, (L, 0.25))
    assert abs(r.final - math.log(2)) < 5e-3
    lo, hi = r.bounds
    assert lo == r.sigma_estimate and hi == pytest.approx(lo + math.log(1 / 0.75))
    assert r.to_dict()["bounds"] == [lo, hi]


def test_difference_series():
    A = jacobi_lebesgue(10)
    B = JacobiMatrix(np.full(8, 0.1), A.b[1:8])
    da, db = difference_series(A, B)
    assert da.size == 8 and np.all(da == 0.1) and np.all(db == 0)
