import pytest

from ifsjacobi import DiscreteMeasure, JacobiMatrix, closure
from ifsjacobi import fixtures


def test_registry_names():
    assert set(fixtures.FIXTURES) == {
        "lebesgue", "two-atom", "bernoulli-sqrt2", "bernoulli-3q4", "bernoulli-pisot",
        "refinable-1", "fibonacci",
    }
    with pytest.raises(KeyError):
        fixtures.get("nope")


def test_values():
    p = fixtures.plastic_number()
    assert p**3 == pytest.approx(p + 1, abs=1e-14)
    assert 1 / p == pytest.approx(0.7548776662467, abs=1e-13)
    assert fixtures.FIXTURES["bernoulli-sqrt2"].delta == pytest.approx(0.7071067811865, abs=1e-13)
    assert isinstance(fixtures.get("refinable-1").sigma(), DiscreteMeasure)
    assert isinstance(fixtures.get("fibonacci").sigma(20), JacobiMatrix)
    w = (0.1, 0.4, 0.4, 0.1)
    assert fixtures.refinable_sigma(w).weights.tolist() == list(w)


def test_examples():
    s, d = fixtures.example_sigma("sc", 32)
    assert d == 0.25 and s == closure(fixtures.two_atom(), 0.3, 32)
    s, d = fixtures.example_sigma("pp", 32)
    assert isinstance(s, DiscreteMeasure) and d == 0.3
