"""Named measures and IFS setups used by the tests, the CLI and the figures."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from .closure import closure_atoms
from .inverse import fibonacci_jacobi
from .jacobi import DiscreteMeasure, JacobiMatrix, jacobi_lebesgue

Measure = Union[DiscreteMeasure, JacobiMatrix]

REFINABLE_WEIGHTS = (1 / 8, 3 / 8, 3 / 8, 1 / 8)


def plastic_number() -> float:
    """Real root of x^3 = x + 1, the smallest Pisot number."""
    r = np.roots([1.0, 0.0, -1.0, -1.0])
    return float(max(z.real for z in r if abs(z.imag) < 1e-12))


def two_atom() -> DiscreteMeasure:
    return DiscreteMeasure([-1.0, 1.0], [0.5, 0.5])


def bernoulli_sigma() -> DiscreteMeasure:
    return DiscreteMeasure([0.0, 1.0], [0.5, 0.5])


def refinable_sigma(weights: Sequence[float] = REFINABLE_WEIGHTS) -> DiscreteMeasure:
    return DiscreteMeasure([0.0, 1.0, 2.0, 3.0], weights)


BERNOULLI_DELTAS = {
    "sqrt2": 2.0 ** -0.5,
    "3q4": 0.75,
    "pisot": 1.0 / plastic_number(),
}


@lru_cache(maxsize=8)
def cantor_jacobi(nbar: int, delta: float = 0.3) -> JacobiMatrix:
    """Invariant measure of the two-atom IFS, the Cantor-supported sigma of the second example."""
    return closure_atoms(two_atom(), delta, nbar)


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    delta: Optional[float]
    build: Callable[[int], Measure]
    kind: str  # "atoms" or "jacobi"

    def sigma(self, nbar: int = 0) -> Measure:
        return self.build(nbar)


def _atoms(f):
    return lambda nbar: f()


FIXTURES: Dict[str, Fixture] = {
    f.name: f
    for f in [
        Fixture("lebesgue", "normalized Lebesgue measure on [-1,1]", None, jacobi_lebesgue, "jacobi"),
        Fixture("two-atom", "(D_-1 + D_1)/2; with delta=1/2 the IFS yields Lebesgue measure",
                0.5, _atoms(two_atom), "atoms"),
        *[
            Fixture(f"bernoulli-{k}", f"(D_0 + D_1)/2, Bernoulli convolution with delta={v!r}",
                    v, _atoms(bernoulli_sigma), "atoms")
            for k, v in BERNOULLI_DELTAS.items()
        ],
        Fixture("refinable-1", "atoms 0,1,2,3 with weights 1/8,3/8,3/8,1/8, delta=1/2",
                0.5, _atoms(refinable_sigma), "atoms"),
        Fixture("fibonacci", "a_j=0, b_j in {2/5, 1/2} along the Fibonacci substitution word",
                None, fibonacci_jacobi, "jacobi"),
    ]
}

# sigma and delta of the three fixed-point iteration examples
EXAMPLES = {
    "pp": (two_atom, 0.3),
    "sc": (cantor_jacobi, 0.25),
    "ac": (jacobi_lebesgue, 0.25),
}


def example_sigma(key: str, nbar: int):
    build, delta = EXAMPLES[key]
    sigma = build(nbar) if build is not two_atom else build()
    return sigma, delta


def get(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}") from None
