"""Jacobi matrices of measures generated by homogeneous affine iterated function systems."""

from .analysis import CapacityReport, NevaiReport, capacity_report, nevai_report, powerlaw_fit
from .closure import closure, closure_atoms
from .convolution import FixpointConfig, FixpointReport, convolve, fixpoint
from .errors import (
    DegenerateMeasure,
    DegenerateStep,
    EigenFailure,
    EmptyWindow,
    IfsJacobiError,
    IndexOutOfRange,
    InvalidTarget,
    NoConvergence,
    NormalizationError,
    ParseError,
    RankExceeded,
    SizeMismatch,
)
from .inverse import FeasibilityFrontier, InverseResult, delta_frontier, fibonacci_jacobi, invert
from .jacobi import (
    DiscreteMeasure,
    IfsSpec,
    JacobiMatrix,
    frobenius_distance,
    jacobi_from_discrete,
    jacobi_lebesgue,
    read_atoms,
    read_jacobi,
    read_measure,
    write_atoms,
    write_jacobi,
)
from .scaling import ScalingMatrix, ScalingState
from .spectral import GaussRule, convolve_spectral, fixpoint_spectral, gauss_rule, product_rule

__version__ = "0.1.0"

__all__ = [
    "CapacityReport",
    "DegenerateMeasure",
    "DegenerateStep",
    "DiscreteMeasure",
    "EigenFailure",
    "EmptyWindow",
    "FeasibilityFrontier",
    "FixpointConfig",
    "FixpointReport",
    "GaussRule",
    "IfsJacobiError",
    "IfsSpec",
    "IndexOutOfRange",
    "InvalidTarget",
    "InverseResult",
    "JacobiMatrix",
    "NevaiReport",
    "NoConvergence",
    "NormalizationError",
    "ParseError",
    "RankExceeded",
    "ScalingMatrix",
    "ScalingState",
    "SizeMismatch",
    "capacity_report",
    "closure",
    "closure_atoms",
    "convolve",
    "convolve_spectral",
    "delta_frontier",
    "fibonacci_jacobi",
    "fixpoint",
    "fixpoint_spectral",
    "frobenius_distance",
    "gauss_rule",
    "invert",
    "jacobi_from_discrete",
    "jacobi_lebesgue",
    "nevai_report",
    "powerlaw_fit",
    "product_rule",
    "read_atoms",
    "read_jacobi",
    "read_measure",
    "write_atoms",
    "write_jacobi",
]
