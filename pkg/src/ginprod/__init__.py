"""Squared singular values of products of complex Ginibre matrices.

Exact biorthogonal polynomials and recurrences, correlation kernels at
finite n and at the hard edge, and a Monte Carlo sampler to compare with.
"""

from .errors import (
    ConvergenceError,
    DiagonalGuardError,
    DomainError,
    GeometryError,
    GinprodError,
    ParameterError,
    PrecisionError,
    TruncationError,
)
from .quadrature import ContourSpec, EvalResult, GaussRule
from .specfun import ParamSet, SeriesBudget
from .biorth import MonicPoly, p_coeffs, p_eval, q_eval, a_coeff, b_coeff
from .kernel import HardEdgeConfig, KernelConfig, hard_edge_u, kn_sum, trace_moment
from .sampler import MatrixChainSpec, run_batch

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DiagonalGuardError",
    "DomainError",
    "GeometryError",
    "GinprodError",
    "ParameterError",
    "PrecisionError",
    "TruncationError",
    "ContourSpec",
    "EvalResult",
    "GaussRule",
    "ParamSet",
    "SeriesBudget",
    "MonicPoly",
    "p_coeffs",
    "p_eval",
    "q_eval",
    "a_coeff",
    "b_coeff",
    "HardEdgeConfig",
    "KernelConfig",
    "hard_edge_u",
    "kn_sum",
    "trace_moment",
    "MatrixChainSpec",
    "run_batch",
]
