"""Nonlinear Gaussian filtering with exact polynomial moment integrals."""

from .filters import (
    CkfEngine,
    EkfEngine,
    FilterState,
    GhfEngine,
    GifEngine,
    SystemModel,
    UkfEngine,
    VectorFunction,
    make_engine,
    predict,
    update,
)
from .moments import (
    EigenBasis,
    Gaussian,
    MomentContext,
    eig_sym,
    expect_monomial,
    expect_poly,
    gauss_integral_1d,
    oracle_moment,
)
from .poly import Polynomial, PolyVector
from .problems import (
    Problem1,
    Problem1Config,
    Problem2,
    Problem2Config,
    Trajectory,
    build_models,
    simulate_problem1,
    simulate_problem2,
)
from .taylor import SmoothFn, finite_diff_partials, taylorize

__all__ = [
    "CkfEngine",
    "EigenBasis",
    "EkfEngine",
    "FilterState",
    "Gaussian",
    "GhfEngine",
    "GifEngine",
    "MomentContext",
    "Polynomial",
    "PolyVector",
    "Problem1",
    "Problem1Config",
    "Problem2",
    "Problem2Config",
    "SmoothFn",
    "SystemModel",
    "Trajectory",
    "UkfEngine",
    "VectorFunction",
    "build_models",
    "eig_sym",
    "expect_monomial",
    "expect_poly",
    "finite_diff_partials",
    "gauss_integral_1d",
    "make_engine",
    "oracle_moment",
    "predict",
    "simulate_problem1",
    "simulate_problem2",
    "taylorize",
    "update",
]

__version__ = "0.1.0"
