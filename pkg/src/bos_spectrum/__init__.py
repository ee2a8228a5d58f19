"""Spectrum of a non-self-adjoint tridiagonal operator by three routes.

The truncated matrix, shooting on the eigenvector recurrence and a weighted
Galerkin method for an equivalent singular Sturm-Liouville problem each give
the eigenvalues; a Frobenius-series connection test checks them against the
generating-function ODE.
"""
from ._backend import COMPILED
from .analysis import (CrossReport, DecayBound, build_cross_report, davies_fit, decay_slope,
                       ell1_tail, weighted_sup_norm)
from .eigensolver import (EigenPair, SpectrumResult, eigen_all, eigenvalues, filter_stable,
                          inverse_iteration, matrix_spectrum)
from .exceptions import (ConvergenceError, FactorizationError, FitError, QuadratureError,
                         ResonantEpsilonError, SingularNormalizationError)
from .heun import (FrobeniusSeries, connection_at, connection_fit, connection_roots,
                   series_at_0, series_at_1)
from .operator import (TridiagonalOperator, build_truncated, heun_parameters, reflect_minus,
                       sl_coefficients, validate_epsilon)
from .recurrence import (backward_minimal, complex_scan, find_real_roots, forward_run,
                         generating_eval, ode_residual, shooting_residual)
from .sturm_liouville import (SturmLiouvilleSystem, assemble, lambda_from_mu, sl_spectrum,
                              weighted_norm_sq)

__version__ = "0.1.0"

__all__ = [
    "COMPILED",
    "ConvergenceError", "FactorizationError", "FitError", "QuadratureError",
    "ResonantEpsilonError", "SingularNormalizationError",
    "TridiagonalOperator", "build_truncated", "heun_parameters", "reflect_minus",
    "sl_coefficients", "validate_epsilon",
    "EigenPair", "SpectrumResult", "eigen_all", "eigenvalues", "filter_stable",
    "inverse_iteration", "matrix_spectrum",
    "backward_minimal", "complex_scan", "find_real_roots", "forward_run", "generating_eval",
    "ode_residual", "shooting_residual",
    "FrobeniusSeries", "connection_at", "connection_fit", "connection_roots", "series_at_0",
    "series_at_1",
    "SturmLiouvilleSystem", "assemble", "lambda_from_mu", "sl_spectrum", "weighted_norm_sq",
    "CrossReport", "DecayBound", "build_cross_report", "davies_fit", "decay_slope", "ell1_tail",
    "weighted_sup_norm",
]
