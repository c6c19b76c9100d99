"""Petrov-Galerkin solver for nonlinear weakly singular fractional integro-differential equations.

The solution is sought as y_N(t) = sum_k cc_k t^(alpha + k/b); the discrete
equations are triangular in cc, so no nonlinear system is ever solved.
"""

from .basis import FGJFBasis, fgjf_eval, fgjf_monomial_matrix, gauss_jacobi_rule, jacobi_eval, jacobi_norm
from .fracseries import FracSeries, series_solution
from .problem import ProblemSpec, builtin, dump_problem, load_problem, manufacture_source, wellposedness
from .solver import (
    PGSolution,
    convergence_study,
    error_report,
    evaluate,
    evaluate_fgjf,
    residual_check,
    solve_recurrence,
)

__version__ = "0.1.0"

__all__ = [
    "FGJFBasis",
    "FracSeries",
    "PGSolution",
    "ProblemSpec",
    "builtin",
    "convergence_study",
    "dump_problem",
    "error_report",
    "evaluate",
    "evaluate_fgjf",
    "fgjf_eval",
    "fgjf_monomial_matrix",
    "gauss_jacobi_rule",
    "jacobi_eval",
    "jacobi_norm",
    "load_problem",
    "manufacture_source",
    "residual_check",
    "series_solution",
    "solve_recurrence",
    "wellposedness",
]
