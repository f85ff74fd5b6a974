"""Quasi-Newton trust-region minimization on updated LDL^T factors.

The inverse Hessian approximation is kept as ``H = T diag(G) T'``; BFGS
updates, shifted solves and the trust-region subproblem all work on the
factors at ``O(n^2)`` cost per iteration.
"""

from .backtrack import BacktrackResult, backtrack_shift
from .bench import (
    ProfilePoint,
    RunRecord,
    emit,
    performance_profile,
    read_records,
    run_suite,
)
from .bfgs import CurvaturePair, FactorUpdate, bfgs_factor_update
from .cg import CGReport, ShiftedSystem, cg_solve_shifted
from .core import SolveReport, SolverConfig, classify, is_near_optimal
from .driver import IterationState, initialize, minimize, ms_minimize
from .exact import SubproblemResult, solve_ms
from .exceptions import (
    CurvatureError,
    DegenerateRotationError,
    FactorRecoveryError,
    InputError,
    LDLTRError,
    ProblemNotFoundError,
    SolveFailureError,
    UpdateFailureError,
)
from .factors import (
    GivensRotation,
    apply_direct_factors,
    apply_inverse_factors,
    column_norms_sq,
    givens_for,
    rank_one_update,
    recover_direct_factors,
)
from .linesearch import bfgsr_minimize, strong_wolfe_search
from .problems import Problem, catalog, gradient_check, make_problem, problem_names
from .shift import ShiftResult, solve_modified_shift

__version__ = "0.1.0"

__all__ = [
    "BacktrackResult", "CGReport", "CurvatureError", "CurvaturePair",
    "DegenerateRotationError", "FactorRecoveryError", "FactorUpdate",
    "GivensRotation", "InputError", "IterationState", "LDLTRError", "Problem",
    "ProblemNotFoundError", "ProfilePoint", "RunRecord", "ShiftResult",
    "ShiftedSystem", "SolveFailureError", "SolveReport", "SolverConfig",
    "SubproblemResult", "UpdateFailureError", "apply_direct_factors",
    "apply_inverse_factors", "backtrack_shift", "bfgs_factor_update",
    "bfgsr_minimize", "catalog", "cg_solve_shifted", "classify",
    "column_norms_sq", "emit", "givens_for", "gradient_check", "initialize",
    "is_near_optimal", "make_problem", "minimize", "ms_minimize",
    "performance_profile", "problem_names", "rank_one_update", "read_records",
    "recover_direct_factors", "run_suite", "solve_modified_shift", "solve_ms",
    "strong_wolfe_search",
]
