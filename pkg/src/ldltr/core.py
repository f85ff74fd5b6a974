"""Configuration, result records and evaluation bookkeeping shared by the solvers."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

EPS = np.finfo(float).eps
NEAR_OPT_FACTOR = EPS ** (2.0 / 3.0)

STATUSES = (
    "converged",
    "near-optimal",
    "iteration-limit",
    "radius-collapse",
    "linesearch-failure",
    "evaluator-failure",
)
SOLVED = ("converged", "near-optimal")


@dataclass
class SolverConfig:
    """All tunable constants of the trust-region driver and the baseline.

    The defaults satisfy ``0 < c1 <= c2``, ``0 < c3 < 1 < c4``,
    ``0 < c5 <= c6 <= c2``, ``0 < c7 < 1`` and
    ``gamma_min <= gamma0 <= gamma_max`` with ``0 < gamma0 < 1``.
    """

    c1: float = 1e-4
    c2: float = 0.75
    c3: float = 0.8
    c4: float = 2.0
    c5: float = 0.1
    c6: float = 0.75
    c7: float = 0.5
    gamma0: float = 0.25
    gamma_min: float = 0.25**10
    gamma_max: float = 0.25
    n_max: int = 100
    eps: float = 1e-4
    k_max: int = 6000
    delta_min: float = 1e-22
    ms_tol: float = 1e-8
    ms_i_max: int = 50
    shift_tol: float = 1e-4
    shift_i_max: int = 10
    backtrack_i_max: int = 3
    cg_tol: float = 1e-8
    cg_i_max: int = 15
    cg_precondition: bool = False
    phi_min: float = 1e-2
    phi_max: float = 1e4
    curvature_threshold: float = float(np.sqrt(EPS))
    update_on_reject: bool = False
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    wolfe_max_trials: int = 40

    def __post_init__(self):
        self.validate()

    def validate(self):
        ok = (
            0 < self.c1 <= self.c2
            and 0 < self.c3 < 1 < self.c4
            and 0 < self.c5 <= self.c6 <= self.c2
            and 0 < self.c7 < 1
            and 0 < self.gamma0 < 1
            and 0 < self.gamma_min <= self.gamma0 <= self.gamma_max < 1
        )
        if not ok:
            raise ValueError("trust-region constants violate their required ordering")
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise ValueError("need 0 < wolfe_c1 < wolfe_c2 < 1")
        if self.eps <= 0 or self.k_max < 0 or self.delta_min <= 0:
            raise ValueError("eps and delta_min must be positive, k_max nonnegative")
        if min(self.ms_i_max, self.shift_i_max, self.backtrack_i_max, self.cg_i_max) < 1:
            raise ValueError("iteration caps must be positive")
        return self

    def get_params(self):
        return asdict(self)

    def set_params(self, **params):
        names = {f.name for f in fields(self)}
        unknown = set(params) - names
        if unknown:
            raise ValueError(f"unknown parameters: {sorted(unknown)}")
        for key, value in params.items():
            setattr(self, key, value)
        return self.validate()


@dataclass
class SolveReport:
    status: str
    iterations: int
    function_evals: int
    gradient_evals: int
    final_f: float
    final_gnorm: float
    wall_time: float
    x: np.ndarray | None = None
    f0: float = np.nan
    g0norm: float = np.nan
    diagnostics: dict = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.status in SOLVED


def is_near_optimal(f_k, gnorm_k, f_0, gnorm_0, factor=NEAR_OPT_FACTOR):
    """``|f_k| <= |f_0| * eps_M**(2/3)`` or ``||g_k|| <= ||g_0|| * eps_M**(2/3)``."""
    return abs(f_k) <= abs(f_0) * factor or gnorm_k <= gnorm_0 * factor


def classify(status, f_k, gnorm_k, f_0, gnorm_0):
    """Re-label a run that stopped early as near-optimal when it qualifies."""
    if status in ("iteration-limit", "radius-collapse", "linesearch-failure"):
        if is_near_optimal(f_k, gnorm_k, f_0, gnorm_0):
            return "near-optimal"
    return status


class Evaluator:
    """Wrap objective and gradient callables and count every call."""

    def __init__(self, f, grad):
        self._f = f
        self._grad = grad
        self.nf = 0
        self.ng = 0

    def f(self, x):
        self.nf += 1
        return float(self._f(x))

    def grad(self, x):
        self.ng += 1
        return np.asarray(self._grad(x), dtype=float)
