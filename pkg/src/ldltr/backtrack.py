"""Geometric backtracking on the trust-region shift."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cg import ShiftedSystem
from .exceptions import InputError


@dataclass
class BacktrackResult:
    s_best: np.ndarray
    f_best: float
    sigma_used: float
    exit_index: int
    function_evals: int
    literal_exit_index: int = 1
    trial_sigmas: list = field(default_factory=list)
    trial_values: list = field(default_factory=list)


def backtrack_shift(objective, x, f_x, T, G, g, sigma0, gamma=0.25, i_max=3, *,
                    system=None, cg_tol=1e-8, i_cg_max=15, first_trial=None):
    """Try the shifts ``sigma0 * gamma**i`` while the objective keeps improving.

    Trial ``i`` solves ``(B + sigma_i I) s_i = -g`` by phase-2 CG and
    evaluates ``objective(x + s_i)``. The loop continues while each trial
    is strictly better than every earlier value, ``f_x`` included, and
    stops at the first trial that is not (or at ``i_max``). The best
    evaluated trial is returned even when it is not the last one.

    ``literal_exit_index`` records where the loop would stop if only
    ``f_x <= f(x + s_i)`` ended it; ``exit_index`` drives the driver's
    ``gamma`` adaptation.

    A non-finite objective value counts as a non-improving trial.
    ``first_trial = (s, f)`` supplies an already evaluated step for
    ``sigma0`` (the exact subproblem solution, say) and saves one solve
    and one evaluation.
    """
    if sigma0 < 0.0:
        raise InputError("sigma0 must be nonnegative")
    if not 0.0 < gamma < 1.0:
        raise InputError("gamma must lie in (0, 1)")
    if i_max < 1:
        raise InputError("i_max must be at least 1")
    if system is None:
        system = ShiftedSystem(T, G, g)

    sigmas, values = [], []
    best_s, best_f, best_sigma = None, np.inf, sigma0
    reference = f_x
    literal = None
    sigma = sigma0
    i = 0
    while i < i_max:
        if i == 0 and first_trial is not None:
            s, f_trial = first_trial
        else:
            s = system.solve(sigma, tol=cg_tol, i_cg_max=i_cg_max).s
            f_trial = objective(x + s)
        i += 1
        f_trial = float(f_trial) if np.isfinite(f_trial) else np.inf
        sigmas.append(sigma)
        values.append(f_trial)
        if literal is None and not f_trial < f_x:
            literal = i
        if best_s is None or f_trial < best_f:
            best_s, best_f, best_sigma = s, f_trial, sigma
        if not f_trial < reference:
            break
        reference = f_trial
        if sigma == 0.0:
            # further trials would repeat the unshifted solve
            break
        sigma = sigma0 * gamma**i
    return BacktrackResult(
        s_best=best_s,
        f_best=best_f,
        sigma_used=best_sigma,
        exit_index=i,
        function_evals=i - (first_trial is not None),
        literal_exit_index=literal if literal is not None else i,
        trial_sigmas=sigmas,
        trial_values=values,
    )
