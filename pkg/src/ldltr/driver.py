"""The LDL^T quasi-Newton trust-region method and a Moré-Sorensen reference solver.

Per iteration the method tries the full quasi-Newton step
``s = -T G T' g``. When it leaves the trust region, a shift ``sigma`` is
estimated (exactly for ``n <= n_max``, by the factorization-free Newton
iteration otherwise), shift backtracking picks the best of a few shifted
CG steps, and the usual ratio test decides acceptance and the new radius.
The inverse factors ``(T, G)`` receive a BFGS update after every accepted
step with positive curvature.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .backtrack import backtrack_shift
from .bfgs import CurvaturePair, bfgs_factor_update
from .cg import ShiftedSystem
from .core import EPS, Evaluator, SolveReport, SolverConfig, classify
from .exact import solve_ms
from .exceptions import LDLTRError
from .factors import (
    apply_direct_factors,
    apply_inverse_factors,
    assemble,
    column_norms_sq,
    recover_direct_factors,
)
from .linesearch import WolfeParams, first_alpha, initial_scaling, strong_wolfe_search
from .shift import solve_modified_shift

log = logging.getLogger(__name__)


@dataclass
class IterationState:
    x: np.ndarray
    f: float
    g: np.ndarray
    T: np.ndarray
    G: np.ndarray
    delta: float
    gamma: float
    k: int = 0

    @property
    def gnorm(self):
        return float(np.linalg.norm(self.g))


def update_radius(delta, rho, snorm, config):
    """New trust radius; one of increase, hold or decrease.

    Returns ``(delta_new, action)`` with action in
    ``{"increase", "hold", "decrease"}``.
    """
    if rho > config.c2:
        if snorm <= config.c3 * delta:
            return delta, "hold"
        return config.c4 * delta, "increase"
    if config.c5 <= rho <= config.c6:
        return delta, "hold"
    return config.c7 * delta, "decrease"


def update_gamma(gamma, exit_index, config):
    """Double ``gamma`` after exit at the second trial, halve it after a full sweep."""
    if exit_index == 2:
        gamma = 2.0 * gamma
    elif exit_index == config.backtrack_i_max:
        gamma = 0.5 * gamma
    return max(min(gamma, config.gamma_max), config.gamma_min)


def predicted_reduction(s, g, Bs):
    """``-(g's + s'Bs / 2)``, positive for a model decrease."""
    return -(float(s @ g) + 0.5 * float(s @ Bs))


def initialize(problem, config=None, evaluator=None):
    """Starting state: ``H0 = phi I``, one strong-Wolfe step, ``delta = 2 ||x1 - x0||``.

    Returns ``(state, info)``; ``state`` is None when the first line search
    cannot decrease ``f``. ``info`` carries the initial ``f0``, ``||g0||``
    and ``phi``.
    """
    config = config or SolverConfig()
    ev = evaluator or Evaluator(problem.f, problem.grad)
    x0 = np.array(problem.x0, dtype=float)
    n = x0.size
    f0 = ev.f(x0)
    g0 = ev.grad(x0)
    gnorm0 = float(np.linalg.norm(g0))
    info = {"f0": f0, "g0norm": gnorm0, "phi": np.nan, "x0": x0, "g0": g0}
    if not (np.isfinite(f0) and np.all(np.isfinite(g0))):
        raise FloatingPointError("objective or gradient not finite at the start point")
    phi = initial_scaling(gnorm0, config.phi_min, config.phi_max)
    info["phi"] = phi
    T = np.eye(n)
    G = np.full(n, phi)
    if gnorm0 <= config.eps:
        return IterationState(x0, f0, g0, T, G, 1.0, config.gamma0, 0), info
    p = -phi * g0
    dg0 = float(g0 @ p)
    params = WolfeParams(config.wolfe_c1, config.wolfe_c2,
                         alpha_init=first_alpha(f0, gnorm0, dg0),
                         max_trials=config.wolfe_max_trials)
    ls = strong_wolfe_search(ev.f, ev.grad, x0, p, f0, dg0, params)
    if not ls.f < f0 or ls.g is None:
        return None, info
    x1 = x0 + ls.alpha * p
    delta = 2.0 * float(np.linalg.norm(x1 - x0))
    upd = bfgs_factor_update(T, G, CurvaturePair(x1 - x0, ls.g - g0),
                             threshold=config.curvature_threshold)
    state = IterationState(x1, ls.f, ls.g, upd.T, upd.G, delta, config.gamma0, 1)
    return state, info


def _inverse_norm(T, G, n_max):
    if T.shape[0] <= n_max:
        return float(np.linalg.norm(assemble(T, G), 1))
    # ||T G T'||_2 <= max(G) ||T||_F^2 avoids forming H
    return float(np.max(G) * np.sum(column_norms_sq(T)))


def minimize(problem, config=None, *, callback=None):
    """Minimize ``problem.f`` from ``problem.x0`` with the LDL^T trust-region method.

    Parameters
    ----------
    problem
        Any object with ``f(x)``, ``grad(x)`` and ``x0``.
    config : SolverConfig, optional
    callback : callable, optional
        Called as ``callback(state)`` after every iteration.

    Returns
    -------
    SolveReport
        ``diagnostics`` holds per-iteration traces (phase-1 iteration
        counts, backtrack exit indices, radius actions, ``||H||`` estimates).
    """
    config = config or SolverConfig()
    ev = Evaluator(problem.f, problem.grad)
    start = time.perf_counter()
    diag = {
        "phase1_iterations": [],
        "ms_iterations": [],
        "backtrack_exit": [],
        "backtrack_literal_exit": [],
        "radius_action": [],
        "accepted": [],
        "rho": [],
        "h_norm": [],
        "gamma": [],
        "sigma_plus": [],
        "update_status": [],
        "step_kind": [],
    }

    def report(status, state, f0, g0n):
        elapsed = time.perf_counter() - start
        if state is None:
            return SolveReport(status, 0, ev.nf, ev.ng, f0, g0n, elapsed,
                               np.array(problem.x0, dtype=float), f0, g0n, diag)
        status = classify(status, state.f, state.gnorm, f0, g0n)
        return SolveReport(status, state.k, ev.nf, ev.ng, state.f, state.gnorm,
                           elapsed, state.x, f0, g0n, diag)

    try:
        state, info = initialize(problem, config, ev)
    except (FloatingPointError, ArithmeticError, ValueError):
        return report("evaluator-failure", None, np.nan, np.nan)
    f0, g0n = info["f0"], info["g0norm"]
    if state is None:
        return report("evaluator-failure", None, f0, g0n)
    n = state.x.size

    while True:
        if state.gnorm <= config.eps:
            return report("converged", state, f0, g0n)
        if state.k >= config.k_max:
            return report("iteration-limit", state, f0, g0n)
        if state.delta <= config.delta_min:
            return report("radius-collapse", state, f0, g0n)
        step_trial(state, ev, config, diag, n)
        diag["h_norm"].append(_inverse_norm(state.T, state.G, config.n_max))
        diag["gamma"].append(state.gamma)
        if callback is not None:
            callback(state)


def _compute_step(state, ev, config, diag, n):
    """Trial step and its objective value; may evaluate several trials."""
    x, g, T, G = state.x, state.g, state.T, state.G
    s = -apply_inverse_factors(T, G, g)
    if np.min(G) > 0.0 and np.linalg.norm(s) <= state.delta:
        diag["step_kind"].append("newton")
        return s, _safe_f(ev, x + s), None

    E = column_norms_sq(T)
    if n <= config.n_max:
        L, D = recover_direct_factors(T, G)
        B = assemble(L, D)
        B = 0.5 * (B + B.T)
        res = solve_ms(B, g, state.delta, tol=config.ms_tol, i_max=config.ms_i_max)
        s_plus, sigma_plus = res.s, res.sigma
        diag["ms_iterations"].append(res.iterations)
    else:
        res = solve_modified_shift(T, G, E, g, state.delta, tol=config.shift_tol,
                                   i_max=config.shift_i_max)
        s_plus, sigma_plus = res.s_plus, res.sigma_plus
        diag["phase1_iterations"].append(res.iterations)
    diag["sigma_plus"].append(sigma_plus)
    f_plus = _safe_f(ev, x + s_plus)

    system = ShiftedSystem(T, G, g, E=E, precondition=config.cg_precondition)
    # the exact solve already is the sigma0 trial; phase 1 gives a different step
    first = (s_plus, f_plus) if n <= config.n_max else None
    bt = backtrack_shift(lambda z: _safe_f(ev, z), x, state.f, T, G, g, sigma_plus,
                         state.gamma, config.backtrack_i_max, system=system,
                         cg_tol=config.cg_tol, i_cg_max=config.cg_i_max,
                         first_trial=first)
    diag["backtrack_exit"].append(bt.exit_index)
    diag["backtrack_literal_exit"].append(bt.literal_exit_index)
    if f_plus < bt.f_best:
        diag["step_kind"].append("phase1")
        return s_plus, f_plus, bt.exit_index
    diag["step_kind"].append("backtrack")
    return bt.s_best, bt.f_best, bt.exit_index


def _safe_f(ev, z):
    try:
        value = ev.f(z)
    except (ArithmeticError, ValueError):
        return np.inf
    return value if np.isfinite(value) else np.inf


def step_trial(state, ev, config, diag, n):
    """One outer iteration; mutates ``state``."""
    try:
        s, f_trial, exit_index = _compute_step(state, ev, config, diag, n)
    except LDLTRError as exc:
        log.debug("step computation failed: %s", exc)
        s, f_trial, exit_index = None, np.inf, None

    state.k += 1
    if s is None or not np.isfinite(f_trial):
        diag["accepted"].append(False)
        diag["rho"].append(-np.inf)
        diag["radius_action"].append("decrease")
        state.delta *= config.c7
        return

    actual = state.f - f_trial
    snorm = float(np.linalg.norm(s))
    g_trial = None
    if abs(actual) <= 4.0 * EPS * max(1.0, abs(state.f)):
        # function values carry no information: compare gradient norms
        g_trial = ev.grad(state.x + s)
        accept = np.all(np.isfinite(g_trial)) and np.linalg.norm(g_trial) < state.gnorm
        rho = 1.0 if accept else 0.0
    else:
        Bs = apply_direct_factors(state.T, state.G, s)
        pred = predicted_reduction(s, state.g, Bs)
        rho = actual / pred if pred > 0.0 else -np.inf
        accept = rho > config.c1
    diag["rho"].append(rho)
    diag["accepted"].append(bool(accept))

    if accept or config.update_on_reject:
        if g_trial is None:
            g_trial = ev.grad(state.x + s)
        if np.all(np.isfinite(g_trial)):
            upd = bfgs_factor_update(state.T, state.G, CurvaturePair(s, g_trial - state.g),
                                     threshold=config.curvature_threshold)
            diag["update_status"].append(upd.status)
            state.T, state.G = upd.T, upd.G
        else:
            accept = False
    if accept:
        state.x = state.x + s
        state.f = f_trial
        state.g = g_trial
        if exit_index is not None:
            state.gamma = update_gamma(state.gamma, exit_index, config)

    state.delta, action = update_radius(state.delta, rho, snorm, config)
    diag["radius_action"].append(action)


def ms_minimize(problem, config=None):
    """Trust-region BFGS with the exact Moré-Sorensen subproblem solve each iteration.

    Dense ``B`` and ``O(n^3)`` work per iteration; a reference for small problems.
    """
    config = config or SolverConfig()
    ev = Evaluator(problem.f, problem.grad)
    start = time.perf_counter()
    x = np.array(problem.x0, dtype=float)
    try:
        f = ev.f(x)
        g = ev.grad(x)
    except (ArithmeticError, ValueError):
        f = np.nan
        g = np.full(x.size, np.nan)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        return SolveReport("evaluator-failure", 0, ev.nf, ev.ng, f, np.nan,
                           time.perf_counter() - start, x)
    f0, g0n = f, float(np.linalg.norm(g))
    gnorm = g0n
    B = np.eye(x.size) / initial_scaling(gnorm, config.phi_min, config.phi_max)
    delta = max(1.0, 0.1 * np.linalg.norm(x))
    k = 0
    status = "converged"
    while gnorm > config.eps:
        if k >= config.k_max:
            status = "iteration-limit"
            break
        if delta <= config.delta_min:
            status = "radius-collapse"
            break
        k += 1
        res = solve_ms(B, g, delta, tol=config.ms_tol, i_max=config.ms_i_max)
        s = res.s
        f_trial = _safe_f(ev, x + s)
        pred = predicted_reduction(s, g, B @ s)
        actual = f - f_trial
        if np.isfinite(f_trial) and abs(actual) <= 4.0 * EPS * max(1.0, abs(f)):
            g_trial = ev.grad(x + s)
            rho = 1.0 if np.linalg.norm(g_trial) < gnorm else 0.0
        else:
            g_trial = None
            rho = actual / pred if (pred > 0.0 and np.isfinite(f_trial)) else -np.inf
        if rho > config.c1:
            if g_trial is None:
                g_trial = ev.grad(x + s)
            y = g_trial - g
            sy = float(y @ s)
            if sy > config.curvature_threshold * np.linalg.norm(y) * np.linalg.norm(s):
                Bs = B @ s
                B += np.outer(y, y) / sy - np.outer(Bs, Bs) / float(s @ Bs)
            x, f, g = x + s, f_trial, g_trial
            gnorm = float(np.linalg.norm(g))
        delta, _ = update_radius(delta, rho, float(np.linalg.norm(s)), config)
    status = classify(status, f, gnorm, f0, g0n)
    return SolveReport(status, k, ev.nf, ev.ng, f, gnorm, time.perf_counter() - start,
                       x, f0, g0n)
