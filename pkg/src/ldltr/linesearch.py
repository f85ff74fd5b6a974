"""Strong-Wolfe line search (Moré-Thuente) and the line-search BFGS baseline."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import Evaluator, SolveReport, SolverConfig, classify
from .exceptions import InputError

XTRAPL = 1.1
XTRAPU = 4.0


@dataclass
class WolfeParams:
    c_armijo: float = 1e-4
    c_curv: float = 0.9
    alpha_init: float = 1.0
    alpha_max: float = 1e10
    max_trials: int = 40
    xtol: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.c_armijo < self.c_curv < 1.0:
            raise InputError("need 0 < c_armijo < c_curv < 1")


@dataclass
class LineSearchResult:
    alpha: float
    f: float
    g: np.ndarray | None
    success: bool
    trials: int
    message: str


def _cstep(stx, fx, dx, sty, fy, dy, stp, fp, dp, brackt, stpmin, stpmax):
    """Safeguarded cubic/quadratic step of Moré & Thuente (MINPACK-2 dcstep)."""
    sgnd = dp * np.sign(dx)
    if fp > fx:
        theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp
        s = max(abs(theta), abs(dx), abs(dp))
        gamma = s * np.sqrt((theta / s) ** 2 - (dx / s) * (dp / s))
        if stp < stx:
            gamma = -gamma
        p = (gamma - dx) + theta
        q = ((gamma - dx) + gamma) + dp
        stpc = stx + (p / q) * (stp - stx)
        stpq = stx + ((dx / ((fx - fp) / (stp - stx) + dx)) / 2.0) * (stp - stx)
        if abs(stpc - stx) < abs(stpq - stx):
            stpf = stpc
        else:
            stpf = stpc + (stpq - stpc) / 2.0
        brackt = True
    elif sgnd < 0.0:
        theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp
        s = max(abs(theta), abs(dx), abs(dp))
        gamma = s * np.sqrt((theta / s) ** 2 - (dx / s) * (dp / s))
        if stp > stx:
            gamma = -gamma
        p = (gamma - dp) + theta
        q = ((gamma - dp) + gamma) + dx
        stpc = stp + (p / q) * (stx - stp)
        stpq = stp + (dp / (dp - dx)) * (stx - stp)
        stpf = stpc if abs(stpc - stp) > abs(stpq - stp) else stpq
        brackt = True
    elif abs(dp) < abs(dx):
        theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp
        s = max(abs(theta), abs(dx), abs(dp))
        gamma = s * np.sqrt(max(0.0, (theta / s) ** 2 - (dx / s) * (dp / s)))
        if stp > stx:
            gamma = -gamma
        p = (gamma - dp) + theta
        q = (gamma + (dx - dp)) + gamma
        r = p / q
        if r < 0.0 and gamma != 0.0:
            stpc = stp + r * (stx - stp)
        elif stp > stx:
            stpc = stpmax
        else:
            stpc = stpmin
        stpq = stp + (dp / (dp - dx)) * (stx - stp)
        if brackt:
            stpf = stpc if abs(stpc - stp) < abs(stpq - stp) else stpq
            if stp > stx:
                stpf = min(stp + 0.66 * (sty - stp), stpf)
            else:
                stpf = max(stp + 0.66 * (sty - stp), stpf)
        else:
            stpf = stpc if abs(stpc - stp) > abs(stpq - stp) else stpq
            stpf = max(stpmin, min(stpmax, stpf))
    else:
        if brackt:
            theta = 3.0 * (fp - fy) / (sty - stp) + dy + dp
            s = max(abs(theta), abs(dy), abs(dp))
            gamma = s * np.sqrt((theta / s) ** 2 - (dy / s) * (dp / s))
            if stp > sty:
                gamma = -gamma
            p = (gamma - dp) + theta
            q = ((gamma - dp) + gamma) + dy
            stpf = stp + (p / q) * (sty - stp)
        elif stp > stx:
            stpf = stpmax
        else:
            stpf = stpmin

    if fp > fx:
        sty, fy, dy = stp, fp, dp
    else:
        if sgnd < 0.0:
            sty, fy, dy = stx, fx, dx
        stx, fx, dx = stp, fp, dp
    return stx, fx, dx, sty, fy, dy, stpf, brackt


def strong_wolfe_search(f, grad, x, p, f0, dg0, params=None):
    """Find ``alpha`` with ``f(x + alpha p) <= f0 + c_armijo alpha dg0`` and
    ``|grad(x + alpha p)'p| <= c_curv |dg0|``.

    Follows the interval updates of Moré & Thuente (1994). On failure the
    lowest trial point seen is returned with ``success=False``.

    Raises
    ------
    InputError
        If ``dg0 >= 0`` (``p`` is not a descent direction).
    """
    params = params or WolfeParams()
    if not dg0 < 0.0:
        raise InputError("search direction is not a descent direction")
    ftol, gtol, xtol = params.c_armijo, params.c_curv, params.xtol
    stpmin, stpmax = 0.0, params.alpha_max
    stp = min(max(params.alpha_init, stpmin), stpmax)

    gtest = ftol * dg0
    width = stpmax - stpmin
    width1 = width / 0.5
    brackt = False
    stage = 1
    stx, fx, gx = 0.0, f0, dg0
    sty, fy, gy = 0.0, f0, dg0
    stmin, stmax = 0.0, stp + XTRAPU * stp
    best = (0.0, f0, None)
    message = "maximum trials reached"

    for trial in range(1, params.max_trials + 1):
        xt = x + stp * p
        ft = f(xt)
        gvec = grad(xt) if np.isfinite(ft) else None
        if gvec is None or not np.all(np.isfinite(gvec)):
            # step into an undefined region: pull back towards the best point
            stmax = stp
            brackt = True
            stp = stx + 0.5 * (stp - stx)
            continue
        gt = float(gvec @ p)
        if ft < best[1]:
            best = (stp, ft, gvec)
        ftest = f0 + stp * gtest
        if ft <= ftest and abs(gt) <= gtol * (-dg0):
            return LineSearchResult(stp, ft, gvec, True, trial, "converged")
        if stage == 1 and ft <= ftest and gt >= min(ftol, gtol) * dg0:
            stage = 2
        if brackt and (stp <= stmin or stp >= stmax):
            message = "rounding errors prevent progress"
            break
        if brackt and stmax - stmin <= xtol * stmax:
            message = "interval width below xtol"
            break
        if stp == stpmax and ft <= ftest and gt <= gtest:
            message = "step at upper bound"
            break
        if stp == stpmin and (ft > ftest or gt >= gtest):
            message = "step at lower bound"
            break

        if stage == 1 and ft <= fx and ft > ftest:
            fm = ft - stp * gtest
            fxm = fx - stx * gtest
            fym = fy - sty * gtest
            gm = gt - gtest
            gxm = gx - gtest
            gym = gy - gtest
            stx, fxm, gxm, sty, fym, gym, stp, brackt = _cstep(
                stx, fxm, gxm, sty, fym, gym, stp, fm, gm, brackt, stmin, stmax
            )
            fx = fxm + stx * gtest
            fy = fym + sty * gtest
            gx = gxm + gtest
            gy = gym + gtest
        else:
            stx, fx, gx, sty, fy, gy, stp, brackt = _cstep(
                stx, fx, gx, sty, fy, gy, stp, ft, gt, brackt, stmin, stmax
            )

        if brackt:
            if abs(sty - stx) >= 0.66 * width1:
                stp = stx + 0.5 * (sty - stx)
            width1 = width
            width = abs(sty - stx)
            stmin, stmax = min(stx, sty), max(stx, sty)
        else:
            stmin = stp + XTRAPL * (stp - stx)
            stmax = stp + XTRAPU * (stp - stx)
        stp = min(max(stp, stpmin), stpmax)
        if (brackt and (stp <= stmin or stp >= stmax)) or (
            brackt and stmax - stmin <= xtol * stmax
        ):
            stp = stx
    else:
        trial = params.max_trials

    alpha, fbest, gbest = best
    return LineSearchResult(alpha, fbest, gbest, False, trial, message)


def wolfe_holds(f0, dg0, alpha, f_alpha, dg_alpha, c_armijo, c_curv):
    """Check both strong-Wolfe inequalities."""
    return f_alpha <= f0 + c_armijo * alpha * dg0 and abs(dg_alpha) <= c_curv * abs(dg0)


def initial_scaling(gnorm, lo=1e-2, hi=1e4):
    """Scale ``phi`` of the initial inverse Hessian ``phi * I``."""
    if gnorm == 0.0:
        return hi
    return min(max(lo, 1.0 / gnorm), hi)


def first_alpha(f0, gnorm, dg0):
    """Initial trial step ``min(1, 2 (f_low - f0) / dg0)`` with ``f_low = f0 - ||g0||``."""
    return min(1.0, 2.0 * (-gnorm) / dg0)


def bfgsr_minimize(problem, config=None):
    """Dense inverse-BFGS with strong-Wolfe steps (the line-search baseline).

    ``problem`` needs ``f``, ``grad`` and ``x0``. Termination and status
    labels match :func:`ldltr.driver.minimize` so results are comparable.
    """
    config = config or SolverConfig()
    ev = Evaluator(problem.f, problem.grad)
    start = time.perf_counter()
    x = np.array(problem.x0, dtype=float)
    n = x.size
    try:
        f = ev.f(x)
        g = ev.grad(x)
    except (ArithmeticError, ValueError):
        f, g = np.nan, np.full(n, np.nan)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        return SolveReport("evaluator-failure", 0, ev.nf, ev.ng, f, np.nan,
                           time.perf_counter() - start, x)
    f0, gnorm = f, float(np.linalg.norm(g))
    g0norm = gnorm
    H = initial_scaling(gnorm, config.phi_min, config.phi_max) * np.eye(n)
    k = 0
    status = "converged"
    skipped = 0
    while gnorm > config.eps:
        if k >= config.k_max:
            status = "iteration-limit"
            break
        p = -H @ g
        dg0 = float(g @ p)
        if not dg0 < 0.0:
            # lost descent through round-off: restart from the scaled identity
            H = initial_scaling(gnorm, config.phi_min, config.phi_max) * np.eye(n)
            p = -H @ g
            dg0 = float(g @ p)
        alpha0 = first_alpha(f, gnorm, dg0) if k == 0 else 1.0
        params = WolfeParams(config.wolfe_c1, config.wolfe_c2, alpha_init=alpha0,
                             max_trials=config.wolfe_max_trials)
        ls = strong_wolfe_search(ev.f, ev.grad, x, p, f, dg0, params)
        if not ls.success and not ls.f < f:
            status = "linesearch-failure"
            break
        s = ls.alpha * p
        x = x + s
        y = ls.g - g
        f, g = ls.f, ls.g
        gnorm = float(np.linalg.norm(g))
        k += 1
        sy = float(y @ s)
        if sy > config.curvature_threshold * np.linalg.norm(y) * np.linalg.norm(s):
            Hy = H @ y
            rho = 1.0 / sy
            H += ((sy + y @ Hy) * rho * rho) * np.outer(s, s) - rho * (
                np.outer(Hy, s) + np.outer(s, Hy)
            )
        else:
            skipped += 1
    status = classify(status, f, gnorm, f0, g0norm)
    return SolveReport(status, k, ev.nf, ev.ng, f, gnorm, time.perf_counter() - start,
                       x, f0, g0norm, {"skipped_updates": skipped})
