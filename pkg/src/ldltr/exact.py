"""Moré-Sorensen Newton iteration for the two-norm trust-region subproblem.

Solves ``min g's + s'Bs/2  s.t. ||s|| <= delta`` with one Cholesky
factorization of ``B + sigma I`` per iteration. Intended for small ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from .exceptions import InputError

EPS = np.finfo(float).eps
SQRT_EPS = np.sqrt(EPS)


@dataclass
class SubproblemResult:
    s: np.ndarray
    sigma: float
    iterations: int
    residual: float
    boundary_gap: float
    converged: bool = True
    factorizations: int = 0
    brackets: list = field(default_factory=list)


def _try_cholesky(B, sigma):
    A = B + sigma * np.eye(B.shape[0])
    try:
        R = cholesky(A, lower=False, check_finite=False)
    except LinAlgError:
        return None
    if not np.all(np.isfinite(R)) or np.any(np.diagonal(R) <= 0.0):
        return None
    return R


def _solve(R, g):
    z = solve_triangular(R, -g, trans="T", check_finite=False)
    return solve_triangular(R, z, check_finite=False)


def _result(B, g, s, sigma, delta, it, converged, nfact, brackets=()):
    residual = float(np.linalg.norm(B @ s + sigma * s + g))
    gap = abs(float(np.linalg.norm(s)) - delta)
    return SubproblemResult(
        s, float(sigma), it, residual, gap, converged, nfact, list(brackets)
    )


def initial_shift(B):
    """Shift that makes ``B + sigma I`` safely positive definite.

    ``max(0, -gershgorin_lower_bound) + sqrt(eps) * ||B||_1``.
    """
    radii = np.sum(np.abs(B), axis=1) - np.abs(np.diagonal(B))
    lower = float(np.min(np.diagonal(B) - radii))
    return max(0.0, -lower) + SQRT_EPS * max(np.linalg.norm(B, 1), 1.0)


def solve_ms(B, g, delta, tol=1e-8, i_max=50):
    """Moré-Sorensen solve of the trust-region subproblem.

    Parameters
    ----------
    B : (n, n) array
        Symmetric model Hessian, possibly indefinite.
    g : (n,) array
    delta : float
        Trust-region radius, ``> 0``.
    tol : float
        Relative boundary-gap tolerance ``| ||s|| - delta | <= tol * delta``.
    i_max : int
        Newton iteration cap.

    Returns
    -------
    SubproblemResult
        ``converged`` is False when ``i_max`` was hit; ``s`` is then the best
        boundary-feasible iterate found.
    """
    B = np.asarray(B, dtype=float)
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if B.shape != (n, n):
        raise InputError("B and g have inconsistent shapes")
    if not (np.all(np.isfinite(B)) and np.all(np.isfinite(g))):
        raise InputError("non-finite subproblem data")
    if not delta > 0.0:
        raise InputError("delta must be positive")

    gnorm = float(np.linalg.norm(g))
    bnorm = float(np.linalg.norm(B, 1))
    nfact = 1
    R = _try_cholesky(B, 0.0)
    if R is not None:
        s = _solve(R, g)
        if np.linalg.norm(s) <= delta:
            return _result(B, g, s, 0.0, delta, 0, True, nfact)
        sigma = 0.0
    else:
        sigma = initial_shift(B)
        for _ in range(30):
            nfact += 1
            R = _try_cholesky(B, sigma)
            if R is not None:
                break
            sigma += max(sigma, SQRT_EPS)
        else:
            raise InputError("could not find a positive definite shift")

    sig_lo = max(0.0, -float(np.min(np.diagonal(B))), gnorm / delta - bnorm)
    sig_hi = gnorm / delta + bnorm
    if sigma > sig_hi:
        sigma = sig_hi
        nfact += 1
        R = _try_cholesky(B, sigma)
    best = None
    s = None
    brackets = [(sig_lo, sig_hi)]

    for it in range(1, i_max + 1):
        if R is None:
            # indefinite trial: raise the lower bracket and bisect
            sig_lo = max(sig_lo, sigma)
            sigma = 0.5 * (sig_lo + sig_hi)
            nfact += 1
            R = _try_cholesky(B, sigma)
            brackets.append((sig_lo, sig_hi))
            continue
        s = _solve(R, g)
        snorm = float(np.linalg.norm(s))
        if snorm <= delta:
            best = (s, sigma)
        if abs(snorm - delta) <= tol * delta:
            return _result(B, g, s, sigma, delta, it, True, nfact, brackets)
        if snorm < delta:
            sig_hi = min(sig_hi, sigma)
        else:
            sig_lo = max(sig_lo, sigma)
        brackets.append((sig_lo, sig_hi))
        q = solve_triangular(R, s, trans="T", check_finite=False)
        qq = float(q @ q)
        step = (snorm / delta) * (snorm - delta) * snorm / qq if qq > 0.0 else np.inf
        trial = sigma + step
        if not (sig_lo < trial < sig_hi):
            trial = 0.5 * (sig_lo + sig_hi)
        if trial == sigma:
            break
        sigma = trial
        nfact += 1
        R = _try_cholesky(B, sigma)

    if best is None:
        # fall back to a boundary-feasible point along the last computed step
        sigma = sig_hi
        R = _try_cholesky(B, sigma)
        s = _solve(R, g)
        if np.linalg.norm(s) > delta:
            s *= delta / np.linalg.norm(s)
        best = (s, sigma)
    s, sigma = best
    return _result(B, g, s, sigma, delta, i_max, False, nfact, brackets)
