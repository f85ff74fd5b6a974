"""Factorization-free estimate of the trust-region shift (phase 1).

With ``B = L diag(D) L'`` and ``L = T^{-T}``,
``B + sigma I = L (D + sigma T'T) L'``. Replacing ``T'T`` by its diagonal
``E`` makes every shifted system diagonal between two triangular
products, so a Newton iteration on ``1/||s(sigma)|| - 1/delta`` costs
``O(n^2)`` per step and needs no refactorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError
from .factors import SQRT_EPS, tri_mv, tri_tmv


@dataclass
class ShiftResult:
    s_plus: np.ndarray
    sigma_plus: float
    iterations: int
    boundary_gap: float
    converged: bool = True
    bisections: int = 0


def initial_modified_shift(D, E):
    """Zero when ``D > 0``; otherwise the smallest shift making ``D + sigma E > 0``."""
    if np.all(D > 0.0):
        return 0.0
    return float(np.max(-D / E)) + SQRT_EPS


def solve_modified_shift(T, G, E, g, delta, sigma0=None, tol=1e-4, i_max=10):
    """Newton iteration for the modified shift ``sigma+`` and step ``s+``.

    Each iterate solves ``L (D + sigma E) L' s = -g`` as
    ``h = -T'g``, ``w = h / (D + sigma E)``, ``s = T w``; the derivative
    ``q = ds/dsigma = T (-(E w) / (D + sigma E))`` then gives the update
    ``sigma <- sigma - ||s||^2 / (s'q) * (||s|| - delta) / delta``.
    A bracket ``[lo, hi]`` on the root is kept and a Newton step that
    leaves it (or a zero ``s'q``) is replaced by bisection.

    Parameters
    ----------
    T : (n, n) array
        Lower-triangular inverse factor.
    G : (n,) array
        Inverse diagonal, strictly positive.
    E : (n,) array
        ``diag(T'T)``, strictly positive.
    g : (n,) array
    delta : float
    sigma0 : float, optional
        Starting shift; defaults to :func:`initial_modified_shift`.
    tol : float
        Relative boundary-gap tolerance.
    i_max : int

    Returns
    -------
    ShiftResult
    """
    G = np.asarray(G, dtype=float)
    E = np.asarray(E, dtype=float)
    g = np.asarray(g, dtype=float)
    if np.any(G <= 0.0):
        raise InputError("G must be strictly positive")
    if np.any(E <= 0.0):
        raise InputError("E must be strictly positive")
    if not delta > 0.0:
        raise InputError("delta must be positive")
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(G))):
        raise InputError("non-finite phase-1 data")

    D = 1.0 / G
    h = -tri_tmv(T, g)
    lo = 0.0
    # ||s|| <= ||T||_F ||h|| / min(D + sigma E) and ||T||_F^2 = sum(E).
    hi = np.sqrt(E.sum()) * np.linalg.norm(h) / (delta * E.min())
    sigma = initial_modified_shift(D, E) if sigma0 is None else max(float(sigma0), 0.0)
    sigma = min(sigma, hi)
    bisections = 0
    s = None
    s_sigma = sigma
    gap = np.inf

    for it in range(1, i_max + 1):
        denom = D + sigma * E
        w = h / denom
        s = tri_mv(T, w)
        s_sigma = sigma
        snorm = float(np.linalg.norm(s))
        gap = abs(snorm - delta)
        if sigma == 0.0 and snorm <= delta:
            return ShiftResult(s, 0.0, it, gap, True, bisections)
        if gap <= tol * delta:
            return ShiftResult(s, sigma, it, gap, True, bisections)
        if snorm > delta:
            lo = max(lo, sigma)
        else:
            hi = min(hi, sigma)
        q = tri_mv(T, -(E * w) / denom)
        sq = float(s @ q)
        if sq != 0.0:
            trial = sigma - (snorm * snorm / sq) * (snorm - delta) / delta
        else:
            trial = np.nan
        trial = max(trial, 0.0)
        if not (lo <= trial <= hi) or not np.isfinite(trial) or trial == sigma:
            trial = 0.5 * (lo + hi)
            bisections += 1
        sigma = trial

    # report the shift that produced the returned step, not the pending trial
    return ShiftResult(s, s_sigma, i_max, gap, False, bisections)
