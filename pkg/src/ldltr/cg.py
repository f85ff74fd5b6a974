"""Conjugate-gradient solve of the shifted system using the inverse factors (phase 2).

``(B + sigma I) s = -g`` is rewritten as ``(D + sigma T'T) v = h`` with
``h = -T'g`` and ``s = T v``. The operator costs two triangular products
per application and is never formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError, SolveFailureError
from .factors import column_norms_sq, tri_mv, tri_tmv


@dataclass
class CGReport:
    s: np.ndarray
    iterations: int
    relative_residual: float
    negative_curvature: bool = False
    residual_history: list = field(default_factory=list)
    energy_history: list = field(default_factory=list)


class ShiftedSystem:
    """The family ``(D + sigma T'T) v = -T'g`` for varying ``sigma``.

    ``h`` and ``E`` are computed once and shared by every solve, which is
    what makes repeated shifts (shift backtracking) cheap.
    """

    def __init__(self, T, G, g, E=None, precondition=False):
        self.T = T
        G = np.asarray(G, dtype=float)
        if np.any(G <= 0.0):
            raise InputError("G must be strictly positive")
        self.D = 1.0 / G
        self.g = np.asarray(g, dtype=float)
        self.h = -tri_tmv(T, self.g)
        self.E = column_norms_sq(T) if E is None else np.asarray(E, dtype=float)
        self.precondition = precondition

    def operator(self, sigma):
        T, D = self.T, self.D
        if sigma == 0.0:
            return lambda v: D * v
        return lambda v: D * v + sigma * tri_tmv(T, tri_mv(T, v))

    def solve(self, sigma, tol=1e-8, i_cg_max=15, track=False):
        if sigma < 0.0:
            raise InputError("sigma must be nonnegative")
        h = self.h
        hnorm = float(np.linalg.norm(h))
        if hnorm == 0.0:
            return CGReport(np.zeros_like(h), 0, 0.0)
        A = self.operator(sigma)
        diag = self.D + sigma * self.E
        # warm start from the diagonal part; exact when sigma = 0
        v = h / diag
        r = h - A(v)
        minv = (1.0 / diag) if self.precondition else None
        z = r * minv if minv is not None else r
        p = z.copy()
        rz = float(r @ z)
        rnorm = float(np.linalg.norm(r))
        res_hist = [rnorm / hnorm] if track else []
        en_hist = [float((v @ A(v)) - 2.0 * (v @ h))] if track else []
        it = 0
        neg = False
        while rnorm > tol * hnorm and it < i_cg_max:
            Ap = A(p)
            pAp = float(p @ Ap)
            if not np.isfinite(pAp):
                raise SolveFailureError("non-finite operator product")
            if pAp <= 0.0:
                neg = True
                break
            step = rz / pAp
            v = v + step * p
            r = r - step * Ap
            it += 1
            z = r * minv if minv is not None else r
            rz_new = float(r @ z)
            rnorm = float(np.linalg.norm(r))
            if track:
                res_hist.append(rnorm / hnorm)
                en_hist.append(float((v @ A(v)) - 2.0 * (v @ h)))
            if rnorm == 0.0:
                break
            p = z + (rz_new / rz) * p
            rz = rz_new
        s = tri_mv(self.T, v)
        if not np.all(np.isfinite(s)):
            raise SolveFailureError("phase-2 step is not finite")
        return CGReport(s, it, rnorm / hnorm, neg, res_hist, en_hist)


def cg_solve_shifted(T, G, g, sigma, tol=1e-8, i_cg_max=15, *, E=None,
                     precondition=False, track=False):
    """Solve ``(B + sigma I) s = -g`` with ``B^{-1} = T diag(G) T'``.

    See :class:`ShiftedSystem`; this is the one-shot form.
    """
    system = ShiftedSystem(T, G, g, E=E, precondition=precondition)
    return system.solve(sigma, tol=tol, i_cg_max=i_cg_max, track=track)
