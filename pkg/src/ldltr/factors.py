"""Dense triangular/diagonal factors and their rank-one update.

A symmetric matrix is held as ``L @ diag(d) @ L.T`` with ``L`` a dense,
row-major, lower-triangular array and ``d`` a vector. The same storage
serves both the direct factors of ``B`` and the inverse factors
``H = T @ diag(G) @ T.T``; the update kernel does not care which one it is
given.

Triangular products and solves go through level-2 BLAS so they cost
``n**2 / 2`` multiplications each. A C-ordered lower triangle is an
F-ordered upper triangle of the transpose, which lets us call BLAS without
copying.
"""

from __future__ import annotations

from typing import NamedTuple

import numba
import numpy as np
from scipy.linalg import blas

from .exceptions import (
    DegenerateRotationError,
    FactorRecoveryError,
    InputError,
    UpdateFailureError,
)

EPS = np.finfo(float).eps
SQRT_EPS = np.sqrt(EPS)


class GivensRotation(NamedTuple):
    """Plane rotation ``[[c, -s], [s, c]]`` acting on a column pair.

    Applied to the pair ``(a, b)`` it returns ``(c*a - s*b, s*a + c*b)``.
    """

    c: float
    s: float
    j: int = 0

    def apply(self, a, b):
        return self.c * a - self.s * b, self.s * a + self.c * b


def givens_for(column_entry: float, spike_entry: float) -> GivensRotation:
    """Rotation that maps ``(column_entry, spike_entry)`` onto ``(r, 0)``.

    ``c = a / r`` and ``s = -b / r`` with ``r = hypot(a, b)``.

    >>> givens_for(3.0, 4.0)
    GivensRotation(c=0.6, s=-0.8, j=0)
    """
    a = float(column_entry)
    b = float(spike_entry)
    if a == 0.0 and b == 0.0:
        raise DegenerateRotationError("cannot build a rotation from (0, 0)")
    r = np.hypot(a, b)
    return GivensRotation(a / r, -b / r)


# ---------------------------------------------------------------------------
# triangular kernels


def _check_factor(L, name="L"):
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise InputError(f"{name} must be a square matrix, got shape {L.shape}")
    return np.ascontiguousarray(L)


def _check_vector(v, n, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise InputError(f"{name} must have shape ({n},), got {v.shape}")
    return v


def tri_mv(T, x):
    """``T @ x`` for a C-ordered lower-triangular ``T``."""
    return blas.dtrmv(T.T, x, lower=0, trans=1)


def tri_tmv(T, x):
    """``T.T @ x`` for a C-ordered lower-triangular ``T``."""
    return blas.dtrmv(T.T, x, lower=0, trans=0)


def tri_solve(T, b):
    """Solve ``T z = b``."""
    return blas.dtrsv(T.T, b, lower=0, trans=1)


def tri_tsolve(T, b):
    """Solve ``T.T z = b``."""
    return blas.dtrsv(T.T, b, lower=0, trans=0)


def apply_inverse_factors(T, G, g):
    """Return ``T @ (G * (T.T @ g))``, i.e. ``H @ g`` for ``H = T diag(G) T'``."""
    T = _check_factor(T, "T")
    G = _check_vector(G, T.shape[0], "G")
    g = _check_vector(g, T.shape[0], "g")
    return tri_mv(T, G * tri_tmv(T, g))


def apply_direct_factors(T, G, s):
    """Return ``B @ s`` where ``B = (T diag(G) T')^{-1}``.

    Two triangular solves and a diagonal scaling; no inverse is formed.
    """
    return tri_tsolve(T, tri_solve(T, s) / G)


def column_norms_sq(T):
    """Squared two-norms of the columns of ``T`` (the diagonal of ``T'T``)."""
    T = _check_factor(T, "T")
    return np.einsum("ij,ij->j", T, T)


def assemble(L, d):
    """Dense ``L @ diag(d) @ L.T``; test and small-``n`` helper."""
    L = np.asarray(L, dtype=float)
    return (L * d) @ L.T


# ---------------------------------------------------------------------------
# rank-one update


@numba.njit(cache=True)
def _rank_one_kernel(L, d, alpha, a, repair_tol):
    # Row-oriented sweep. Column j of [L | a] is combined with the spike by a
    # 2x2 transform (m11 m12; m21 m22) chosen when row j is reached; rows
    # below j apply it to (L[i, j], w_i). The diagonal of L is left unchanged.
    n = L.shape[0]
    m11 = np.ones(n)
    m12 = np.zeros(n)
    m21 = np.zeros(n)
    m22 = np.ones(n)
    t = alpha
    mults = 0
    rotations = 0
    max_orth_err = 0.0
    repaired = 0
    for i in range(n):
        w = a[i]
        for j in range(i):
            lij = L[i, j]
            L[i, j] = m11[j] * lij + m12[j] * w
            w = m21[j] * lij + m22[j] * w
        mults += 4 * i
        lam = L[i, i]
        di = d[i]
        if w == 0.0 or t == 0.0:
            continue
        if di > 0.0 and t > 0.0:
            # Orthogonal Givens rotation on the square-root scaled columns.
            sd = np.sqrt(di)
            st = np.sqrt(t)
            x = sd * lam
            y = st * w
            r = np.hypot(x, y)
            c = x / r
            s = -y / r
            err = abs(c * c + s * s - 1.0)
            if err > max_orth_err:
                max_orth_err = err
            rotations += 1
            m11[i] = lam * c * sd / r
            m12[i] = -lam * s * st / r
            m21[i] = s * sd / st
            m22[i] = c
            d[i] = (r / lam) ** 2
            mults += 12
        else:
            # Weighted elimination for indefinite weights.
            delta = di * lam * lam
            tp2 = t * w * w
            dbar = delta + tp2
            scale = max(abs(delta), abs(tp2))
            if abs(dbar) < repair_tol * scale:
                dbar = repair_tol * scale if dbar >= 0.0 else -repair_tol * scale
                repaired += 1
            beta = t * w / dbar
            m11[i] = delta / dbar
            m12[i] = lam * beta
            m21[i] = -w / lam
            m22[i] = 1.0
            d[i] = dbar / (lam * lam)
            t = t * delta / dbar
            mults += 12
        if not (np.isfinite(m11[i]) and np.isfinite(m12[i])
                and np.isfinite(m21[i]) and np.isfinite(d[i]) and np.isfinite(t)):
            return mults, rotations, max_orth_err, repaired, False
    return mults, rotations, max_orth_err, repaired, True


class UpdateStats(NamedTuple):
    multiplications: int
    rotations: int
    max_rotation_error: float
    repaired: int


def repair_diagonal(L):
    """Lift near-zero diagonal entries of ``L`` in place.

    Entries with ``|L[j, j]| < sqrt(eps) * max|diag(L)|`` are set to that
    threshold, keeping their sign (``+`` for exact zeros).
    """
    diag = np.diagonal(L)
    big = np.max(np.abs(diag)) if diag.size else 0.0
    thresh = SQRT_EPS * big if big > 0.0 else SQRT_EPS
    bad = np.abs(diag) < thresh
    if np.any(bad):
        idx = np.flatnonzero(bad)
        L[idx, idx] = np.where(diag[idx] < 0.0, -thresh, thresh)
    return int(bad.sum())


def rank_one_update(L, D, alpha, a, *, inplace=False, return_stats=False):
    """Update the factors so that ``L' D' L''  = L D L' + alpha a a'``.

    Parameters
    ----------
    L : (n, n) array
        Lower-triangular, nonsingular.
    D : (n,) array
        Diagonal weights; any signs are allowed.
    alpha : float
        Weight of the rank-one term (negative for a downdate).
    a : (n,) array
    inplace : bool
        Overwrite ``L`` and ``D`` (they must then be C-ordered float arrays).
    return_stats : bool
        Also return an :class:`UpdateStats` with operation counts.

    Returns
    -------
    L_new, D_new[, stats]

    Raises
    ------
    UpdateFailureError
        If the sweep produces non-finite values. With ``inplace=True`` the
        inputs are then left in an undefined state.
    """
    L = _check_factor(L)
    n = L.shape[0]
    D = _check_vector(D, n, "D")
    a = _check_vector(a, n, "a")
    if not (np.all(np.isfinite(a)) and np.isfinite(alpha)):
        raise UpdateFailureError("non-finite update data")
    if np.any(np.diagonal(L) == 0.0):
        raise InputError("L must be nonsingular")
    if not inplace:
        L = L.copy()
        D = D.copy()
    elif not D.flags.c_contiguous:
        raise InputError("in-place update needs a contiguous D")
    stats = UpdateStats(0, 0, 0.0, 0)
    if alpha != 0.0:
        mults, rots, orth, fixed, ok = _rank_one_kernel(L, D, float(alpha), a, SQRT_EPS)
        if not ok:
            raise UpdateFailureError("rank-one update overflowed")
        fixed += repair_diagonal(L)
        stats = UpdateStats(int(mults), int(rots), float(orth), int(fixed))
    if return_stats:
        return L, D, stats
    return L, D


def recover_direct_factors(T, G, n_max=None):
    """Factors of ``B = (T diag(G) T')^{-1}`` as ``(L, D)`` with ``B = L diag(D) L'``.

    ``L = T^{-T}`` rescaled to a unit diagonal, so it is *upper* triangular.
    This costs ``O(n^3)`` and is meant for small problems only.
    """
    T = _check_factor(T, "T")
    n = T.shape[0]
    G = _check_vector(G, n, "G")
    if n_max is not None and n > n_max:
        raise FactorRecoveryError(f"n = {n} exceeds n_max = {n_max}")
    diag = np.diagonal(T)
    if np.any(diag == 0.0) or np.any(G == 0.0):
        raise FactorRecoveryError("singular inverse factors")
    Tinv = blas.dtrsm(1.0, T.T, np.eye(n), lower=0, trans_a=1)
    if not np.all(np.isfinite(Tinv)):
        raise FactorRecoveryError("triangular inverse overflowed")
    # (T^{-T})_{jj} = 1 / T_jj; rescale columns to a unit diagonal.
    L = Tinv.T * diag[np.newaxis, :]
    D = 1.0 / (G * diag**2)
    return L, D
