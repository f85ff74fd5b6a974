"""BFGS update of the inverse factors ``H = T diag(G) T'`` by two rank-one corrections."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .exceptions import CurvatureError, UpdateFailureError
from .factors import SQRT_EPS, apply_inverse_factors, rank_one_update


class CurvaturePair(NamedTuple):
    s: np.ndarray
    y: np.ndarray

    @property
    def sy(self) -> float:
        return float(self.y @ self.s)

    def admissible(self, threshold=SQRT_EPS) -> bool:
        """``y's > threshold * ||y|| ||s||``."""
        return self.sy > threshold * np.linalg.norm(self.y) * np.linalg.norm(self.s)


class FactorUpdate(NamedTuple):
    T: np.ndarray
    G: np.ndarray
    status: str  # "updated", "curvature-rejected" or "update-failed"

    @property
    def applied(self) -> bool:
        return self.status == "updated"


def bfgs_coefficients(pair, Hy):
    """Split the BFGS inverse correction into two weighted rank-one terms.

    With ``b1 = (y's + y'Hy) / (y's)^2`` and ``b2 = 1 / y's``, the 2x2
    middle matrix ``[[b1, -b2], [-b2, 0]]`` factors as ``l d l'`` giving::

        alpha1 = b1,            a1 = s + (y's) * alpha2 * Hy
        alpha2 = -b2**2 / b1,   a2 = Hy

    so that ``alpha1 a1 a1' + alpha2 a2 a2'`` equals the BFGS correction.
    """
    sy = pair.sy
    if not sy > 0.0:
        raise CurvatureError(f"y's = {sy:.3e} is not positive")
    yHy = float(pair.y @ Hy)
    # beta2**2 / beta1 simplifies to 1 / (y's + y'Hy); no squares of 1/y's
    with np.errstate(over="ignore", divide="ignore"):
        alpha1 = np.float64(sy + yHy) / sy / sy
        alpha2 = -1.0 / np.float64(sy + yHy)
    if not (np.isfinite(alpha1) and np.isfinite(alpha2)):
        raise UpdateFailureError("BFGS coefficients overflow")
    a1 = pair.s + (sy * alpha2) * Hy
    return float(alpha1), a1, float(alpha2), Hy


def repair_positive(G):
    """Make ``G`` strictly positive in place: absolute values, zeros lifted."""
    np.abs(G, out=G)
    top = G.max() if G.size else 0.0
    floor = SQRT_EPS * top if top > 0.0 else SQRT_EPS
    np.maximum(G, np.where(G == 0.0, floor, 0.0), out=G)
    return G


def bfgs_factor_update(T, G, pair, *, Hy=None, threshold=SQRT_EPS):
    """Apply the BFGS inverse update to ``(T, G)``.

    Returns a :class:`FactorUpdate`. The input arrays are never modified;
    on curvature rejection or update failure the originals are returned.
    """
    if not pair.admissible(threshold):
        return FactorUpdate(T, G, "curvature-rejected")
    if Hy is None:
        Hy = apply_inverse_factors(T, G, pair.y)
    try:
        alpha1, a1, alpha2, a2 = bfgs_coefficients(pair, Hy)
        T_new = np.array(T, dtype=float, order="C", copy=True)
        G_new = np.array(G, dtype=float, copy=True)
        rank_one_update(T_new, G_new, alpha1, a1, inplace=True)
        rank_one_update(T_new, G_new, alpha2, a2, inplace=True)
    except (UpdateFailureError, CurvatureError):
        return FactorUpdate(T, G, "update-failed")
    repair_positive(G_new)
    return FactorUpdate(T_new, G_new, "updated")
