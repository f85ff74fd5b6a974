import numpy as np
import pytest
from scipy.linalg import cholesky

from conftest import random_factors
from ldltr.bfgs import (
    CurvaturePair,
    bfgs_coefficients,
    bfgs_factor_update,
    repair_positive,
)
from ldltr.exceptions import CurvatureError
from ldltr.factors import assemble


def dense_bfgs(H, s, y):
    rho = 1.0 / (y @ s)
    V = np.eye(len(s)) - rho * np.outer(s, y)
    return V @ H @ V.T + rho * np.outer(s, s)


def _pair(rng, n, H):
    s = rng.standard_normal(n)
    A = rng.standard_normal((n, n))
    y = (A @ A.T + np.eye(n)) @ s  # y's > 0
    return CurvaturePair(s, y)


def test_fixed_point_identity(rng):
    s = rng.standard_normal(4)
    a1c, a1, a2c, a2 = bfgs_coefficients(CurvaturePair(s, s), s)
    corr = a1c * np.outer(a1, a1) + a2c * np.outer(a2, a2)
    assert np.abs(corr).max() <= 1e-14 * (s @ s)
    upd = bfgs_factor_update(np.eye(4), np.ones(4), CurvaturePair(s, s))
    assert np.abs(assemble(upd.T, upd.G) - np.eye(4)).max() <= 1e-12


@pytest.mark.parametrize("h", [0.1, 1.0, 7.0])
def test_scalar_secant(h):
    upd = bfgs_factor_update(np.eye(1), np.array([h]), CurvaturePair(np.array([1.0]), np.array([2.0])))
    assert assemble(upd.T, upd.G)[0, 0] == pytest.approx(0.5, rel=1e-14)


def test_coefficients_against_dense(rng):
    n = 5
    T, G = random_factors(rng, n)
    H = assemble(T, G)
    pair = _pair(rng, n, H)
    a1c, a1, a2c, a2 = bfgs_coefficients(pair, H @ pair.y)
    corr = a1c * np.outer(a1, a1) + a2c * np.outer(a2, a2)
    ref = dense_bfgs(H, pair.s, pair.y) - H
    assert np.linalg.norm(corr - ref) <= 1e-11 * np.linalg.norm(ref)


def test_factor_update_equivalence_and_secant(rng):
    for _ in range(50):
        n = int(rng.integers(2, 31))
        T, G = random_factors(rng, n)
        H = assemble(T, G)
        pair = _pair(rng, n, H)
        upd = bfgs_factor_update(T, G, pair)
        assert upd.applied
        Hn = assemble(upd.T, upd.G)
        ref = dense_bfgs(H, pair.s, pair.y)
        assert np.linalg.norm(Hn - ref) <= 1e-9 * np.linalg.norm(ref)
        assert np.linalg.norm(Hn @ pair.y - pair.s) <= 1e-9 * np.linalg.norm(pair.s)
        assert np.all(upd.G > 0.0)
        cholesky(0.5 * (Hn + Hn.T))
        assert np.all(np.triu(upd.T, 1) == 0.0)


def test_negative_curvature_rejected(rng):
    T, G = random_factors(rng, 3)
    s = np.array([1.0, 0.0, 0.0])
    y = np.array([-1.0, 0.0, 0.0])
    upd = bfgs_factor_update(T, G, CurvaturePair(s, y))
    assert upd.status == "curvature-rejected" and not upd.applied
    assert upd.T is T and upd.G is G
    with pytest.raises(CurvatureError):
        bfgs_coefficients(CurvaturePair(s, y), y)


def test_threshold_rejects_tiny_curvature():
    s = np.array([1.0, 0.0])
    y = np.array([1e-12, 1.0])
    pair = CurvaturePair(s, y)
    assert pair.sy > 0.0
    assert not pair.admissible()
    assert bfgs_factor_update(np.eye(2), np.ones(2), pair).status == "curvature-rejected"


def test_inputs_not_modified(rng):
    T, G = random_factors(rng, 6)
    T0, G0 = T.copy(), G.copy()
    bfgs_factor_update(T, G, _pair(rng, 6, assemble(T, G)))
    np.testing.assert_array_equal(T, T0)
    np.testing.assert_array_equal(G, G0)


def test_repair_positive():
    G = np.array([-2.0, 0.0, 3.0])
    repair_positive(G)
    assert np.all(G > 0.0)
    np.testing.assert_allclose(G[[0, 2]], [2.0, 3.0])
