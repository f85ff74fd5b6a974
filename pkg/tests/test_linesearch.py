import numpy as np
import pytest

from ldltr.core import SolverConfig
from ldltr.exceptions import InputError
from ldltr.linesearch import (
    WolfeParams,
    bfgsr_minimize,
    first_alpha,
    strong_wolfe_search,
    wolfe_holds,
)
from ldltr.problems import Problem, make_problem


def _check(f, grad, x, p, params, res):
    g0 = grad(x)
    dg0 = float(g0 @ p)
    assert res.success
    dga = float(grad(x + res.alpha * p) @ p)
    assert wolfe_holds(f(x), dg0, res.alpha, f(x + res.alpha * p), dga,
                       params.c_armijo, params.c_curv)


def test_quadratic_along_descent(rng):
    A = rng.standard_normal((5, 5))
    A = A @ A.T + np.eye(5)
    b = rng.standard_normal(5)
    f = lambda x: 0.5 * x @ A @ x - b @ x  # noqa: E731
    grad = lambda x: A @ x - b  # noqa: E731
    x = rng.standard_normal(5)
    p = -grad(x) * 3.0
    params = WolfeParams()
    res = strong_wolfe_search(f, grad, x, p, f(x), float(grad(x) @ p), params)
    _check(f, grad, x, p, params, res)
    alpha_star = -(grad(x) @ p) / (p @ A @ p)
    assert wolfe_holds(f(x), grad(x) @ p, alpha_star, f(x + alpha_star * p),
                       grad(x + alpha_star * p) @ p, 1e-4, 0.1)


def test_scalar_exact_minimizer():
    f = lambda x: float(x[0] ** 2)  # noqa: E731
    grad = lambda x: 2 * x  # noqa: E731
    x = np.array([1.0])
    res = strong_wolfe_search(f, grad, x, np.array([-1.0]), 1.0, -2.0, WolfeParams(c_curv=0.01))
    assert res.success and res.alpha == pytest.approx(1.0)
    assert res.trials == 1


def test_rosenbrock_steepest_descent():
    p = make_problem("ROSENBROCK", 2)
    x = p.x0
    d = -p.grad(x)
    params = WolfeParams()
    res = strong_wolfe_search(p.f, p.grad, x, d, p.f(x), float(p.grad(x) @ d), params)
    _check(p.f, p.grad, x, d, params, res)


def test_non_descent_rejected():
    with pytest.raises(InputError):
        strong_wolfe_search(lambda x: 0.0, lambda x: x, np.ones(2), np.ones(2), 0.0, 1.0)


def test_params_validation():
    with pytest.raises(InputError):
        WolfeParams(c_armijo=0.5, c_curv=0.4)


def test_failure_returns_best_point():
    # linear decrease with no lower bound: Wolfe curvature never holds
    f = lambda x: float(-x[0])  # noqa: E731
    grad = lambda x: np.array([-1.0])  # noqa: E731
    res = strong_wolfe_search(f, grad, np.zeros(1), np.ones(1), 0.0, -1.0,
                              WolfeParams(max_trials=8, alpha_max=100.0))
    assert not res.success
    assert res.f < 0.0


def test_nonfinite_region_pulls_back():
    f = lambda x: float(x[0] ** 2) if x[0] > -0.5 else np.inf  # noqa: E731
    grad = lambda x: 2 * x  # noqa: E731
    x = np.array([1.0])
    res = strong_wolfe_search(f, grad, x, np.array([-10.0]), 1.0, -20.0)
    assert res.success and np.isfinite(res.f) and res.f < 1.0


def test_first_alpha():
    assert first_alpha(10.0, 1.0, -1.0) == 1.0
    assert first_alpha(10.0, 1.0, -100.0) == pytest.approx(0.02)


def _quad1d():
    return Problem.from_functions(lambda x: 1.5 * (x[0] - 2.0) ** 2,
                                  lambda x: np.array([3.0 * (x[0] - 2.0)]), [10.0])


def test_bfgsr_one_dimensional():
    rep = bfgsr_minimize(_quad1d(), SolverConfig(eps=1e-10))
    assert rep.status == "converged" and rep.iterations <= 2
    assert rep.final_gnorm <= 1e-10


def test_bfgsr_stationary():
    p = Problem.from_functions(lambda x: 0.0, lambda x: np.zeros(2), np.zeros(2))
    rep = bfgsr_minimize(p)
    assert rep.status == "converged" and rep.iterations == 0


def test_bfgsr_rosenbrock():
    p = make_problem("ROSENBROCK", 2)
    rep = bfgsr_minimize(p)
    assert rep.status == "converged"
    assert rep.iterations <= 150
    assert rep.final_f <= 1e-8
    assert rep.function_evals == p.nf and rep.gradient_evals == p.ng


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_bfgsr_linesearch_failure_label():
    # unbounded below: searches fail once steps run away
    p = Problem.from_functions(lambda x: float(-np.exp(x[0])), lambda x: np.array([-np.exp(x[0])]),
                               [0.0])
    rep = bfgsr_minimize(p, SolverConfig(k_max=50))
    assert rep.status == "linesearch-failure"
    assert not rep.solved
