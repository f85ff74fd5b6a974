"""Classic smooth unconstrained test problems with analytic gradients.

Every objective is vectorised over numpy arrays so evaluation costs
``O(n)`` (``O(n)`` plus one Householder reflection for the rotated
quadratic). Starting points follow Moré, Garbow & Hillstrom (1981) and
the CUTE/CUTEst conventions where those exist.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import ProblemNotFoundError

EPS = np.finfo(float).eps
DIMENSIONS = (50, 200, 1000)


@dataclass
class Problem:
    name: str
    n: int
    x0: np.ndarray
    fun: Callable
    jac: Callable
    f_star: float | None = None
    nf: int = field(default=0, init=False)
    ng: int = field(default=0, init=False)

    def f(self, x):
        self.nf += 1
        return float(self.fun(np.asarray(x, dtype=float)))

    def grad(self, x):
        self.ng += 1
        return self.jac(np.asarray(x, dtype=float))

    def reset_counters(self):
        self.nf = self.ng = 0

    @property
    def label(self):
        return f"{self.name}-{self.n}"

    @classmethod
    def from_functions(cls, fun, jac, x0, name="custom", f_star=None):
        x0 = np.asarray(x0, dtype=float)
        return cls(name, x0.size, x0, fun, jac, f_star)


# ---------------------------------------------------------------------------
# objective definitions; each builder returns (fun, jac, x0, f_star)


def rosenbrock(n):
    def fun(x):
        xo, xe = x[0::2], x[1::2]
        return np.sum(100.0 * (xe - xo**2) ** 2 + (1.0 - xo) ** 2)

    def jac(x):
        xo, xe = x[0::2], x[1::2]
        t = xe - xo**2
        g = np.empty_like(x)
        g[0::2] = -400.0 * xo * t - 2.0 * (1.0 - xo)
        g[1::2] = 200.0 * t
        return g

    x0 = np.tile([-1.2, 1.0], n // 2)
    return fun, jac, x0, 0.0


def woods(n):
    def fun(x):
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        return np.sum(
            100.0 * (b - a**2) ** 2 + (1.0 - a) ** 2
            + 90.0 * (d - c**2) ** 2 + (1.0 - c) ** 2
            + 10.1 * ((b - 1.0) ** 2 + (d - 1.0) ** 2)
            + 19.8 * (b - 1.0) * (d - 1.0)
        )

    def jac(x):
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        g = np.empty_like(x)
        g[0::4] = -400.0 * a * (b - a**2) - 2.0 * (1.0 - a)
        g[1::4] = 200.0 * (b - a**2) + 20.2 * (b - 1.0) + 19.8 * (d - 1.0)
        g[2::4] = -360.0 * c * (d - c**2) - 2.0 * (1.0 - c)
        g[3::4] = 180.0 * (d - c**2) + 20.2 * (d - 1.0) + 19.8 * (b - 1.0)
        return g

    x0 = np.tile([-3.0, -1.0, -3.0, -1.0], n // 4)
    return fun, jac, x0, 0.0


def fletchcr(n):
    def fun(x):
        r = x[1:] - x[:-1] + 1.0 - x[:-1] ** 2
        return 100.0 * np.sum(r**2)

    def jac(x):
        r = x[1:] - x[:-1] + 1.0 - x[:-1] ** 2
        g = np.zeros_like(x)
        g[1:] += 200.0 * r
        g[:-1] += 200.0 * r * (-1.0 - 2.0 * x[:-1])
        return g

    return fun, jac, np.zeros(n), 0.0


def powell_singular(n):
    def fun(x):
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        return np.sum((a + 10 * b) ** 2 + 5 * (c - d) ** 2 + (b - 2 * c) ** 4
                      + 10 * (a - d) ** 4)

    def jac(x):
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        g = np.empty_like(x)
        t1, t2, t3, t4 = a + 10 * b, c - d, b - 2 * c, a - d
        g[0::4] = 2 * t1 + 40 * t4**3
        g[1::4] = 20 * t1 + 4 * t3**3
        g[2::4] = 10 * t2 - 8 * t3**3
        g[3::4] = -10 * t2 - 40 * t4**3
        return g

    x0 = np.tile([3.0, -1.0, 0.0, 1.0], n // 4)
    return fun, jac, x0, 0.0


def trigonometric(n):
    idx = np.arange(1, n + 1)

    def resid(x):
        return n - np.sum(np.cos(x)) + idx * (1.0 - np.cos(x)) - np.sin(x)

    def fun(x):
        return np.sum(resid(x) ** 2)

    def jac(x):
        r = resid(x)
        # dr_i/dx_j = sin(x_j) + delta_ij (i sin(x_i) - cos(x_i))
        return 2.0 * (np.sin(x) * r.sum() + r * (idx * np.sin(x) - np.cos(x)))

    return fun, jac, np.full(n, 1.0 / n), None


def dixmaana(n):
    # DIXMAANA: alpha=1, beta=0, gamma=delta=0.125, all powers zero; n = 3m.
    m = n // 3

    def fun(x):
        return (1.0 + np.sum(x**2)
                + 0.125 * np.sum(x[:2 * m] ** 2 * x[m:3 * m] ** 4)
                + 0.125 * np.sum(x[:m] * x[2 * m:3 * m]))

    def jac(x):
        g = 2.0 * x
        a, b = x[:2 * m], x[m:3 * m]
        g[:2 * m] += 0.25 * a * b**4
        g[m:3 * m] += 0.5 * a**2 * b**3
        g[:m] += 0.125 * x[2 * m:3 * m]
        g[2 * m:3 * m] += 0.125 * x[:m]
        return g

    return fun, jac, np.full(n, 2.0), 1.0


def _householder(n, seed):
    v = np.random.default_rng(seed).standard_normal(n)
    return v / np.linalg.norm(v)


def illcond_quadratic(n, seed=0, cond=1e6):
    # f = 0.5 (Qx)' diag(lam) (Qx) with Q = I - 2vv' and lam in [1, cond]
    lam = np.logspace(0.0, np.log10(cond), n)
    v = _householder(n, seed)

    def reflect(z):
        return z - 2.0 * v * (v @ z)

    def fun(x):
        z = reflect(x)
        return 0.5 * np.sum(lam * z * z)

    def jac(x):
        return reflect(lam * reflect(x))

    return fun, jac, np.ones(n), 0.0


def diagonal_quadratic(n):
    lam = np.arange(1.0, n + 1.0)

    def fun(x):
        return 0.5 * np.sum(lam * x * x)

    def jac(x):
        return lam * x

    return fun, jac, np.ones(n), 0.0


def beale(n=2):
    c = np.array([1.5, 2.25, 2.625])

    def fun(x):
        p = x[1] ** np.arange(1, 4)
        return float(np.sum((c - x[0] * (1.0 - p)) ** 2))

    def jac(x):
        k = np.arange(1, 4)
        p = x[1] ** k
        r = c - x[0] * (1.0 - p)
        return np.array([np.sum(2 * r * -(1.0 - p)),
                         np.sum(2 * r * x[0] * k * x[1] ** (k - 1))])

    return fun, jac, np.array([1.0, 1.0]), 0.0


def helical_valley(n=3):
    def parts(x):
        theta = np.arctan(x[1] / x[0]) / (2 * np.pi) + (0.5 if x[0] < 0 else 0.0)
        r = np.hypot(x[0], x[1])
        return theta, r

    def fun(x):
        theta, r = parts(x)
        return 100.0 * ((x[2] - 10.0 * theta) ** 2 + (r - 1.0) ** 2) + x[2] ** 2

    def jac(x):
        theta, r = parts(x)
        r2 = x[0] ** 2 + x[1] ** 2
        dth = np.array([-x[1], x[0]]) / (2 * np.pi * r2)
        dr = np.array([x[0], x[1]]) / r
        t1 = x[2] - 10.0 * theta
        g = np.empty(3)
        g[:2] = 200.0 * (t1 * -10.0 * dth + (r - 1.0) * dr)
        g[2] = 200.0 * t1 + 2.0 * x[2]
        return g

    return fun, jac, np.array([-1.0, 0.0, 0.0]), 0.0


def penalty1(n, a=1e-5):
    def fun(x):
        return a * np.sum((x - 1.0) ** 2) + (np.sum(x**2) - 0.25) ** 2

    def jac(x):
        return 2 * a * (x - 1.0) + 4.0 * (np.sum(x**2) - 0.25) * x

    return fun, jac, np.arange(1.0, n + 1.0), None


def variably_dimensioned(n):
    idx = np.arange(1.0, n + 1.0)

    def fun(x):
        t = np.sum(idx * (x - 1.0))
        return np.sum((x - 1.0) ** 2) + t**2 + t**4

    def jac(x):
        t = np.sum(idx * (x - 1.0))
        return 2 * (x - 1.0) + (2 * t + 4 * t**3) * idx

    return fun, jac, 1.0 - idx / n, 0.0


def broyden_tridiagonal(n):
    def resid(x):
        xp = np.concatenate(([0.0], x[:-1]))
        xn = np.concatenate((x[1:], [0.0]))
        return (3.0 - 2.0 * x) * x - xp - 2.0 * xn + 1.0

    def fun(x):
        return np.sum(resid(x) ** 2)

    def jac(x):
        r = resid(x)
        g = 2.0 * r * (3.0 - 4.0 * x)
        g[:-1] -= 2.0 * r[1:]
        g[1:] -= 4.0 * r[:-1]
        return g

    return fun, jac, np.full(n, -1.0), 0.0


def double_well(n):
    # nonconvex: separable quartic wells with a weak coupling, started near
    # the local maximum at the origin where the Hessian is indefinite
    def fun(x):
        return np.sum((x**2 - 1.0) ** 2) + 0.1 * np.sum(x[:-1] * x[1:])

    def jac(x):
        g = 4.0 * x * (x**2 - 1.0)
        g[:-1] += 0.1 * x[1:]
        g[1:] += 0.1 * x[:-1]
        return g

    x0 = 0.1 * np.cos(np.arange(1.0, n + 1.0))
    return fun, jac, x0, None


def tridia(n, alpha=2.0, beta=1.0, gamma=1.0, delta=1.0):
    idx = np.arange(2.0, n + 1.0)

    def fun(x):
        return gamma * (delta * x[0] - 1.0) ** 2 + np.sum(
            idx * (alpha * x[1:] - beta * x[:-1]) ** 2)

    def jac(x):
        r = idx * (alpha * x[1:] - beta * x[:-1])
        g = np.zeros_like(x)
        g[0] = 2 * gamma * delta * (delta * x[0] - 1.0)
        g[1:] += 2 * alpha * r
        g[:-1] -= 2 * beta * r
        return g

    return fun, jac, np.ones(n), 0.0


def arwhead(n):
    def fun(x):
        return np.sum(-4.0 * x[:-1] + 3.0) + np.sum((x[:-1] ** 2 + x[-1] ** 2) ** 2)

    def jac(x):
        t = x[:-1] ** 2 + x[-1] ** 2
        g = np.zeros_like(x)
        g[:-1] = -4.0 + 4.0 * t * x[:-1]
        g[-1] = np.sum(4.0 * t * x[-1])
        return g

    return fun, jac, np.ones(n), 0.0


def engval1(n):
    def fun(x):
        t = x[:-1] ** 2 + x[1:] ** 2
        return np.sum(t**2) + np.sum(-4.0 * x[:-1] + 3.0)

    def jac(x):
        t = x[:-1] ** 2 + x[1:] ** 2
        g = np.zeros_like(x)
        g[:-1] += 4.0 * t * x[:-1] - 4.0
        g[1:] += 4.0 * t * x[1:]
        return g

    return fun, jac, np.full(n, 2.0), None


def dqdrtic(n):
    def fun(x):
        return np.sum(x[:-2] ** 2 + 100.0 * x[1:-1] ** 2 + 100.0 * x[2:] ** 2)

    def jac(x):
        g = np.zeros_like(x)
        g[:-2] += 2.0 * x[:-2]
        g[1:-1] += 200.0 * x[1:-1]
        g[2:] += 200.0 * x[2:]
        return g

    return fun, jac, np.full(n, 3.0), 0.0


def extended_beale(n):
    c = np.array([1.5, 2.25, 2.625])

    def fun(x):
        a, b = x[0::2], x[1::2]
        return np.sum([(c[k] - a * (1.0 - b ** (k + 1))) ** 2 for k in range(3)])

    def jac(x):
        a, b = x[0::2], x[1::2]
        g = np.zeros_like(x)
        for k in range(3):
            p = b ** (k + 1)
            r = c[k] - a * (1.0 - p)
            g[0::2] += -2.0 * r * (1.0 - p)
            g[1::2] += 2.0 * r * a * (k + 1) * b**k
        return g

    return fun, jac, np.tile([1.0, 1.0], n // 2), 0.0


def raydan1(n):
    w = np.arange(1.0, n + 1.0) / 10.0

    def fun(x):
        return np.sum(w * (np.exp(x) - x))

    def jac(x):
        return w * (np.exp(x) - 1.0)

    return fun, jac, np.ones(n), float(np.sum(w))


def extended_tridiagonal2(n):
    # sum (x_i x_{i+1} - 1)^2 + 0.1 (x_i + 1)(x_{i+1} + 1), Andrei's collection
    def fun(x):
        return np.sum((x[:-1] * x[1:] - 1.0) ** 2 + 0.1 * (x[:-1] + 1.0) * (x[1:] + 1.0))

    def jac(x):
        t = x[:-1] * x[1:] - 1.0
        g = np.zeros_like(x)
        g[:-1] += 2.0 * t * x[1:] + 0.1 * (x[1:] + 1.0)
        g[1:] += 2.0 * t * x[:-1] + 0.1 * (x[:-1] + 1.0)
        return g

    return fun, jac, np.ones(n), None


# name -> (builder, dimensions or None for a fixed size, divisor of n)
_REGISTRY = {
    "ROSENBROCK": (rosenbrock, DIMENSIONS, 2),
    "WOODS": (woods, DIMENSIONS, 4),
    "FLETCHCR": (fletchcr, DIMENSIONS, 1),
    "POWELLSG": (powell_singular, DIMENSIONS, 4),
    "TRIGON": (trigonometric, DIMENSIONS, 1),
    "DIXMAANA": (dixmaana, DIMENSIONS, 3),
    "ILLCONDQ": (illcond_quadratic, DIMENSIONS, 1),
    "DIAGQUAD": (diagonal_quadratic, DIMENSIONS, 1),
    "BEALE": (beale, (2,), 1),
    "HELIX": (helical_valley, (3,), 1),
    "PENALTY1": (penalty1, DIMENSIONS, 1),
    "VARDIM": (variably_dimensioned, DIMENSIONS, 1),
    "BROYDNTRI": (broyden_tridiagonal, DIMENSIONS, 1),
    "DBLWELL": (double_well, DIMENSIONS, 1),
    "TRIDIA": (tridia, DIMENSIONS, 1),
    "ARWHEAD": (arwhead, DIMENSIONS, 1),
    "ENGVAL1": (engval1, DIMENSIONS, 1),
    "DQDRTIC": (dqdrtic, DIMENSIONS, 1),
    "EXTBEALE": (extended_beale, DIMENSIONS, 2),
    "RAYDAN1": (raydan1, DIMENSIONS, 1),
    "EXTTRID2": (extended_tridiagonal2, DIMENSIONS, 1),
}


def problem_names():
    return list(_REGISTRY)


def _round_dimension(n, divisor):
    return max(divisor, n - n % divisor)


def make_problem(name, n=None, seed=0):
    """Instantiate one problem by name; ``n`` is rounded down to a valid size."""
    key = name.upper()
    if key not in _REGISTRY:
        raise ProblemNotFoundError(name)
    builder, dims, divisor = _REGISTRY[key]
    if n is None:
        n = dims[0]
    if dims == (2,) or dims == (3,):
        n = dims[0]
    n = _round_dimension(int(n), divisor)
    if builder is illcond_quadratic:
        fun, jac, x0, f_star = builder(n, seed=seed)
    else:
        fun, jac, x0, f_star = builder(n)
    return Problem(key, n, np.asarray(x0, dtype=float), fun, jac, f_star)


def catalog(max_n=1000, seed=0, names=None):
    """All problems, scalable ones at each of 50, 200, 1000 up to ``max_n``.

    Raises
    ------
    ValueError
        If ``max_n < 2``.
    """
    if max_n < 2:
        raise ValueError("max_n must be at least 2")
    out = []
    for name in names or _REGISTRY:
        builder, dims, divisor = _REGISTRY[name.upper()]
        sizes = [d for d in dims if d <= max_n]
        if not sizes and dims is DIMENSIONS:
            sizes = [max_n]
        for n in sizes:
            if n >= divisor:
                out.append(make_problem(name, n, seed=seed))
    return out


def fd_gradient(fun, x, h=None):
    """Central differences with step ``eps**(1/3) * (1 + |x_i|)``."""
    x = np.asarray(x, dtype=float)
    steps = EPS ** (1.0 / 3.0) * (1.0 + np.abs(x)) if h is None else np.full(x.size, h)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = steps[i]
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * steps[i])
    return g


def gradient_check(problem, points):
    """Largest relative component error of the analytic gradient.

    The error of component ``i`` is ``|g_i - fd_i| / max(1, |g_i|, |fd_i|)``
    so components near zero are measured in absolute terms.
    """
    worst = 0.0
    for x in points:
        g = np.asarray(problem.jac(np.asarray(x, dtype=float)), dtype=float)
        fd = fd_gradient(problem.fun, x)
        scale = np.maximum(1.0, np.maximum(np.abs(g), np.abs(fd)))
        worst = max(worst, float(np.max(np.abs(g - fd) / scale)))
    return worst
