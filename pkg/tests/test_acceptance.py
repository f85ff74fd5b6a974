"""Acceptance criteria, one test each, at their stated tolerances.

Every test prints a single ``[criterion N] PASS|FAIL ...`` line; the lines
are repeated in the terminal summary. Run alone with
``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest
from scipy.optimize import brentq

from ldltr.bench import RunRecord, performance_profile, performance_ratios, run_suite
from ldltr.bfgs import CurvaturePair, bfgs_factor_update
from ldltr.cg import cg_solve_shifted
from ldltr.core import NEAR_OPT_FACTOR, SolverConfig, classify
from ldltr.driver import minimize
from ldltr.exact import solve_ms
from ldltr.factors import assemble, column_norms_sq, rank_one_update
from ldltr.problems import Problem, catalog
from ldltr.shift import solve_modified_shift

RESULTS = {}


def report(number, ok, detail):
    line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def _factors(rng, n):
    T = np.tril(rng.standard_normal((n, n))) / np.sqrt(n)
    T[np.diag_indices(n)] = rng.uniform(0.8, 1.5, n)
    return np.ascontiguousarray(T), rng.uniform(0.5, 2.0, n)


def test_criterion_01_factor_update_oracle():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 51))
        L = np.tril(rng.standard_normal((n, n)))
        L[np.diag_indices(n)] = rng.uniform(0.5, 2.0, n)
        D = rng.uniform(0.1, 3.0, n) * rng.choice([-1.0, 1.0], n)
        alpha = rng.standard_normal()
        a = rng.standard_normal(n)
        L2, D2 = rank_one_update(L, D, alpha, a)
        target = assemble(L, D) + alpha * np.outer(a, a)
        worst = max(worst, np.linalg.norm(assemble(L2, D2) - target) / np.linalg.norm(target))
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-10 and elapsed < 10.0,
           f"500 mixed-sign updates: max rel err {worst:.2e} (<= 1e-10), {elapsed:.2f}s (< 10s)")


def _dense_bfgs(H, s, y):
    rho = 1.0 / (y @ s)
    V = np.eye(len(s)) - rho * np.outer(s, y)
    return V @ H @ V.T + rho * np.outer(s, s)


def test_criterion_02_bfgs_equivalence():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    eq_err = sec_err = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 31))
        T, G = _factors(rng, n)
        H = assemble(T, G)
        s = rng.standard_normal(n)
        A = rng.standard_normal((n, n))
        y = (A @ A.T / n + 0.1 * np.eye(n)) @ s
        upd = bfgs_factor_update(T, G, CurvaturePair(s, y))
        Hn = assemble(upd.T, upd.G)
        ref = _dense_bfgs(H, s, y)
        eq_err = max(eq_err, np.linalg.norm(Hn - ref) / np.linalg.norm(ref))
        sec_err = max(sec_err, np.linalg.norm(Hn @ y - s) / np.linalg.norm(s))
    elapsed = time.perf_counter() - start
    report(2, eq_err <= 1e-9 and sec_err <= 1e-9 and elapsed < 10.0,
           f"200 BFGS updates: dense-formula err {eq_err:.2e}, secant err {sec_err:.2e} "
           f"(<= 1e-9), {elapsed:.2f}s (< 10s)")


def _eigen_sigma(B, g, delta):
    lam, U = np.linalg.eigh(B)
    c = U.T @ g

    def phi(sig):
        return np.sqrt(np.sum((c / (lam + sig)) ** 2)) - delta

    lo = max(0.0, -lam[0])
    if lam[0] > 0 and phi(0.0) <= 0:
        return 0.0
    lo += 1e-14 * max(1.0, abs(lo))
    hi = lo + 1.0
    while phi(hi) > 0:
        hi *= 2.0
    return brentq(phi, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)


def test_criterion_03_subproblem_cross_validation(frozen):
    sig_err = res_err = 0.0
    for data in frozen["ms_indefinite_10"]:
        B, g, delta = np.array(data["B"]), np.array(data["g"]), data["delta"]
        ref = data["sigma"]
        # the frozen value is cross-checked by a second, double-precision oracle
        assert abs(_eigen_sigma(B, g, delta) - ref) <= 1e-9 * max(1.0, ref)
        res = solve_ms(B, g, delta)
        sig_err = max(sig_err, abs(res.sigma - ref) / max(ref, 1e-300))
        res_err = max(res_err, np.linalg.norm(B @ res.s + res.sigma * res.s + g))
    rng = np.random.default_rng(3)
    diag_err = 0.0
    for _ in range(100):
        n = 10
        G = rng.uniform(0.1, 5.0, n)
        g = rng.standard_normal(n) * 5.0
        delta = float(rng.uniform(0.05, 0.5))
        a = solve_modified_shift(np.eye(n), G, column_norms_sq(np.eye(n)), g, delta,
                                 tol=1e-14, i_max=100)
        b = solve_ms(np.diag(1.0 / G), g, delta, tol=1e-14, i_max=100)
        diag_err = max(diag_err, abs(a.sigma_plus - b.sigma) / max(1.0, b.sigma))
    ok = sig_err <= 1e-6 and res_err <= 1e-8 and diag_err <= 1e-8
    report(3, ok, f"MS sigma rel err {sig_err:.2e} (<= 1e-6), residual {res_err:.2e} (<= 1e-8); "
                  f"diagonal-B shift vs MS {diag_err:.2e} (<= 1e-8)")


def test_criterion_04_cg_oracle():
    rng = np.random.default_rng(4)
    worst_res = worst_err = 0.0
    for _ in range(100):
        n = 10
        T, G = _factors(rng, n)
        g = rng.standard_normal(n)
        sigma = float(rng.uniform(0.0, 10.0))
        B = np.linalg.inv(assemble(T, G))
        M = B + sigma * np.eye(n)
        ref = np.linalg.solve(M, -g)
        s = cg_solve_shifted(T, G, g, sigma, tol=1e-12, i_cg_max=50).s
        worst_res = max(worst_res, np.linalg.norm(M @ s + g) / np.linalg.norm(g))
        worst_err = max(worst_err, np.linalg.norm(s - ref) / np.linalg.norm(ref))
    report(4, worst_res <= 1e-8 and worst_err <= 1e-8,
           f"100 shifted systems: rel residual {worst_res:.2e}, rel error vs dense "
           f"{worst_err:.2e} (<= 1e-8)")


def test_criterion_05_identity_closed_forms():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 30))
        g = rng.standard_normal(n) * rng.uniform(1.0, 50.0)
        gn = np.linalg.norm(g)
        delta = gn / rng.uniform(1.5, 20.0)
        sigma = gn / delta - 1.0
        s_ref = -delta * g / gn
        ms = solve_ms(np.eye(n), g, delta, tol=1e-14)
        ph = solve_modified_shift(np.eye(n), np.ones(n), np.ones(n), g, delta, sigma0=0.0,
                                  tol=1e-14)
        for sig, s in ((ms.sigma, ms.s), (ph.sigma_plus, ph.s_plus)):
            worst = max(worst, abs(sig - sigma) / max(1.0, sigma),
                        np.abs(s - s_ref).max() / delta)
    report(5, worst <= 1e-12, f"B = I closed forms, both solvers: max rel err {worst:.2e} (<= 1e-12)")


@pytest.fixture(scope="module")
def catalog_runs():
    problems = catalog(1000)
    phase1 = []

    def hook(solver, problem, rep):
        if solver == "ldltr":
            phase1.extend(rep.diagnostics.get("phase1_iterations", []))

    start = time.perf_counter()
    records = run_suite(["ldltr", "bfgsr"], problems, SolverConfig(eps=1e-4, k_max=6000),
                        report_hook=hook)
    return records, phase1, time.perf_counter() - start, len(problems)


@pytest.mark.slow
def test_criterion_06_catalog_robustness(catalog_runs):
    records, _, elapsed, n_prob = catalog_runs
    # strictly ||g|| <= eps; near-optimal runs are not counted here
    solved = {s: sum(r.status == "converged" for r in records if r.solver == s)
              for s in ("ldltr", "bfgsr")}
    frac = {s: solved[s] / n_prob for s in solved}
    failures = sorted(f"{r.solver}:{r.problem}-{r.n}:{r.status}" for r in records
                      if r.status != "converged")
    ok = (n_prob >= 20 and frac["ldltr"] >= 0.90 and frac["bfgsr"] >= 0.85
          and solved["ldltr"] >= solved["bfgsr"] - 1 and elapsed < 600.0)
    report(6, ok, f"{n_prob} problems: ldltr {solved['ldltr']} ({frac['ldltr']:.1%}, >= 90%), "
                  f"bfgsr {solved['bfgsr']} ({frac['bfgsr']:.1%}, >= 85%), "
                  f"suite {elapsed:.0f}s (< 600s); failures {failures or 'none'}")


def _quadratic(n):
    d = np.linspace(1.0, 100.0, n)
    return Problem.from_functions(lambda x: 0.5 * np.dot(d * x, x), lambda x: d * x,
                                  np.ones(n), f"Q{n}")


def _time_per_iteration(n, reps=3, iterations=30):
    best = np.inf
    for _ in range(reps):
        rep = minimize(_quadratic(n), SolverConfig(k_max=iterations, eps=1e-14))
        assert rep.iterations >= 20
        best = min(best, rep.wall_time / rep.iterations)
    return best


@pytest.mark.slow
def test_criterion_07_quadratic_complexity():
    minimize(_quadratic(20))  # compile and warm caches
    t1 = _time_per_iteration(1000)
    t2 = _time_per_iteration(2000)
    ratio = t2 / t1
    report(7, 2.5 <= ratio <= 6.5,
           f"per-iteration time n=2000 / n=1000 = {ratio:.2f} (in [2.5, 6.5]); "
           f"{t1 * 1e3:.1f} ms vs {t2 * 1e3:.1f} ms over 30 iterations")


@pytest.mark.slow
def test_criterion_08_phase_one_iterations(catalog_runs):
    _, phase1, _, _ = catalog_runs
    med = float(np.median(phase1)) if phase1 else np.inf
    report(8, bool(phase1) and med <= 6,
           f"median phase-1 Newton iterations {med:g} over {len(phase1)} solves (<= 6)")


def test_criterion_09_profile_table(frozen):
    ref = frozen["profile_two_by_three"]
    records = [RunRecord(f"P{i}", 10, s, "converged", 1, 1, 1, 0.0, 0.0, t)
               for s, times in ref["times"].items() for i, t in enumerate(times)]
    table = np.array([ref["times"]["A"], ref["times"]["B"]]).T
    ratios = performance_ratios(table)
    taus = [0.49, 0.5, 1.99, 2.0]
    prof = performance_profile(records, "time", taus=taus)
    a = dict(zip(taus, (p.rho for p in prof["A"])))
    b = dict(zip(taus, (p.rho for p in prof["B"])))
    ok = (list(ratios[:, 0]) == ref["ratios"]["A"] and list(ratios[:, 1]) == ref["ratios"]["B"]
          and a[0.5] == ref["rho"]["A"]["0.5"] == 1.0 and a[0.49] == 0.0
          and b[1.99] == ref["rho"]["B"]["1.99"] == 0.0 and b[2.0] == ref["rho"]["B"]["2.0"] == 1.0)
    report(9, ok, f"pi_A = {ratios[:, 0].tolist()}, pi_B = {ratios[:, 1].tolist()}; "
                  f"rho_A(0.5) = {a[0.5]}, rho_B(1.99) = {b[1.99]}, rho_B(2) = {b[2.0]}")


def test_criterion_10_near_optimal_classification(frozen):
    eps_m = np.finfo(float).eps
    factor = eps_m ** (2.0 / 3.0)
    cases = [
        # (status, f_k, gnorm_k, f_0, gnorm_0, expected)
        ("iteration-limit", 1e-12, 1.0, 1.0, 1.0, "near-optimal"),      # f branch
        ("iteration-limit", 1e-10, 1.0, 1.0, 1.0, "iteration-limit"),
        ("radius-collapse", 3.0, 1e-12, 5.0, 1.0, "near-optimal"),      # gradient branch
        ("radius-collapse", 3.0, 1e-10, 5.0, 1.0, "radius-collapse"),
        ("linesearch-failure", 0.5 * factor, 1.0, 1.0, 1.0, "near-optimal"),
        ("linesearch-failure", 2.0 * factor, 2.0 * factor * 10, 1.0, 10.0, "linesearch-failure"),
        ("evaluator-failure", 0.0, 0.0, 1.0, 1.0, "evaluator-failure"),
        ("converged", 1.0, 1e-5, 1.0, 1.0, "converged"),
    ]
    got = [classify(*c[:5]) for c in cases]
    ok = (got == [c[5] for c in cases] and NEAR_OPT_FACTOR == factor
          and abs(factor - frozen["near_optimal_factor"]) <= 1e-14 * factor)
    report(10, ok, f"{sum(g == c[5] for g, c in zip(got, cases))}/{len(cases)} synthetic records "
                   f"classified correctly; eps_M^(2/3) = {factor:.4e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
