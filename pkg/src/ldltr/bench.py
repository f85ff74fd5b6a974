"""Benchmark harness: run solvers over problems, classify outcomes, build performance profiles."""

from __future__ import annotations

import csv
import logging
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .core import SOLVED, STATUSES, SolverConfig, classify
from .driver import minimize, ms_minimize
from .exceptions import InputError
from .linesearch import bfgsr_minimize
from .problems import make_problem

log = logging.getLogger(__name__)

SOLVERS = {"ldltr": minimize, "bfgsr": bfgsr_minimize, "ms": ms_minimize}
RUNS_HEADER = (
    "problem", "n", "solver", "status", "iterations", "fevals", "gevals",
    "final_f", "final_gnorm", "wall_time_s",
)
METRICS = {"time": "wall_time_s", "iters": "iterations", "fevals": "fevals"}
TAU_POINTS = 512


@dataclass(frozen=True)
class RunRecord:
    problem: str
    n: int
    solver: str
    status: str
    iterations: int
    fevals: int
    gevals: int
    final_f: float
    final_gnorm: float
    wall_time_s: float

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if not self.wall_time_s >= 0.0:
            raise ValueError("wall time must be nonnegative")

    @property
    def solved(self):
        return self.status in SOLVED

    @property
    def key(self):
        return (self.problem, self.n)


@dataclass(frozen=True)
class ProfilePoint:
    tau: float
    rho: float


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records(records, path, *, append=False):
    path = Path(path)
    new = not append or not path.exists()
    with open(path, "a" if append else "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new:
            writer.writerow(RUNS_HEADER)
        for rec in records:
            writer.writerow([_fmt(v) for v in astuple(rec)])


def read_records(path):
    casts = {f.name: f.type for f in fields(RunRecord)}
    conv = {"int": int, "float": float, "str": str}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RUNS_HEADER:
            raise InputError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            out.append(RunRecord(**{k: conv[casts[k]](v) for k, v in row.items()}))
    return out


def run_one(solver, problem, config, report_hook=None):
    """Solve one problem; any exception becomes an evaluator-failure record."""
    fn = SOLVERS[solver]
    problem.reset_counters()
    start = time.perf_counter()
    try:
        rep = fn(problem, config)
    except Exception as exc:  # noqa: BLE001 - a failing run must not stop the suite
        log.warning("%s on %s raised %r", solver, problem.label, exc)
        return RunRecord(problem.name, problem.n, solver, "evaluator-failure",
                         0, problem.nf, problem.ng, math.nan, math.nan,
                         time.perf_counter() - start)
    if report_hook is not None:
        report_hook(solver, problem, rep)
    status = classify(rep.status, rep.final_f, rep.final_gnorm, rep.f0, rep.g0norm)
    return RunRecord(problem.name, problem.n, solver, status, int(rep.iterations),
                     int(rep.function_evals), int(rep.gradient_evals),
                     float(rep.final_f), float(rep.final_gnorm), float(rep.wall_time))


def _run_spec(args):
    solver, name, n, seed, config = args
    return run_one(solver, make_problem(name, n, seed=seed), config)


def run_suite(solvers, problems, config=None, *, jobs=1, out=None, seed=0, report_hook=None):
    """Run every solver on every problem once.

    Parameters
    ----------
    solvers : list of str
        Ids from ``SOLVERS``.
    problems : list of Problem
    config : SolverConfig, optional
    jobs : int
        Worker processes; each pair gets its own freshly built problem,
        so with ``jobs > 1`` only catalog problems can be used.
    out : path, optional
        ``runs.csv`` to append to as records arrive.
    report_hook : callable, optional
        ``report_hook(solver, problem, report)`` with the full
        :class:`SolveReport` of every run; serial runs only.

    Returns
    -------
    list of RunRecord
        Ordered by problem, then solver, whatever the completion order.
    """
    solvers = list(solvers)
    problems = list(problems)
    if not solvers:
        raise InputError("no solvers given")
    if not problems:
        raise InputError("no problems given")
    unknown = [s for s in solvers if s not in SOLVERS]
    if unknown:
        raise InputError(f"unknown solvers: {unknown}")
    config = config or SolverConfig()
    if jobs > 1 and report_hook is not None:
        raise InputError("report_hook needs jobs=1")
    if out is not None:
        write_records([], out)

    pairs = [(s, p) for p in problems for s in solvers]
    records = [None] * len(pairs)
    if jobs > 1:
        specs = [(s, p.name, p.n, seed, config) for s, p in pairs]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, rec in enumerate(pool.map(_run_spec, specs)):
                records[i] = rec
                if out is not None:
                    write_records([rec], out, append=True)
    else:
        for i, (s, p) in enumerate(pairs):
            records[i] = run_one(s, p, config, report_hook)
            if out is not None:
                write_records([records[i]], out, append=True)
    return records


def _metric_table(records, metric):
    if metric not in METRICS:
        raise InputError(f"metric must be one of {sorted(METRICS)}")
    attr = METRICS[metric]
    solvers = sorted({r.solver for r in records})
    keys = sorted({r.key for r in records})
    table = np.full((len(keys), len(solvers)), np.inf)
    row = {k: i for i, k in enumerate(keys)}
    col = {s: j for j, s in enumerate(solvers)}
    for r in records:
        if r.solved:
            table[row[r.key], col[r.solver]] = float(getattr(r, attr))
    return solvers, keys, table


def performance_ratios(table):
    """Extended ratios ``t[p, s] / min_{i != s} t[p, i]``.

    Failures (``inf``) give ``inf``; ``0 / 0`` is taken as 1 and
    ``t / 0`` with ``t > 0`` as ``inf``. With one column the classical
    ratio against the column itself is used.
    """
    table = np.asarray(table, dtype=float)
    n_p, n_s = table.shape
    ratios = np.empty_like(table)
    for s in range(n_s):
        if n_s == 1:
            ref = table[:, 0]
        else:
            ref = np.min(np.delete(table, s, axis=1), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = table[:, s] / ref
        both_zero = (table[:, s] == 0.0) & (ref == 0.0)
        r[both_zero] = 1.0
        r[np.isinf(table[:, s])] = np.inf
        # other solvers all failed: any finite value is best possible
        r[np.isinf(ref) & np.isfinite(table[:, s])] = 0.0 if n_s > 1 else 1.0
        ratios[:, s] = r
    return ratios


def tau_grid(ratios, points=TAU_POINTS):
    finite = ratios[np.isfinite(ratios) & (ratios > 0.0)]
    if finite.size == 0:
        return np.array([1.0])
    lo, hi = finite.min() / 2.0, finite.max() * 2.0
    return np.geomspace(lo, hi, points)


def performance_profile(records, metric="time", taus=None):
    """Per-solver profile ``rho_s(tau) = #{p : pi[p, s] <= tau} / n_p``.

    Parameters
    ----------
    records : list of RunRecord
    metric : {"time", "iters", "fevals"}
    taus : array_like, optional
        Evaluation points; default is a log grid spanning
        ``[min pi / 2, 2 max finite pi]``.

    Returns
    -------
    dict
        ``solver -> list of ProfilePoint``.
    """
    solvers, _, table = _metric_table(records, metric)
    if len(solvers) == 1:
        warnings.warn("one solver only: using the classical profile ratio", stacklevel=2)
    ratios = performance_ratios(table)
    taus = tau_grid(ratios) if taus is None else np.asarray(taus, dtype=float)
    n_p = table.shape[0]
    out = {}
    for j, s in enumerate(solvers):
        col = np.sort(ratios[:, j])
        counts = np.searchsorted(col, taus, side="right")
        out[s] = [ProfilePoint(float(t), float(c) / n_p) for t, c in zip(taus, counts)]
    return out


def write_profile(profiles, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("solver", "tau", "rho"))
        for solver, points in profiles.items():
            for pt in points:
                writer.writerow((solver, repr(pt.tau), repr(pt.rho)))


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def profile_svg(profiles, metric, width=640, height=420):
    """Step-curve chart on a log tau axis with a dotted line at ``tau = 1``."""
    taus = [pt.tau for pts in profiles.values() for pt in pts]
    lo, hi = math.log10(min(taus + [0.5])), math.log10(max(taus + [2.0]))
    if hi - lo < 1e-12:
        hi = lo + 1.0
    m = 50
    w, h = width - 2 * m, height - 2 * m

    def px(t):
        return m + w * (math.log10(t) - lo) / (hi - lo)

    def py(r):
        return m + h * (1.0 - r)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{m}" y="{m}" width="{w}" height="{h}" fill="none" stroke="black"/>',
        f'<line x1="{px(1.0):.2f}" y1="{m}" x2="{px(1.0):.2f}" y2="{m + h}" '
        'stroke="gray" stroke-dasharray="2,3"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle">tau ({metric})</text>',
        f'<text x="14" y="{height / 2}" transform="rotate(-90 14 {height / 2})" '
        'text-anchor="middle">rho</text>',
    ]
    for e in range(math.ceil(lo), math.floor(hi) + 1):
        parts.append(f'<text x="{px(10.0 ** e):.2f}" y="{m + h + 16}" '
                     f'text-anchor="middle" font-size="11">1e{e}</text>')
    for r in (0.0, 0.5, 1.0):
        parts.append(f'<text x="{m - 6}" y="{py(r) + 4:.2f}" text-anchor="end" '
                     f'font-size="11">{r:g}</text>')
    for i, (solver, pts) in enumerate(profiles.items()):
        color = _COLORS[i % len(_COLORS)]
        xy = []
        prev = None
        for pt in pts:
            if prev is not None:
                xy.append(f"{px(pt.tau):.2f},{py(prev):.2f}")
            xy.append(f"{px(pt.tau):.2f},{py(pt.rho):.2f}")
            prev = pt.rho
        parts.append(f'<polyline fill="none" stroke="{color}" points="{" ".join(xy)}"/>')
        parts.append(f'<text x="{m + 10}" y="{m + 18 + 16 * i}" fill="{color}">{solver}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit(records, profiles, out_dir, metric=None):
    """Write ``runs.csv`` and, for a metric, ``profile_<metric>.csv`` and ``.svg``."""
    out_dir = Path(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if records is not None:
        write_records(records, out_dir / "runs.csv")
        paths.append(out_dir / "runs.csv")
    if profiles is not None:
        if metric is None:
            raise InputError("metric is required to write a profile")
        csv_path = out_dir / f"profile_{metric}.csv"
        svg_path = out_dir / f"profile_{metric}.svg"
        write_profile(profiles, csv_path)
        svg_path.write_text(profile_svg(profiles, metric))
        paths += [csv_path, svg_path]
    return paths


def solved_counts(records):
    counts = {}
    for r in records:
        counts.setdefault(r.solver, 0)
        counts[r.solver] += r.solved
    return counts
