"""``bench`` command line: run the catalog, build performance profiles, list problems."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import METRICS, SOLVERS, emit, performance_profile, read_records, run_suite
from .core import SolverConfig
from .exceptions import InputError
from .problems import catalog, problem_names

EXIT_OK, EXIT_USAGE, EXIT_FAILURES = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _solver_list(text):
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in SOLVERS]
    if not names or bad:
        raise argparse.ArgumentTypeError(
            f"solvers must be a comma list drawn from {sorted(SOLVERS)}")
    return names


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"{text} is not positive")
        return value
    return parse


def build_parser():
    parser = _Parser(prog="bench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="solve every catalog problem with each solver")
    run.add_argument("--solvers", type=_solver_list, default=["ldltr", "bfgsr"])
    run.add_argument("--max-n", type=int, default=1000)
    run.add_argument("--eps", type=_positive(float), default=1e-4)
    run.add_argument("--kmax", type=_positive(int), default=6000)
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--jobs", type=_positive(int), default=1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--problems", help="comma list restricting the catalog")

    prof = sub.add_parser("profile", help="performance profile from a runs.csv directory")
    prof.add_argument("--metric", choices=sorted(METRICS), default="time")
    prof.add_argument("--in", dest="in_dir", type=Path, required=True)

    sub.add_parser("list-problems", help="print the catalog")
    return parser


def _cmd_run(args):
    if args.max_n < 2:
        raise InputError("--max-n must be at least 2")
    names = None
    if args.problems:
        names = [s.strip().upper() for s in args.problems.split(",") if s.strip()]
        unknown = sorted(set(names) - set(problem_names()))
        if unknown:
            raise InputError(f"unknown problems: {unknown}")
    config = SolverConfig(eps=args.eps, k_max=args.kmax)
    problems = catalog(args.max_n, seed=args.seed, names=names)
    args.out.mkdir(parents=True, exist_ok=True)
    records = run_suite(args.solvers, problems, config, jobs=args.jobs,
                        out=args.out / "runs.csv", seed=args.seed)
    emit(records, None, args.out)
    failed = 0
    for solver in args.solvers:
        mine = [r for r in records if r.solver == solver]
        solved = sum(r.solved for r in mine)
        failed += len(mine) - solved
        print(f"{solver}: solved {solved}/{len(mine)}")
    return EXIT_FAILURES if failed else EXIT_OK


def _cmd_profile(args):
    path = args.in_dir / "runs.csv"
    if not path.is_file():
        raise InputError(f"{path} not found")
    records = read_records(path)
    if not records:
        raise InputError(f"{path} holds no records")
    profiles = performance_profile(records, args.metric)
    for p in emit(None, profiles, args.in_dir, metric=args.metric):
        print(p)
    return EXIT_OK


def _cmd_list(args):
    for p in catalog(1000):
        print(f"{p.name:12s} {p.n:6d}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "profile": _cmd_profile, "list-problems": _cmd_list}
    try:
        return handler[args.command](args)
    except InputError as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
