"""Command-line surface: solve, generate, and benchmark interdiction instances.

Report rows are tab-separated:
instance, algorithm, status, objective, bound, gap, nodes, cuts,
time_total, time_cutgen, time_lp
"""

from __future__ import annotations

import argparse
import glob as globmod
import sys

from . import benders, defmodels, pathsolver
from .engine import BranchAndCutOptions
from .instances import (
    GeneratorParams,
    InfeasibleParamsError,
    Instance,
    ParseError,
    ValidationError,
    generate,
    load,
    save,
)

ALGORITHMS = ("def", "cdef", "benders", "path")

REPORT_FIELDS = (
    "instance",
    "alg",
    "status",
    "objective",
    "bound",
    "gap",
    "nodes",
    "cuts",
    "time_total",
    "time_cutgen",
    "time_lp",
)


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits 1 on usage errors."""

    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def run_algorithm(alg: str, instance: Instance, options: BranchAndCutOptions, frac_sigma: str):
    if alg == "def":
        return defmodels.solve_def(instance, options)
    if alg == "cdef":
        return defmodels.solve_compact_def(instance, options)
    if alg == "benders":
        return benders.solve_benders(instance, options)
    if alg == "path":
        return pathsolver.solve_path(instance, options, frac_sigma=frac_sigma)
    raise CliError(f"unknown algorithm {alg!r}")


def report_row(instance_name: str, alg: str, result) -> str:
    fields = [
        instance_name,
        alg,
        result.status,
        f"{result.objective:.10g}",
        f"{result.bound:.10g}",
        f"{result.gap:.6g}",
        str(result.nodes),
        str(sum(result.cuts_added.values())),
        f"{result.time_total:.4f}",
        f"{result.time_cutgen:.4f}",
        f"{result.time_lp:.4f}",
    ]
    return "\t".join(fields)


def _emit(lines: list[str], out: str | None):
    text = "\n".join(lines) + ("\n" if lines else "")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def cmd_solve(args) -> int:
    try:
        instance = load(args.instance)
    except (OSError, ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    options = BranchAndCutOptions(gap_tol=args.gap, time_limit=args.time_limit)
    try:
        result = run_algorithm(args.alg, instance, options, args.frac_sigma)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit([report_row(args.instance, args.alg, result)], args.out)
    if result.status == "optimal":
        return 0
    return 2


def cmd_generate(args) -> int:
    params = GeneratorParams(
        rows=args.rows,
        cols=args.cols,
        interdictable_fraction=args.interdictable_fraction,
        q_mode=args.q_mode,
        q_factor=args.q_factor,
        scenario_count=args.scenarios,
        budget=args.budget,
        seed=args.seed,
        destination_count=args.destinations,
    )
    try:
        instance = generate(params)
    except (ValueError, ValidationError, InfeasibleParamsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save(instance, args.out)
    print(args.out)
    return 0


def cmd_bench(args) -> int:
    paths = sorted(globmod.glob(args.instances))
    algs = [a.strip() for a in args.alg.split(",") if a.strip()]
    for a in algs:
        if a not in ALGORITHMS:
            print(f"error: unknown algorithm {a!r}", file=sys.stderr)
            return 1
    budgets = (
        [float(b) for b in args.budgets.split(",")] if args.budgets else [None]
    )
    options = BranchAndCutOptions(gap_tol=args.gap, time_limit=args.time_limit)
    lines = ["\t".join(REPORT_FIELDS)]
    objectives: dict[tuple[str, object], dict[str, float]] = {}
    totals: dict[str, list] = {a: [0.0, 0, 0] for a in algs}  # time sum, solved, unsolved
    disagreements = []
    for path in paths:
        try:
            base = load(path)
        except (OSError, ParseError, ValidationError) as exc:
            lines.append(f"{path}\t-\terror\t{exc}")
            continue
        for budget in budgets:
            instance = (
                base
                if budget is None
                else Instance(base.network, base.scenarios, budget)
            )
            key = (path, budget)
            for alg in algs:
                try:
                    result = run_algorithm(alg, instance, options, args.frac_sigma)
                except Exception as exc:
                    lines.append(f"{path}\t{alg}\terror\t{exc}")
                    totals[alg][2] += 1
                    continue
                lines.append(report_row(path, alg, result))
                if result.status == "optimal":
                    objectives.setdefault(key, {})[alg] = result.objective
                    totals[alg][0] += result.time_total
                    totals[alg][1] += 1
                else:
                    totals[alg][2] += 1
    for key, by_alg in objectives.items():
        values = sorted(by_alg.values())
        tol = 2.0 * args.gap * max(values[-1], 1.0) + 1e-9
        if values[-1] - values[0] > tol:
            disagreements.append((key, by_alg))
    # presentation: mean time over solved runs, unsolved count parenthesized
    for alg in algs:
        time_sum, solved, unsolved = totals[alg]
        mean = time_sum / solved if solved else float("nan")
        lines.append(f"# {alg}\tmean_time_solved={mean:.4f}\tunsolved=({unsolved})")
    for key, by_alg in disagreements:
        lines.append(f"# DISAGREEMENT {key[0]} budget={key[1]}: {by_alg}")
    _emit(lines, args.out)
    if disagreements:
        print("error: cross-algorithm objective disagreement", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="snip", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="run one algorithm on one instance")
    ps.add_argument("--alg", choices=ALGORITHMS, required=True)
    ps.add_argument("--instance", required=True)
    ps.add_argument("--gap", type=float, default=1e-4)
    ps.add_argument("--time-limit", type=float, default=3600.0)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--frac-sigma", choices=("convex", "power", "both"), default="convex")
    ps.add_argument("--out", default=None)
    ps.set_defaults(func=cmd_solve)

    pg = sub.add_parser("generate", help="write a random grid instance")
    pg.add_argument("--rows", type=int, required=True)
    pg.add_argument("--cols", type=int, required=True)
    pg.add_argument("--interdictable-fraction", type=float, default=0.5)
    pg.add_argument("--q-mode", choices=("factor", "zero", "mixed"), default="factor")
    pg.add_argument("--q-factor", type=float, default=0.5)
    pg.add_argument("--scenarios", type=int, default=1)
    pg.add_argument("--budget", type=float, default=1.0)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--destinations", type=int, default=None)
    pg.add_argument("--out", required=True)
    pg.set_defaults(func=cmd_generate)

    pb = sub.add_parser("bench", help="cross-product comparison harness")
    pb.add_argument("--instances", required=True, help="glob over instance files")
    pb.add_argument("--alg", default=",".join(ALGORITHMS), help="comma-separated list")
    pb.add_argument("--budgets", default=None, help="comma-separated budget sweep")
    pb.add_argument("--gap", type=float, default=1e-4)
    pb.add_argument("--time-limit", type=float, default=3600.0)
    pb.add_argument("--frac-sigma", choices=("convex", "power", "both"), default="convex")
    pb.add_argument("--out", default=None)
    pb.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
