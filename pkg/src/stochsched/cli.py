"""Command line: ``stochsched {solve,exact,gen,bench}``.

Exit codes: 0 success, 1 usage or validation error, 2 baseline-only
result, 3 oracle budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from fractions import Fraction
from pathlib import Path

from ._numeric import as_fraction
from .generate import Q_DISTS, SIZE_DISTS, generate_instance
from .model import DomainError, ValidationError
from .oracle import BudgetExceeded, OracleBudget, exact_solve
from .rounding import check_epsilon
from .schemes import Budgets, solve
from .serialize import (
    cost_out,
    dumps,
    instance_to_dict,
    load_instance,
    objective_from_name,
    report_dict,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DEGRADED = 2
EXIT_BUDGET = 3

BENCH_COLUMNS = [
    "instance",
    "objective",
    "epsilon",
    "scheme_cost",
    "baseline_cost",
    "oracle_cost",
    "ratio",
    "time_ms",
    "diagnostic",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 means "degraded" here
    def error(self, message):
        raise UsageError(message)


def _epsilon(text: str) -> Fraction:
    try:
        return check_epsilon(as_fraction(text), 5)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"--epsilon: {exc}") from None


def _objective(args):
    if args.objective == "lp" and args.p is None:
        raise ValidationError("--objective lp requires --p")
    return objective_from_name(args.objective, args.p if args.objective == "lp" else None)


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _add_objective(p: argparse.ArgumentParser) -> None:
    p.add_argument("--objective", required=True, choices=["makespan", "santa", "lp"])
    p.add_argument("--p", help="norm exponent (integer or num/den), required for lp")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stochsched", description="Two-stage scheduling with an unknown machine count.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ps = sub.add_parser("solve", help="run the approximation scheme")
    ps.add_argument("--instance", required=True)
    _add_objective(ps)
    ps.add_argument("--epsilon", default="1/5", help="1/E with integer E >= 5")
    ps.add_argument("--budget-nodes", type=int, default=10**6, help="search nodes per feasibility program")
    ps.add_argument("--threads", type=int, default=1, help="accepted for compatibility; guesses run in order")
    ps.add_argument("--no-timing", action="store_true", help="omit elapsed_ms so equal runs give equal files")
    ps.add_argument("--out")

    pe = sub.add_parser("exact", help="brute-force optimum (small instances)")
    pe.add_argument("--instance", required=True)
    _add_objective(pe)
    pe.add_argument("--max-jobs", type=int, default=OracleBudget.max_jobs)
    pe.add_argument("--max-bags", type=int, default=OracleBudget.max_bags)
    pe.add_argument("--no-timing", action="store_true")
    pe.add_argument("--out")

    pg = sub.add_parser("gen", help="generate a random instance")
    pg.add_argument("--n", type=int, required=True)
    pg.add_argument("--m", type=int, required=True)
    pg.add_argument("--seed", type=int, required=True)
    pg.add_argument("--dist", default="uniform", choices=list(SIZE_DISTS))
    pg.add_argument("--qdist", default="uniform", help=f"{', '.join(Q_DISTS)} or point:K")
    pg.add_argument("--name")
    pg.add_argument("--out")

    pb = sub.add_parser("bench", help="scheme vs. baseline vs. oracle over a directory")
    pb.add_argument("--dir", required=True)
    pb.add_argument("--objectives", default="makespan,santa,lp", help="comma separated")
    pb.add_argument("--p", default="2", help="norm exponent for lp")
    pb.add_argument("--epsilon", default="1/5")
    pb.add_argument("--budget-nodes", type=int, default=10**6)
    pb.add_argument("--no-oracle", action="store_true")
    pb.add_argument("--out")
    return parser


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    objective = _objective(args)
    eps = _epsilon(args.epsilon)
    if args.budget_nodes < 1 or args.threads < 1:
        raise ValidationError("--budget-nodes and --threads must be positive")
    report = solve(instance, objective, eps, Budgets(ip_nodes=args.budget_nodes))
    data = report.to_dict(include_timing=not args.no_timing)
    data["diagnostics"]["threads"] = args.threads
    _write(dumps(data), args.out)
    return EXIT_DEGRADED if report.degraded else EXIT_OK


def cmd_exact(args) -> int:
    instance = load_instance(args.instance)
    objective = _objective(args)
    started = time.perf_counter()
    try:
        budget = OracleBudget(max_jobs=args.max_jobs, max_bags=args.max_bags)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    try:
        solution, cost = exact_solve(instance, objective, budget)
    except BudgetExceeded as exc:
        print(f"stochsched exact: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    elapsed = None if args.no_timing else (time.perf_counter() - started) * 1000.0
    data = report_dict(instance, objective, None, "exact", solution, cost, {}, elapsed)
    _write(dumps(data), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    instance = generate_instance(args.n, args.m, args.seed, args.dist, args.qdist, args.name)
    _write(dumps(instance_to_dict(instance)), args.out)
    return EXIT_OK


def _bench_row(path: Path, name: str, objective, eps, budgets, oracle: bool) -> dict:
    row = dict.fromkeys(BENCH_COLUMNS, "")
    row.update(instance=path.name, objective=name, epsilon=str(eps))
    try:
        instance = load_instance(path)
        started = time.perf_counter()
        report = solve(instance, objective, eps, budgets)
        row["time_ms"] = f"{(time.perf_counter() - started) * 1000.0:.1f}"
        row["scheme_cost"] = cost_out(report.cost)
        row["baseline_cost"] = cost_out(report.baseline_cost)
        notes = ["baseline-only"] if report.degraded else []
        if oracle:
            try:
                _, opt = exact_solve(instance, objective)
                report.oracle_cost = opt
                row["oracle_cost"] = cost_out(opt)
                ratio = report.ratio
                row["ratio"] = "" if ratio is None else repr(ratio)
            except BudgetExceeded as exc:
                notes.append(f"oracle: {exc}")
        row["diagnostic"] = "; ".join(notes)
    except (ValidationError, DomainError, ValueError, OSError) as exc:
        row["diagnostic"] = f"error: {exc}"
    return row


def cmd_bench(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise ValidationError(f"{directory} is not a directory")
    eps = _epsilon(args.epsilon)
    names = [s.strip() for s in args.objectives.split(",") if s.strip()]
    objectives = []
    for name in names:
        label = f"lp{args.p}" if name == "lp" else name
        objectives.append((label, objective_from_name(name, args.p if name == "lp" else None)))
    budgets = Budgets(ip_nodes=args.budget_nodes)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for path in sorted(directory.glob("*.json")):
            for label, objective in objectives:
                writer.writerow(_bench_row(path, label, objective, eps, budgets, not args.no_oracle))
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "exact": cmd_exact, "gen": cmd_gen, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"stochsched: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, DomainError, ValueError, OSError) as exc:
        print(f"stochsched {getattr(args, 'command', '')}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
