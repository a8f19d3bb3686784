"""Command-line entry point.

Exit status: 0 on success, 2 when no feasible path exists, 1 on any error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .geo import EARTH_RADIUS_KM, GeoPoint, project
from .geometry import InvalidInputError
from .model import is_model_feasible
from .oracle import grid_oracle
from .report import emit_report, fmt, read_segments_csv, render_text
from .scenario import load_scenario
from .solver import Mode, PathSolution, PlanReport, SolverSettings, plan
from .nlp import dominant_pattern
from .validate import CONTINUOUS, PINNED, validate

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="csintercept",
                                 description="Shortest CS interception paths around circular obstacles.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve a scenario and write a report")
    p.add_argument("scenario", help="scenario JSON file or bundled fixture name")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.BOTH.value)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--multistart", type=int, default=32, help="Newton starts per pattern")
    p.add_argument("--workers", type=int, default=1, help="threads for pattern solves")
    p.add_argument("--out", type=Path, help="directory for segments.csv, summary.csv, path.svg, report.txt")

    v = sub.add_parser("validate", help="replay a segments.csv against a scenario")
    v.add_argument("scenario")
    v.add_argument("solution_csv", type=Path)
    v.add_argument("--dt", type=float, default=None)
    v.add_argument("--replay", choices=[PINNED, CONTINUOUS], default=PINNED)

    o = sub.add_parser("oracle", help="brute-force grid search over arc lengths")
    o.add_argument("scenario")
    o.add_argument("--resolution", type=int, default=128)

    g = sub.add_parser("project", help="planar coordinates of a latitude/longitude")
    g.add_argument("lat", help="decimal degrees or DMS, e.g. 22°44'15.66\"N")
    g.add_argument("lon")
    g.add_argument("--radius", type=float, default=EARTH_RADIUS_KM)
    return ap


def _print_solution(sol: PathSolution) -> None:
    print(f"pattern    {sol.pattern}")
    print(f"f          {fmt(sol.objective)}")
    print(f"intercept  ({fmt(sol.intercept[0])}, {fmt(sol.intercept[1])})")
    print(f"time       {fmt(sol.total_time)}")
    print("lengths    " + " ".join(fmt(v) for v in sol.lengths))


def _cmd_plan(args) -> int:
    config = load_scenario(args.scenario)
    settings = SolverSettings(seed=args.seed, mode=Mode(args.mode),
                              multistart_count=args.multistart)
    report: PlanReport = plan(config, settings, workers=args.workers)
    validation = validate(config, report.best) if report.best is not None else None
    if args.out is not None:
        files = emit_report(report, validation, args.out, config)
        print(f"wrote {', '.join(str(p) for p in files.values())}")
    if report.best is None:
        print("INFEASIBLE: no pattern converged to a nonnegative solution")
        return EXIT_INFEASIBLE
    _print_solution(report.best)
    if validation is not None:
        print(f"miss       {validation.miss_distance:.3e}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = load_scenario(args.scenario)
    lengths = read_segments_csv(args.solution_csv)
    if lengths.size != config.size:
        raise InvalidInputError(
            f"{args.solution_csv}: {lengths.size} segments, scenario needs {config.size}")
    sol = PathSolution.from_lengths(config, dominant_pattern(config, lengths), lengths)
    report = validate(config, sol, dt=args.dt, mode=args.replay)
    text = render_text(PlanReport(sol, (sol,), (), config=config), report)
    print(text, end="")
    # six-decimal CSV values satisfy the model only to rounding accuracy
    print(f"model feasible at 1e-6: {is_model_feasible(config, lengths, tol=1e-6)}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    config = load_scenario(args.scenario)
    sol = grid_oracle(config, args.resolution)
    if sol is None:
        print("INFEASIBLE: the grid found no solution")
        return EXIT_INFEASIBLE
    _print_solution(sol)
    return EXIT_OK


def _cmd_project(args) -> int:
    x, y = project(GeoPoint(args.lat, args.lon, args.radius))
    print(f"{fmt(x)} {fmt(y)}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"plan": _cmd_plan, "validate": _cmd_validate,
               "oracle": _cmd_oracle, "project": _cmd_project}[args.command]
    try:
        return handler(args)
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
