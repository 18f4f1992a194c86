"""Command-line interface: solve single problems, run campaigns, generate, export.

Exit codes for `solve`: 0 verified success, 1 verified failure, 2 infeasible,
3 input or schema error.  Set CIDGIK_LOG to error, info, or debug to control
logging verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .bench import run_benchmark
from .generator import GenerationError, generate
from .iteration import CidgikOptions, cidgik_solve, verify_solution
from .kinematics import RobotError, load_robot
from .lifting import lift
from .problemio import ProblemFormatError, load_problem, save_generated
from .solver import SolverSettings, export_sdpa
from .workspace import ENVIRONMENT_NAMES, WorkspaceSpec

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _configure_logging() -> None:
    level = os.environ.get("CIDGIK_LOG", "error").lower()
    logging.basicConfig(level=_LOG_LEVELS.get(level, logging.ERROR))


def _solver_settings(args) -> SolverSettings:
    return SolverSettings(
        eps_abs=args.eps,
        eps_rel=args.eps,
        max_iters=args.solver_iters,
    )


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-iter", type=int, default=10, help="convex iteration cap")
    parser.add_argument("--h-tol", type=float, default=1e-6, help="excess-rank threshold")
    parser.add_argument("--eps", type=float, default=1e-7, help="SDP solver tolerance")
    parser.add_argument(
        "--solver-iters", type=int, default=50000, help="SDP solver iteration cap"
    )


def cmd_solve(args) -> int:
    try:
        qcqp = load_problem(args.problem)
    except (OSError, ProblemFormatError, RobotError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3

    if args.solver == "export-only":
        text = export_sdpa(lift(qcqp))
        out = Path(args.out) if args.out else Path(args.problem).with_suffix(".dat-s")
        out.write_text(text)
        print(f"wrote {out}")
        return 0

    options = CidgikOptions(
        max_iterations=args.max_iter, h_tol=args.h_tol, solver=_solver_settings(args)
    )
    result = cidgik_solve(qcqp, options)
    payload = result.to_json_dict()
    success = False
    if result.theta is not None:
        workspace = WorkspaceSpec(spheres=list(qcqp.spheres), planes=list(qcqp.planes))
        report = verify_solution(qcqp.robot, qcqp.goals, workspace, result.theta)
        success = report.success
    payload["verified"] = success
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    h = result.h if result.h is not None else float("nan")
    print(
        f"{result.status}: h={h:.2e} iterations={result.iterations} "
        f"verified={'yes' if success else 'no'}"
    )
    if result.status == "infeasible":
        return 2
    return 0 if success else 1


def cmd_bench(args) -> int:
    try:
        robot = load_robot(Path(args.robot).read_text())
    except (OSError, RobotError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    options = CidgikOptions(
        max_iterations=args.max_iter, h_tol=args.h_tol, solver=_solver_settings(args)
    )
    report = run_benchmark(
        robot,
        args.env,
        args.n,
        args.seed,
        options,
        jobs=args.jobs,
        table_obstacles=args.table_obstacles,
        robot_name=Path(args.robot).stem,
    )
    agg = report.aggregate()
    low, high = agg["jeffreys_95"]
    print(
        f"{args.env}: {agg['successes']}/{agg['trials']} solved "
        f"({100 * agg['success_rate']:.1f}%, 95% Jeffreys [{100 * low:.1f}, {100 * high:.1f}]%), "
        f"mean solve {agg['mean_solve_time_s']:.2f}s"
    )
    if args.out:
        text = report.to_csv() if args.csv else report.to_json()
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    elif args.csv:
        print(report.to_csv())
    return 0


def cmd_gen(args) -> int:
    try:
        robot = load_robot(Path(args.robot).read_text())
        problem = generate(
            robot, args.env, args.seed, table_obstacles=args.table_obstacles
        )
    except (OSError, RobotError, GenerationError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    sidecar = save_generated(args.out, problem)
    print(f"wrote {args.out} (ground truth: {sidecar})")
    return 0


def cmd_export_sdpa(args) -> int:
    try:
        qcqp = load_problem(args.problem)
    except (OSError, ProblemFormatError, RobotError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    Path(args.out).write_text(export_sdpa(lift(qcqp)))
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cidgik",
        description="Distance-geometric inverse kinematics via rank-driven SDPs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one problem file")
    p_solve.add_argument("problem", help="problem JSON path")
    _add_solver_flags(p_solve)
    p_solve.add_argument("--out", help="write the solution JSON here")
    p_solve.add_argument(
        "--solver",
        choices=["builtin", "export-only"],
        default="builtin",
        help="solve with the built-in method or just export SDPA data",
    )
    p_solve.set_defaults(func=cmd_solve)

    p_bench = sub.add_parser("bench", help="run a seeded benchmark campaign")
    p_bench.add_argument("--robot", required=True, help="robot JSON path")
    p_bench.add_argument("--env", required=True, choices=ENVIRONMENT_NAMES)
    p_bench.add_argument("--n", required=True, type=int, help="instance count")
    p_bench.add_argument("--seed", required=True, type=int)
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_bench.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")
    p_bench.add_argument("--out", help="report path")
    p_bench.add_argument("--table-obstacles", type=int, default=100)
    _add_solver_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_gen = sub.add_parser("gen", help="generate one feasible problem file")
    p_gen.add_argument("--robot", required=True)
    p_gen.add_argument("--env", required=True, choices=ENVIRONMENT_NAMES)
    p_gen.add_argument("--seed", required=True, type=int)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--table-obstacles", type=int, default=100)
    p_gen.set_defaults(func=cmd_gen)

    p_export = sub.add_parser("export-sdpa", help="export a problem as sparse SDPA")
    p_export.add_argument("problem")
    p_export.add_argument("--out", required=True)
    p_export.set_defaults(func=cmd_export_sdpa)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
