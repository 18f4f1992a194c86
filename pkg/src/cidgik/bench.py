"""Benchmark campaigns: generate, solve, verify, and aggregate with Jeffreys intervals."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import betainc

from .generator import GenerationError, generate
from .iteration import CidgikOptions, cidgik_solve, verify_solution
from .kinematics import RobotModel, load_robot
from .solver import SolverSettings
from .workspace import environment

logger = logging.getLogger("cidgik.bench")


def jeffreys_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Equal-tailed Jeffreys interval for a binomial proportion.

    Endpoints are quantiles of the Beta(s + 1/2, n - s + 1/2) posterior, found
    by a bracketed root-find on the regularized incomplete beta function; the
    lower endpoint is pinned to 0 when s = 0 and the upper to 1 when s = n.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    tail = (1.0 - level) / 2.0
    a = successes + 0.5
    b = trials - successes + 0.5

    def quantile(q: float) -> float:
        return float(brentq(lambda x: betainc(a, b, x) - q, 0.0, 1.0, xtol=1e-10))

    low = 0.0 if successes == 0 else quantile(tail)
    high = 1.0 if successes == trials else quantile(1.0 - tail)
    return low, high


@dataclass(frozen=True)
class InstanceRow:
    seed: int
    status: str
    success: bool
    position_error: float | None
    direction_error: float | None
    max_penetration: float | None
    h_trace: tuple[float, ...]
    iterations: int
    setup_time_s: float
    solve_time_s: float
    theta: tuple[float, ...] | None
    certified_infeasible: bool = False
    error: str | None = None


@dataclass(eq=False)
class BenchmarkReport:
    robot_name: str
    environment: str
    base_seed: int
    rows: list[InstanceRow]
    h_tol: float

    @property
    def trials(self) -> int:
        return len(self.rows)

    @property
    def successes(self) -> int:
        return sum(r.success for r in self.rows)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    def aggregate(self) -> dict:
        low, high = jeffreys_interval(self.successes, self.trials)
        times = [r.solve_time_s for r in self.rows]
        statuses = {}
        for r in self.rows:
            statuses[r.status] = statuses.get(r.status, 0) + 1
        return {
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "jeffreys_95": [low, high],
            "mean_solve_time_s": float(np.mean(times)),
            "stddev_solve_time_s": float(np.std(times)),
            "statuses": statuses,
            "certified_infeasible": sum(r.certified_infeasible for r in self.rows),
        }

    def to_json_dict(self) -> dict:
        return {
            "robot": self.robot_name,
            "environment": self.environment,
            "base_seed": self.base_seed,
            "h_tol": self.h_tol,
            "aggregate": self.aggregate(),
            "rows": [
                {
                    "seed": r.seed,
                    "status": r.status,
                    "success": r.success,
                    "position_error": r.position_error,
                    "direction_error": r.direction_error,
                    "max_penetration": r.max_penetration,
                    "h_trace": [h if np.isfinite(h) else None for h in r.h_trace],
                    "iterations": r.iterations,
                    "setup_time_s": r.setup_time_s,
                    "solve_time_s": r.solve_time_s,
                    "theta": None if r.theta is None else list(r.theta),
                    "certified_infeasible": r.certified_infeasible,
                    "error": r.error,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            [
                "seed",
                "status",
                "success",
                "position_error",
                "direction_error",
                "max_penetration",
                "iterations",
                "setup_time_s",
                "solve_time_s",
                "h_trace",
            ]
        )
        for r in self.rows:
            writer.writerow(
                [
                    r.seed,
                    r.status,
                    int(r.success),
                    r.position_error,
                    r.direction_error,
                    r.max_penetration,
                    r.iterations,
                    r.setup_time_s,
                    r.solve_time_s,
                    "|".join(f"{h:.3e}" for h in r.h_trace),
                ]
            )
        return buf.getvalue()


def solve_one(
    robot: RobotModel,
    environment_name: str,
    seed: int,
    options: CidgikOptions,
    *,
    table_obstacles: int = 100,
) -> InstanceRow:
    """Generate, solve, and verify one instance; failures become rows, not raises."""
    t0 = time.perf_counter()
    try:
        problem = generate(
            robot, environment_name, seed, table_obstacles=table_obstacles
        )
    except GenerationError as e:
        return InstanceRow(
            seed=seed,
            status="generation_error",
            success=False,
            position_error=None,
            direction_error=None,
            max_penetration=None,
            h_trace=(),
            iterations=0,
            setup_time_s=time.perf_counter() - t0,
            solve_time_s=0.0,
            theta=None,
            error=str(e),
        )
    setup = time.perf_counter() - t0
    try:
        result = cidgik_solve(problem.qcqp, options)
        if result.theta is not None:
            workspace = environment(
                environment_name, robot, table_obstacles=table_obstacles
            )
            report = verify_solution(robot, problem.qcqp.goals, workspace, result.theta)
            success = report.success
            row = InstanceRow(
                seed=seed,
                status=result.status,
                success=success,
                position_error=report.position_error,
                direction_error=report.direction_error,
                max_penetration=report.max_penetration,
                h_trace=tuple(result.trace.h_values),
                iterations=result.iterations,
                setup_time_s=setup,
                solve_time_s=result.solve_time,
                theta=tuple(float(t) for t in result.theta),
                certified_infeasible=result.certificate is not None,
            )
        else:
            row = InstanceRow(
                seed=seed,
                status=result.status,
                success=False,
                position_error=None,
                direction_error=None,
                max_penetration=None,
                h_trace=tuple(result.trace.h_values),
                iterations=result.iterations,
                setup_time_s=setup,
                solve_time_s=result.solve_time,
                theta=None,
                certified_infeasible=result.certificate is not None,
            )
    except Exception as e:  # per-instance errors must not abort the campaign
        logger.warning("seed %d failed: %s", seed, e)
        row = InstanceRow(
            seed=seed,
            status="error",
            success=False,
            position_error=None,
            direction_error=None,
            max_penetration=None,
            h_trace=(),
            iterations=0,
            setup_time_s=setup,
            solve_time_s=0.0,
            theta=None,
            error=str(e),
        )
    return row


def _worker(args) -> InstanceRow:
    document, environment_name, seed, options_args, table_obstacles = args
    robot = load_robot(document)
    options = CidgikOptions(
        max_iterations=options_args["max_iterations"],
        h_tol=options_args["h_tol"],
        solver=SolverSettings(**options_args["solver"]),
        first_solve_budget=options_args["first_solve_budget"],
    )
    return solve_one(
        robot, environment_name, seed, options, table_obstacles=table_obstacles
    )


def run_benchmark(
    robot: RobotModel,
    environment_name: str,
    count: int,
    base_seed: int,
    options: CidgikOptions | None = None,
    *,
    jobs: int = 1,
    table_obstacles: int = 100,
    robot_name: str = "robot",
) -> BenchmarkReport:
    """Solve a seeded campaign; per-instance determinism holds for any job count."""
    if count < 1:
        raise ValueError("empty campaign: count must be at least 1")
    options = options or CidgikOptions()
    seeds = [base_seed + i for i in range(count)]
    if jobs <= 1:
        rows = [
            solve_one(
                robot, environment_name, s, options, table_obstacles=table_obstacles
            )
            for s in seeds
        ]
    else:
        options_args = {
            "max_iterations": options.max_iterations,
            "h_tol": options.h_tol,
            "first_solve_budget": options.first_solve_budget,
            "solver": {
                "eps_abs": options.solver.eps_abs,
                "eps_rel": options.solver.eps_rel,
                "max_iters": options.solver.max_iters,
                "scaling": options.solver.scaling,
            },
        }
        work = [
            (robot.document, environment_name, s, options_args, table_obstacles)
            for s in seeds
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_worker, work))
    return BenchmarkReport(
        robot_name=robot_name,
        environment=environment_name,
        base_seed=base_seed,
        rows=rows,
        h_tol=options.h_tol,
    )
