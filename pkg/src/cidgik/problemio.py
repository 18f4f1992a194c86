"""Problem and solution JSON serialization.

A problem file bundles the robot description (inline document or a path),
end-effector goals, and workspace constraints::

    {"robot": {...} | "path.json",
     "goals": [{"ee": 0, "position": [...], "direction": [...]?}, ...],
     "obstacles": [{"center": [...], "radius": r, "sense": "keep_out"?}, ...],
     "planes": [{"vertex": v, "normal": [...], "offset": c, "relation": "on"|"above"}, ...],
     "self_collision_eps": eps?}

A global self_collision_eps applies the separation inequality to every pair
of variable points not already linked by an equality edge.  Serialization is
deterministic (sorted keys) so identical problems produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .generator import GeneratedProblem
from .graph import Goal, QcqpInstance, assemble_qcqp
from .kinematics import RobotModel, load_robot
from .workspace import Plane, Sphere, WorkspaceSpec


class ProblemFormatError(ValueError):
    """Malformed problem JSON."""


def problem_to_dict(
    robot: RobotModel, goals, workspace: WorkspaceSpec | None = None
) -> dict:
    if robot.document is None:
        raise ValueError("robot carries no source document to embed")
    workspace = workspace or WorkspaceSpec()
    out = {
        "robot": robot.document,
        "goals": [
            {
                "ee": g.end_effector,
                "position": [float(v) for v in g.position],
                **(
                    {"direction": [float(v) for v in g.direction]}
                    if g.direction is not None
                    else {}
                ),
            }
            for g in goals
        ],
        "obstacles": [
            {
                "center": [float(v) for v in s.center],
                "radius": float(s.radius),
                "sense": s.sense,
            }
            for s in workspace.spheres
        ],
        "planes": [
            {
                "vertex": vertex,
                "normal": [float(v) for v in p.normal],
                "offset": float(p.offset),
                "relation": p.relation,
            }
            for vertex, p in workspace.planes
        ],
    }
    if workspace.self_collision_eps is not None:
        out["self_collision_eps"] = float(workspace.self_collision_eps)
    return out


def dumps_problem(robot: RobotModel, goals, workspace=None) -> str:
    return json.dumps(problem_to_dict(robot, goals, workspace), sort_keys=True, indent=2)


def save_problem(path, robot: RobotModel, goals, workspace=None) -> None:
    Path(path).write_text(dumps_problem(robot, goals, workspace))


def save_generated(path, problem: GeneratedProblem) -> Path:
    """Write the problem JSON plus a ground-truth sidecar; returns the sidecar path."""
    path = Path(path)
    qcqp = problem.qcqp
    workspace = WorkspaceSpec(
        spheres=list(qcqp.spheres),
        planes=[(v, p) for v, p in qcqp.planes],
    )
    save_problem(path, qcqp.robot, qcqp.goals, workspace)
    sidecar = path.with_suffix(".truth.json")
    sidecar.write_text(
        json.dumps(
            {
                "seed": problem.seed,
                "environment": problem.environment,
                "theta": [float(t) for t in problem.ground_truth],
            },
            sort_keys=True,
            indent=2,
        )
    )
    return sidecar


def parse_problem(text: str, *, base_dir: Path | None = None) -> QcqpInstance:
    """Parse problem JSON into an assembled feasibility instance."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemFormatError(f"problem file is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem document must be a JSON object")

    robot_field = doc.get("robot")
    if isinstance(robot_field, str):
        robot_path = Path(robot_field)
        if base_dir is not None and not robot_path.is_absolute():
            robot_path = base_dir / robot_path
        robot = load_robot(robot_path.read_text())
    elif isinstance(robot_field, dict):
        robot = load_robot(robot_field)
    else:
        raise ProblemFormatError("'robot' must be a document object or a path string")

    goals = []
    for g in doc.get("goals", []):
        direction = g.get("direction")
        goals.append(
            Goal(
                end_effector=int(g["ee"]),
                position=np.asarray(g["position"], dtype=float),
                direction=None if direction is None else np.asarray(direction, dtype=float),
            )
        )
    spheres = [
        Sphere(
            center=np.asarray(s["center"], dtype=float),
            radius=float(s["radius"]),
            sense=s.get("sense", "keep_out"),
        )
        for s in doc.get("obstacles", [])
    ]
    planes = [
        (
            p.get("vertex"),
            Plane(
                normal=np.asarray(p["normal"], dtype=float),
                offset=float(p["offset"]),
                relation=p.get("relation", "above"),
            ),
        )
        for p in doc.get("planes", [])
    ]
    workspace = WorkspaceSpec(
        spheres=spheres,
        planes=planes,
        self_collision_eps=doc.get("self_collision_eps"),
    )
    return assemble_qcqp(robot, goals, workspace)


def load_problem(path) -> QcqpInstance:
    path = Path(path)
    return parse_problem(path.read_text(), base_dir=path.parent)
