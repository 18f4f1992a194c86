"""Workspace constraints: spheres, planes, auxiliary on-link points, self-collision."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import RobotModel, joint_points

ENVIRONMENT_NAMES = ("free", "octahedron", "cube", "icosahedron", "table")

_TABLE_PLACEMENT_SEED = 0xC1D61  # fixed so every batch shares one table layout


@dataclass(frozen=True, eq=False)
class Sphere:
    """Spherical keep-out (obstacle) or keep-in (free-space ball) region."""

    center: np.ndarray
    radius: float
    sense: str = "keep_out"

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("sphere radius must be strictly positive")
        if self.sense not in ("keep_out", "keep_in"):
            raise ValueError(f"unknown sphere sense {self.sense!r}")


@dataclass(frozen=True, eq=False)
class Plane:
    """Half-space or containment plane: x.n == c ('on') or x.n >= c ('above')."""

    normal: np.ndarray
    offset: float
    relation: str = "above"

    def __post_init__(self):
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-9:
            raise ValueError("plane normal must have unit norm")
        if self.relation not in ("on", "above"):
            raise ValueError(f"unknown plane relation {self.relation!r}")


@dataclass(frozen=True)
class AuxPoint:
    """Extra collision-checked point at fraction alpha along an equality edge."""

    edge: tuple[int, int]
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("aux point interpolation must lie strictly in (0, 1)")


@dataclass(eq=False)
class WorkspaceSpec:
    """Everything the environment imposes beyond the robot's own geometry.

    Plane entries pair a variable vertex index with a Plane; a vertex of None
    applies the plane to every variable point once the instance is assembled.
    """

    spheres: list[Sphere] = field(default_factory=list)
    planes: list[tuple[int | None, Plane]] = field(default_factory=list)
    self_collision: list[tuple[int, int, float]] = field(default_factory=list)
    aux_points: list[AuxPoint] = field(default_factory=list)
    self_collision_eps: float | None = None  # global eps for non-adjacent pairs


def sphere_violation(x: np.ndarray, sphere: Sphere) -> float:
    """Violated amount in squared meters; 0 on the feasible side and boundary."""
    x = np.asarray(x, dtype=float)
    if x.shape != sphere.center.shape:
        raise ValueError("point and sphere dimensions differ")
    sq = float(np.sum((x - sphere.center) ** 2))
    r2 = sphere.radius**2
    if sphere.sense == "keep_out":
        return max(0.0, r2 - sq)
    return max(0.0, sq - r2)


def config_in_collision(robot: RobotModel, theta, spheres) -> bool:
    """True iff any joint point (any joint_points column) violates a keep-out sphere."""
    keep_out = [s for s in spheres if s.sense == "keep_out"]
    if not keep_out:
        return False
    P = joint_points(robot, theta)
    for s in keep_out:
        d2 = np.sum((P - s.center[:, None]) ** 2, axis=0)
        if np.any(d2 < s.radius**2):
            return True
    return False


def add_self_collision(instance, i: int, j: int, eps: float):
    """Append the separation constraint ||x_i - x_j||^2 >= eps; returns a new instance.

    Duplicate (i, j) constraints collapse to the most recent eps.
    """
    if i == j:
        raise ValueError("self-collision constraint needs two distinct vertices")
    if eps <= 0.0:
        raise ValueError("self-collision threshold must be positive")
    nv = instance.num_variables
    if not (0 <= i < nv and 0 <= j < nv):
        raise ValueError("self-collision vertices must be variable points")
    key = (min(i, j), max(i, j))
    kept = [c for c in instance.self_collision if (min(c[0], c[1]), max(c[0], c[1])) != key]
    kept.append((key[0], key[1], float(eps)))
    return dataclasses.replace(instance, self_collision=kept)


def add_aux_point(instance, aux: AuxPoint):
    """Add a collision-checked point tied to the interior of an equality edge.

    The new point y = (1-alpha) x_i + alpha x_j becomes one more variable,
    entering the lifted problem through linear tie constraints and picking up
    every obstacle inequality.  Returns a new instance.
    """
    i, j = aux.edge
    graph = instance.graph
    if not any({e.tail, e.head} == {i, j} for e in graph.edges):
        raise ValueError(f"aux point edge {aux.edge} is not an equality edge")
    nv = graph.num_variables
    if i >= nv and j >= nv:
        raise ValueError("aux point on an anchor-anchor edge would be a constant point")
    return dataclasses.replace(instance, aux_points=list(instance.aux_points) + [aux])


_PHI = (1.0 + math.sqrt(5.0)) / 2.0


def _platonic_vertices(name: str) -> np.ndarray:
    if name == "octahedron":
        v = np.vstack([np.eye(3), -np.eye(3)])
    elif name == "cube":
        v = np.array(
            [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
            dtype=float,
        )
    elif name == "icosahedron":
        v = []
        for a, b in [(1.0, _PHI)]:
            for sa in (-1, 1):
                for sb in (-1, 1):
                    v.append([0.0, sa * a, sb * b])
                    v.append([sa * a, sb * b, 0.0])
                    v.append([sb * b, 0.0, sa * a])
        v = np.array(v)
    else:
        raise ValueError(f"unknown solid {name!r}")
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def environment(
    name: str, robot: RobotModel, *, table_obstacles: int = 100
) -> WorkspaceSpec:
    """Build a named workspace preset scaled to the robot's reach.

    The Platonic presets place keep-out spheres of radius 0.25 * reach at the
    solid's vertices, 0.5 * reach from the base.  The table preset constrains
    every variable point above the z = 0 plane and scatters seeded random
    spheres over it; sphere centers keep clear of a cylinder around the base
    column so the fixed base points stay feasible.
    """
    if name == "free":
        return WorkspaceSpec()
    if name not in ENVIRONMENT_NAMES:
        raise ValueError(f"unknown environment {name!r}")
    if robot.dimension != 3:
        raise ValueError(f"environment {name!r} requires a 3-dimensional robot")
    reach = robot.reach
    if name in ("octahedron", "cube", "icosahedron"):
        spheres = [
            Sphere(center=0.5 * reach * v, radius=0.25 * reach)
            for v in _platonic_vertices(name)
        ]
        return WorkspaceSpec(spheres=spheres)

    # table
    rng = np.random.Generator(np.random.Philox(key=_TABLE_PLACEMENT_SEED))
    radius = 0.03 * reach
    spheres = []
    while len(spheres) < table_obstacles:
        c = rng.uniform(-0.6 * reach, 0.6 * reach, size=3)
        c[2] = rng.uniform(0.1 * reach, 0.6 * reach)
        if np.hypot(c[0], c[1]) < 0.15 * reach:
            continue
        spheres.append(Sphere(center=c, radius=radius))
    plane = Plane(normal=np.array([0.0, 0.0, 1.0]), offset=0.0, relation="above")
    return WorkspaceSpec(spheres=spheres, planes=[(None, plane)])
