"""Weighted directed acyclic distance graph and the feasibility QCQP it induces.

Vertices are the variable points of unanchored joints followed by anchors
(fixed base points plus goal-defining points); edges carry the exact squared
distances the kinematic structure enforces.  Together with the workspace
constraints this is the full quadratic feasibility program the SDP relaxes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .kinematics import (
    RobotModel,
    Pose,
    joint_points,
    structural_pairs,
)
from .workspace import AuxPoint, Plane, Sphere, WorkspaceSpec

MERGE_TOL = 1e-9


class GraphError(ValueError):
    """Raised when a distance graph cannot be assembled."""


class Edge(NamedTuple):
    tail: int
    head: int
    weight: float  # squared distance, meters^2


@dataclass(frozen=True, eq=False)
class Goal:
    """Target for one end effector: a position and optionally a unit direction."""

    end_effector: int
    position: np.ndarray
    direction: np.ndarray | None = None


@dataclass(eq=False)
class DistanceGraph:
    dim: int
    num_variables: int
    anchors: np.ndarray  # (d, m) anchor positions
    edges: list[Edge]  # tail < head, vertex ids: variables then anchors
    variable_labels: tuple[tuple, ...]
    anchor_labels: tuple[tuple, ...]
    merged: dict = field(default_factory=dict)  # dropped label -> representative label

    @property
    def num_anchors(self) -> int:
        return self.anchors.shape[1]

    def vertex_position(self, v: int, X: np.ndarray) -> np.ndarray:
        if v < self.num_variables:
            return X[:, v]
        return self.anchors[:, v - self.num_variables]


@dataclass(eq=False)
class QcqpInstance:
    """A full feasibility instance: graph equalities plus workspace constraints.

    Auxiliary points extend the variable set beyond the graph's: variable k
    for k >= graph.num_variables is aux_points[k - graph.num_variables].
    """

    graph: DistanceGraph
    spheres: list[Sphere] = field(default_factory=list)
    planes: list[tuple[int, Plane]] = field(default_factory=list)
    self_collision: list[tuple[int, int, float]] = field(default_factory=list)
    aux_points: list[AuxPoint] = field(default_factory=list)
    robot: RobotModel | None = None
    goals: list[Goal] = field(default_factory=list)

    @property
    def num_variables(self) -> int:
        return self.graph.num_variables + len(self.aux_points)

    @property
    def dim(self) -> int:
        return self.graph.dim

    def constraint_counts(self) -> dict[str, int]:
        return {
            "equalities": len(self.graph.edges),
            "obstacle_inequalities": self.num_variables * len(self.spheres),
            "self_collision": len(self.self_collision),
            "planes": len(self.planes),
        }


def build_graph(robot: RobotModel, goals: list[Goal]) -> DistanceGraph:
    """Assemble the distance graph for a robot and its end-effector goals.

    Variable vertices are the points of unanchored joints; anchors are all
    points of anchored joints plus, per goal, the target position and (for
    pose goals) the point one unit along the target direction.  Edge weights
    come straight from the zero-configuration structural distances.  Points
    that coincide at zero configuration (possible with intersecting axes) are
    merged, and zero-length edges dropped.
    """
    if not goals:
        raise GraphError("at least one goal is required")
    layout = robot.layout
    if layout.num_variables == 0:
        raise GraphError("robot has no unanchored joints; nothing to solve for")
    d = robot.dimension

    goal_by_ee: dict[int, Goal] = {}
    for g in goals:
        if not 0 <= g.end_effector < len(robot.end_effectors):
            raise GraphError(f"goal for unknown end-effector {g.end_effector}")
        if g.end_effector in goal_by_ee:
            raise GraphError(f"duplicate goal for end-effector {g.end_effector}")
        pos = np.asarray(g.position, dtype=float)
        if pos.shape != (d,):
            raise GraphError(f"goal position must have dimension {d}")
        if g.direction is not None:
            u = np.asarray(g.direction, dtype=float)
            if u.shape != (d,) or abs(np.linalg.norm(u) - 1.0) > 1e-9:
                raise GraphError("goal direction must be a unit vector")
        goal_by_ee[g.end_effector] = g

    # Zero-configuration positions give merge geometry and edge weights.
    P0 = joint_points(robot, np.zeros(len(robot.joints)))
    col = layout.index

    def anchor_position(c) -> np.ndarray | None:
        if c[0] in ("p", "q"):
            return P0[:, col[c]]
        _, k, kind = c
        g = goal_by_ee.get(k)
        if g is None:
            return None
        if kind == "pos":
            return np.asarray(g.position, dtype=float)
        if g.direction is None:
            return None
        return np.asarray(g.position, dtype=float) + np.asarray(g.direction, dtype=float)

    variable_cols = list(layout.columns[: layout.num_variables])
    anchor_cols = []
    for c in layout.columns[layout.num_variables :]:
        if anchor_position(c) is not None:
            anchor_cols.append(c)

    # Union-find over coincident structural pairs (merged points stay merged
    # at every configuration because they are rigidly linked on a shared axis).
    parent: dict[tuple, tuple] = {}

    def find(c):
        while parent.get(c, c) != c:
            parent[c] = parent.get(parent[c], parent[c])
            c = parent[c]
        return c

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra == rb:
            return
        # Prefer anchors as representatives; otherwise the earlier column.
        a_anchor, b_anchor = ra in anchor_set, rb in anchor_set
        if a_anchor and not b_anchor:
            parent[rb] = ra
        elif b_anchor and not a_anchor:
            parent[ra] = rb
        elif col.get(ra, 0) <= col.get(rb, 0):
            parent[rb] = ra
        else:
            parent[ra] = rb

    anchor_set = set(anchor_cols)
    usable = set(variable_cols) | anchor_set
    pairs = []
    for a, b in structural_pairs(robot):
        if a in usable and b in usable:
            pairs.append((a, b))
    from .kinematics import nominal_distances

    nominal = nominal_distances(robot)
    for a, b in pairs:
        if a in anchor_set and b in anchor_set:
            continue
        if nominal[(a, b)] < MERGE_TOL**2:
            union(a, b)

    # Final vertex numbering: surviving variables, then anchors.
    variables = [c for c in variable_cols if find(c) == c]
    vid: dict[tuple, int] = {c: i for i, c in enumerate(variables)}
    anchors = [c for c in anchor_cols]
    m = len(anchors)
    anchor_mat = np.empty((d, m))
    for i, c in enumerate(anchors):
        anchor_mat[:, i] = anchor_position(c)
        vid[c] = len(variables) + i

    def vertex(c) -> int:
        return vid[find(c)]

    edges: dict[tuple[int, int], float] = {}
    for a, b in pairs:
        if a in anchor_set and b in anchor_set:
            continue
        w = nominal[(a, b)]
        u, v = vertex(a), vertex(b)
        if u == v:
            continue  # zero-length edge collapsed by a merge
        key = (min(u, v), max(u, v))
        if key in edges and abs(edges[key] - w) <= 1e-12 * max(1.0, w):
            continue
        edges[key] = w

    edge_list = [Edge(t, h, w) for (t, h), w in sorted(edges.items())]

    merged = {c: find(c) for c in variable_cols if find(c) != c}
    graph = DistanceGraph(
        dim=d,
        num_variables=len(variables),
        anchors=anchor_mat,
        edges=edge_list,
        variable_labels=tuple(variables),
        anchor_labels=tuple(anchors),
        merged=merged,
    )
    _check_graph(graph)
    return graph


def _check_graph(graph: DistanceGraph) -> None:
    if graph.num_anchors < 2:
        raise GraphError("need at least two anchors (base plus a goal)")
    for e in graph.edges:
        if not np.isfinite(e.weight) or e.weight < 0.0:
            raise GraphError(f"edge {e} has invalid weight")
        if not e.tail < e.head:
            raise GraphError(f"edge {e} is not oriented low-to-high")
    # Every variable must reach an anchor through the (undirected) edge set.
    nv = graph.num_variables
    adj = [[] for _ in range(nv + graph.num_anchors)]
    for e in graph.edges:
        adj[e.tail].append(e.head)
        adj[e.head].append(e.tail)
    seen = set(range(nv, nv + graph.num_anchors))
    stack = list(seen)
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    missing = [graph.variable_labels[v] for v in range(nv) if v not in seen]
    if missing:
        raise GraphError(f"variable vertices not connected to any anchor: {missing}")


def incidence_matrix(graph: DistanceGraph) -> np.ndarray:
    """|V| x |E| incidence matrix: +1 at the head, -1 at the tail of each edge.

    For any point matrix P realizing the graph (variables then anchors as
    columns), diag(B^T P^T P B) equals the squared-distance vector.
    """
    n = graph.num_variables + graph.num_anchors
    B = np.zeros((n, len(graph.edges)))
    for e_idx, e in enumerate(graph.edges):
        B[e.tail, e_idx] = -1.0
        B[e.head, e_idx] = 1.0
    return B


def squared_distance_vector(graph: DistanceGraph) -> np.ndarray:
    return np.array([e.weight for e in graph.edges])


def assemble_qcqp(
    robot: RobotModel, goals: list[Goal], workspace: WorkspaceSpec | None = None
) -> QcqpInstance:
    """Build the complete feasibility instance for a robot, goals, and workspace."""
    workspace = workspace or WorkspaceSpec()
    graph = build_graph(robot, goals)
    d = robot.dimension
    for s in workspace.spheres:
        if s.center.shape != (d,):
            raise GraphError(f"sphere center dimension != {d}")

    planes: list[tuple[int, Plane]] = []
    for vertex, plane in workspace.planes:
        if plane.normal.shape != (d,):
            raise GraphError(f"plane normal dimension != {d}")
        if vertex is None:
            planes.extend((v, plane) for v in range(graph.num_variables))
        else:
            if not 0 <= vertex < graph.num_variables:
                raise GraphError(f"plane constraint on unknown variable {vertex}")
            planes.append((vertex, plane))

    instance = QcqpInstance(
        graph=graph,
        spheres=list(workspace.spheres),
        planes=planes,
        self_collision=[],
        aux_points=[],
        robot=robot,
        goals=list(goals),
    )

    from .workspace import add_aux_point, add_self_collision

    for i, j, eps in workspace.self_collision:
        instance = add_self_collision(instance, i, j, eps)
    if workspace.self_collision_eps is not None:
        adjacent = {(e.tail, e.head) for e in graph.edges}
        for i in range(graph.num_variables):
            for j in range(i + 1, graph.num_variables):
                if (i, j) not in adjacent:
                    instance = add_self_collision(
                        instance, i, j, workspace.self_collision_eps
                    )
    for aux in workspace.aux_points:
        instance = add_aux_point(instance, aux)
    return instance


class Residuals(NamedTuple):
    equality: float
    inequality: float
    plane: float


def residuals(instance: QcqpInstance, X: np.ndarray) -> Residuals:
    """Worst-case constraint violations of a candidate point matrix.

    X must supply every variable column (graph variables then aux points).
    Equality violations are |achieved - target| in squared meters, with aux
    tie mismatches (in meters) folded into the same component; inequality
    violations follow the keep-out convention max(0, l^2 - ||x - c||^2).
    """
    X = np.asarray(X, dtype=float)
    graph = instance.graph
    if X.shape != (graph.dim, instance.num_variables):
        raise ValueError(
            f"expected points of shape {(graph.dim, instance.num_variables)}, got {X.shape}"
        )

    def pos(v: int) -> np.ndarray:
        if v < graph.num_variables:
            return X[:, v]
        return graph.anchors[:, v - graph.num_variables]

    eq = 0.0
    for e in graph.edges:
        diff = pos(e.head) - pos(e.tail)
        eq = max(eq, abs(float(diff @ diff) - e.weight))
    for k, aux in enumerate(instance.aux_points):
        i, j = aux.edge
        y = X[:, graph.num_variables + k]
        target = (1.0 - aux.alpha) * pos(i) + aux.alpha * pos(j)
        eq = max(eq, float(np.linalg.norm(y - target)))

    ineq = 0.0
    from .workspace import sphere_violation

    for s in instance.spheres:
        for v in range(instance.num_variables):
            ineq = max(ineq, sphere_violation(X[:, v], s))
    for i, j, eps in instance.self_collision:
        diff = X[:, i] - X[:, j]
        ineq = max(ineq, max(0.0, eps - float(diff @ diff)))

    plane_viol = 0.0
    for v, plane in instance.planes:
        val = float(X[:, v] @ plane.normal) - plane.offset
        if plane.relation == "on":
            plane_viol = max(plane_viol, abs(val))
        else:
            plane_viol = max(plane_viol, max(0.0, -val))
    return Residuals(equality=eq, inequality=ineq, plane=plane_viol)


def feasible_points(instance: QcqpInstance, theta) -> np.ndarray:
    """Variable-point matrix realized by a configuration (aux points included)."""
    robot = instance.robot
    if robot is None:
        raise ValueError("instance carries no robot model")
    P = joint_points(robot, theta)
    graph = instance.graph
    layout = robot.layout

    label_pos = {}
    for c in layout.columns:
        label_pos[c] = P[:, layout.index[c]]
    # Goal anchor labels resolve to their structural positions at this theta.
    X = np.empty((graph.dim, instance.num_variables))
    for v, label in enumerate(graph.variable_labels):
        X[:, v] = label_pos[label]

    def pos(v: int) -> np.ndarray:
        if v < graph.num_variables:
            return X[:, v]
        return label_pos[graph.anchor_labels[v - graph.num_variables]]

    for k, aux in enumerate(instance.aux_points):
        i, j = aux.edge
        X[:, graph.num_variables + k] = (1.0 - aux.alpha) * pos(i) + aux.alpha * pos(j)
    return X
