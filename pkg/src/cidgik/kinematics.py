"""Robot model, forward kinematics, and the configuration-invariant point placement.

A robot is a tree of revolute joints.  Each unanchored joint carries a pair of
points (p, q) one unit apart along its rotation axis; anchored joints (those
whose axis never moves, e.g. the base) contribute fixed points instead.  All
pairwise distances between points of consecutive joints are invariant to the
joint angles, which is what the distance-geometric solver exploits.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

ON_AXIS_TOL = 1e-9
COPLANARITY_TOL = 1e-9


class RobotError(ValueError):
    """Malformed robot description or invalid kinematic structure."""


def _rpy_to_quat(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Quaternion (w, x, y, z) for extrinsic x-y-z (URDF-style) Euler angles."""
    cr, sr = math.cos(roll / 2), math.sin(roll / 2)
    cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
    cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
    return np.array(
        [
            cy * cp * cr + sy * sp * sr,
            cy * cp * sr - sy * sp * cr,
            cy * sp * cr + sy * cp * sr,
            sy * cp * cr - cy * sp * sr,
        ]
    )


def _quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    c, s = math.cos(angle), math.sin(angle)
    x, y, z = axis
    K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + s * K + (1 - c) * (K @ K)


@dataclass(frozen=True, eq=False)
class Joint:
    """One revolute joint: a fixed transform from the parent frame plus a spin axis."""

    name: str
    parent: int  # index of the parent joint, -1 for the fixed base
    translation: np.ndarray  # (3,) offset in the parent frame, meters
    rotation: np.ndarray  # (4,) unit quaternion (w, x, y, z), fixed frame rotation
    axis: np.ndarray  # (3,) unit rotation axis in the local frame

    def __post_init__(self):
        if abs(np.linalg.norm(self.axis) - 1.0) > 1e-12:
            raise RobotError(f"joint {self.name!r}: axis must have unit norm")
        if abs(np.linalg.norm(self.rotation) - 1.0) > 1e-12:
            raise RobotError(f"joint {self.name!r}: rotation quaternion must have unit norm")


@dataclass(frozen=True, eq=False)
class EndEffector:
    parent: int
    tip: np.ndarray  # (3,) nonzero offset in the parent joint frame, meters

    def __post_init__(self):
        if np.linalg.norm(self.tip) <= 0.0:
            raise RobotError("end-effector tip offset must be nonzero")


@dataclass(frozen=True, eq=False)
class Pose:
    """End-effector position plus unit pointing direction (no roll about it)."""

    position: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True, eq=False)
class JointFrames:
    """World frames of every joint at some configuration."""

    rotations: np.ndarray  # (N, 3, 3) orientation after the joint's own rotation
    origins: np.ndarray  # (N, 3) frame origins (invariant to the joint's own angle)
    axes: np.ndarray  # (N, 3) world direction of each rotation axis


@dataclass(frozen=True)
class PointLayout:
    """Column bookkeeping for the point matrix produced by joint_points.

    Columns are: (p, q) of every unanchored joint in index order, then (p, q)
    of every anchored joint, then per end-effector the tip point and the
    direction point (tip + unit pointing direction).  Planar robots have all
    axes out of plane, so the q points carry no information and are omitted.
    """

    columns: tuple[tuple, ...]
    num_variables: int

    @cached_property
    def index(self) -> dict:
        return {c: i for i, c in enumerate(self.columns)}


@dataclass(frozen=True, eq=False)
class RobotModel:
    joints: tuple[Joint, ...]
    end_effectors: tuple[EndEffector, ...]
    dimension: int
    document: dict | None = None  # source description, kept for serialization

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids = [[] for _ in self.joints]
        for i, j in enumerate(self.joints):
            if j.parent >= 0:
                kids[j.parent].append(i)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def _fixed_rotations(self) -> np.ndarray:
        return np.array([_quat_to_matrix(j.rotation) for j in self.joints])

    @cached_property
    def anchored(self) -> tuple[bool, ...]:
        """A joint is anchored iff its axis line coincides with every ancestor's.

        Rotating about a line leaves only that same line invariant, so the
        axis of joint i is configuration-invariant exactly when all joints on
        the path from the base share its axis line (checked at zero angles).
        """
        frames = _frames(self, np.zeros(len(self.joints)))
        flags = []
        for i, j in enumerate(self.joints):
            if j.parent < 0:
                flags.append(True)
                continue
            p = j.parent
            anchored = bool(flags[p]) and _same_line(
                frames.origins[i], frames.axes[i], frames.origins[p], frames.axes[p]
            )
            flags.append(bool(anchored))
        return tuple(flags)

    @cached_property
    def layout(self) -> PointLayout:
        cols = []
        planar = self.dimension == 2
        for i in range(len(self.joints)):
            if not self.anchored[i]:
                cols.append(("p", i))
                if not planar:
                    cols.append(("q", i))
        num_vars = len(cols)
        for i in range(len(self.joints)):
            if self.anchored[i]:
                cols.append(("p", i))
                if not planar:
                    cols.append(("q", i))
        for k in range(len(self.end_effectors)):
            cols.append(("ee", k, "pos"))
            cols.append(("ee", k, "dir"))
        return PointLayout(columns=tuple(cols), num_variables=num_vars)

    @cached_property
    def reach(self) -> float:
        """Upper bound on the distance from the base to any robot point."""
        total = sum(float(np.linalg.norm(j.translation)) for j in self.joints)
        tip = max(
            (float(np.linalg.norm(e.tip)) for e in self.end_effectors), default=0.0
        )
        return total + tip

    @property
    def num_joints(self) -> int:
        return len(self.joints)


def _same_line(o1, a1, o2, a2, tol=ON_AXIS_TOL) -> bool:
    if np.linalg.norm(np.cross(a1, a2)) > tol:
        return False
    return np.linalg.norm(np.cross(a1, o2 - o1)) <= tol * max(1.0, np.linalg.norm(o2 - o1))


def _frames(robot: RobotModel, theta: np.ndarray) -> JointFrames:
    n = len(robot.joints)
    R = np.empty((n, 3, 3))
    t = np.empty((n, 3))
    axes = np.empty((n, 3))
    fixed = robot._fixed_rotations
    for i, j in enumerate(robot.joints):
        if j.parent < 0:
            Rp = np.eye(3)
            tp = np.zeros(3)
        else:
            Rp = R[j.parent]
            tp = t[j.parent]
        t[i] = tp + Rp @ j.translation
        R_pre = Rp @ fixed[i]
        axes[i] = R_pre @ j.axis
        R[i] = R_pre @ _axis_rotation(j.axis, float(theta[i]))
    return JointFrames(rotations=R, origins=t, axes=axes)


def _check_theta(robot: RobotModel, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (len(robot.joints),):
        raise ValueError(
            f"expected {len(robot.joints)} joint angles, got shape {theta.shape}"
        )
    if not np.all(np.isfinite(theta)):
        raise ValueError("joint angles must be finite")
    return theta


def load_robot(document: str | dict) -> RobotModel:
    """Parse and validate a robot description.

    The document is JSON with the shape::

        {"dimension": 2|3,
         "joints": [{"name", "parent": name|"base", "translation": [x,y,z],
                     "rotation_rpy": [r,p,y], "axis": [x,y,z]}, ...],
         "end_effectors": [{"parent": name, "tip": [x,y,z]}, ...]}

    Angles are radians, lengths meters.  Joints must be listed parents-first.
    Consecutive joints must have coplanar (parallel or intersecting) axes,
    checked at the zero configuration; planar robots must keep everything in
    the z=0 plane with all axes along z.
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as e:
            raise RobotError(f"robot document is not valid JSON: {e}") from e
    else:
        doc = document
    if not isinstance(doc, dict):
        raise RobotError("robot document must be a JSON object")

    dim = doc.get("dimension")
    if dim not in (2, 3):
        raise RobotError(f"dimension must be 2 or 3, got {dim!r}")
    raw_joints = doc.get("joints")
    if not isinstance(raw_joints, list) or not raw_joints:
        raise RobotError("robot must declare a non-empty 'joints' list")

    name_to_index: dict[str, int] = {}
    joints = []
    for entry in raw_joints:
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise RobotError("every joint needs a non-empty string name")
        if name in name_to_index:
            raise RobotError(f"duplicate joint name {name!r}")
        parent_name = entry.get("parent")
        if parent_name == name:
            raise RobotError(f"non-tree topology: joint {name!r} is its own parent")
        if parent_name == "base":
            parent = -1
        elif parent_name in name_to_index:
            parent = name_to_index[parent_name]
        else:
            raise RobotError(
                f"non-tree topology: joint {name!r} has unknown parent "
                f"{parent_name!r} (parents must be declared first)"
            )
        translation = _vector3(entry.get("translation"), f"joint {name!r} translation")
        rpy = _vector3(entry.get("rotation_rpy", [0.0, 0.0, 0.0]), f"joint {name!r} rotation_rpy")
        axis = _vector3(entry.get("axis"), f"joint {name!r} axis")
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            raise RobotError(f"joint {name!r}: axis must be nonzero")
        axis = axis / norm
        if dim == 2:
            if abs(abs(axis[2]) - 1.0) > 1e-9:
                raise RobotError(
                    f"joint {name!r}: planar robots need all axes perpendicular "
                    "to the plane (axis along z)"
                )
            if abs(translation[2]) > 1e-12 or abs(rpy[0]) > 1e-12 or abs(rpy[1]) > 1e-12:
                raise RobotError(
                    f"joint {name!r}: planar robots must stay in the z=0 plane"
                )
        name_to_index[name] = len(joints)
        joints.append(
            Joint(
                name=name,
                parent=parent,
                translation=translation,
                rotation=_rpy_to_quat(*rpy),
                axis=axis,
            )
        )

    raw_ees = doc.get("end_effectors")
    if not isinstance(raw_ees, list) or not raw_ees:
        raise RobotError("robot must declare at least one end effector")
    ees = []
    for entry in raw_ees:
        parent_name = entry.get("parent")
        if parent_name not in name_to_index:
            raise RobotError(f"end effector parent {parent_name!r} is not a joint")
        tip = _vector3(entry.get("tip"), "end effector tip")
        if dim == 2 and abs(tip[2]) > 1e-12:
            raise RobotError("planar end-effector tips must have zero z component")
        ees.append(EndEffector(parent=name_to_index[parent_name], tip=tip))

    robot = RobotModel(
        joints=tuple(joints),
        end_effectors=tuple(ees),
        dimension=dim,
        document=doc,
    )
    _check_coplanarity(robot)
    return robot


def _vector3(value, what: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise RobotError(f"{what} must be a list of 3 numbers")
    try:
        v = np.array([float(x) for x in value])
    except (TypeError, ValueError) as e:
        raise RobotError(f"{what} must be a list of 3 numbers") from e
    if not np.all(np.isfinite(v)):
        raise RobotError(f"{what} must be finite")
    return v


def _check_coplanarity(robot: RobotModel) -> None:
    """Consecutive axes must be parallel or intersecting at zero configuration.

    Skew axes would make the six pairwise distances insufficient to pin the
    relative joint pose (the four points form a chiral tetrahedron).
    """
    frames = _frames(robot, np.zeros(len(robot.joints)))
    for i, j in enumerate(robot.joints):
        if j.parent < 0:
            continue
        p = j.parent
        a1, a2 = frames.axes[p], frames.axes[i]
        offset = frames.origins[i] - frames.origins[p]
        triple = np.dot(np.cross(a1, a2), offset)
        if abs(triple) > COPLANARITY_TOL * max(1.0, np.linalg.norm(offset)):
            raise RobotError(
                f"non-coplanar axes between joints {robot.joints[p].name!r} "
                f"and {j.name!r}"
            )


def forward_kinematics(robot: RobotModel, theta) -> tuple[list[Pose], JointFrames]:
    """World pose of every end effector plus all joint frames."""
    theta = _check_theta(robot, theta)
    frames = _frames(robot, theta)
    d = robot.dimension
    poses = []
    for ee in robot.end_effectors:
        R = frames.rotations[ee.parent]
        pos = frames.origins[ee.parent] + R @ ee.tip
        direction = R @ (ee.tip / np.linalg.norm(ee.tip))
        poses.append(Pose(position=pos[:d].copy(), direction=direction[:d].copy()))
    return poses, frames


def joint_points(robot: RobotModel, theta) -> np.ndarray:
    """Point matrix P with columns laid out per robot.layout.

    p_i sits at the joint-i frame origin and q_i = p_i + (world axis of i), so
    ||p_i - q_i|| = 1 for every configuration.  End-effector columns are the
    tip position and the point one unit along the pointing direction.
    """
    theta = _check_theta(robot, theta)
    frames = _frames(robot, theta)
    d = robot.dimension
    layout = robot.layout
    P = np.empty((d, len(layout.columns)))
    for c, col in enumerate(layout.columns):
        if col[0] == "p":
            P[:, c] = frames.origins[col[1]][:d]
        elif col[0] == "q":
            P[:, c] = (frames.origins[col[1]] + frames.axes[col[1]])[:d]
        else:
            _, k, kind = col
            ee = robot.end_effectors[k]
            R = frames.rotations[ee.parent]
            pos = frames.origins[ee.parent] + R @ ee.tip
            if kind == "pos":
                P[:, c] = pos[:d]
            else:
                P[:, c] = (pos + R @ (ee.tip / np.linalg.norm(ee.tip)))[:d]
    return P


def structural_pairs(robot: RobotModel) -> list[tuple[tuple, tuple]]:
    """Point pairs whose distance is fixed by the kinematic structure.

    Per joint: the unit (p, q) edge.  Per consecutive joint pair: all cross
    pairs between the two point sets.  Per end effector: pairs from the parent
    joint's points to the tip and direction points.
    """
    layout = robot.layout
    planar = robot.dimension == 2

    def pts(i):
        return [("p", i)] if planar else [("p", i), ("q", i)]

    pairs = []
    if not planar:
        for i in range(len(robot.joints)):
            pairs.append((("p", i), ("q", i)))
    for i, j in enumerate(robot.joints):
        if j.parent < 0:
            continue
        for a in pts(j.parent):
            for b in pts(i):
                pairs.append((a, b))
    for k, ee in enumerate(robot.end_effectors):
        for a in pts(ee.parent):
            pairs.append((a, ("ee", k, "pos")))
            pairs.append((a, ("ee", k, "dir")))
    index = layout.index
    return [(a, b) if index[a] < index[b] else (b, a) for a, b in pairs]


def nominal_distances(robot: RobotModel) -> dict[tuple[tuple, tuple], float]:
    """Squared distances of all structural pairs, computed at theta = 0.

    Rotation about a joint's own axis fixes the distances from its (p, q) to
    everything rigidly attached downstream, so these values hold at any theta;
    tests assert the invariance directly through forward kinematics.
    """
    P = joint_points(robot, np.zeros(len(robot.joints)))
    index = robot.layout.index
    out = {}
    for a, b in structural_pairs(robot):
        diff = P[:, index[a]] - P[:, index[b]]
        out[(a, b)] = float(diff @ diff)
    return out


def degenerate_pairs(robot: RobotModel) -> list[tuple[int, int]]:
    """Consecutive joint pairs whose child points all lie on the parent axis.

    Happens for collinear consecutive axes; the cross distances then pin the
    child points to the axis line and the pair carries no angular information.
    """
    frames = _frames(robot, np.zeros(len(robot.joints)))
    out = []
    for i, j in enumerate(robot.joints):
        if j.parent < 0:
            continue
        p = j.parent
        o, a = frames.origins[p], frames.axes[p]
        child_pts = [frames.origins[i]]
        if robot.dimension == 3:
            child_pts.append(frames.origins[i] + frames.axes[i])
        if all(np.linalg.norm(np.cross(pt - o, a)) <= ON_AXIS_TOL for pt in child_pts):
            out.append((p, i))
    return out


@dataclass(frozen=True)
class ReconstructionResult:
    theta: np.ndarray
    residual: float  # max column-wise distance between given and rebuilt points
    fallback_joints: tuple[int, ...] = ()  # joints recovered as 0 (no usable reference)


def reconstruct_angles(robot: RobotModel, points: np.ndarray) -> ReconstructionResult:
    """Recover joint angles from a solved point matrix (columns per robot.layout).

    Walks the tree root-to-leaves.  For each joint the already-recovered
    ancestor angles fix its frame origin and world axis; the angle is then the
    atan2 between the zero-angle prediction and the observed position of a
    descendant reference point, both projected into the plane orthogonal to
    the axis.  References are tried in breadth-first order (child p then q,
    then attached end-effector points, then deeper); if every projection is
    degenerate (reference on the axis) the angle falls back to 0 and the
    joint is reported.  NaN columns are skipped, so callers may leave unknown
    end-effector direction points unfilled.
    """
    layout = robot.layout
    points = np.asarray(points, dtype=float)
    if points.shape != (robot.dimension, len(layout.columns)):
        raise ValueError(
            f"expected point matrix of shape {(robot.dimension, len(layout.columns))}, "
            f"got {points.shape}"
        )
    P3 = np.zeros((3, points.shape[1]))
    P3[: robot.dimension] = points
    index = layout.index
    fixed = robot._fixed_rotations

    n = len(robot.joints)
    theta = np.zeros(n)
    R_post = [None] * n
    t_post = [None] * n
    fallbacks = []
    for i, j in enumerate(robot.joints):
        if j.parent < 0:
            Rp, tp = np.eye(3), np.zeros(3)
        else:
            Rp, tp = R_post[j.parent], t_post[j.parent]
        o = tp + Rp @ j.translation
        R_pre = Rp @ fixed[i]
        a = R_pre @ j.axis

        angle = None
        for pred, col in _reference_candidates(robot, i, R_pre, o):
            obs = P3[:, index[col]]
            if not np.all(np.isfinite(obs)):
                continue
            u0 = pred - o
            u0 = u0 - (u0 @ a) * a
            u1 = obs - o
            u1 = u1 - (u1 @ a) * a
            if np.linalg.norm(u0) < ON_AXIS_TOL or np.linalg.norm(u1) < ON_AXIS_TOL:
                continue
            angle = math.atan2(a @ np.cross(u0, u1), u0 @ u1)
            break
        if angle is None:
            angle = 0.0
            fallbacks.append(i)
        theta[i] = angle
        R_post[i] = R_pre @ _axis_rotation(j.axis, angle)
        t_post[i] = o

    rebuilt = joint_points(robot, theta)
    mask = np.all(np.isfinite(points), axis=0)
    if np.any(mask):
        residual = float(
            np.max(np.linalg.norm(rebuilt[:, mask] - points[:, mask], axis=0))
        )
    else:
        residual = 0.0
    return ReconstructionResult(
        theta=theta, residual=residual, fallback_joints=tuple(fallbacks)
    )


def _reference_candidates(robot: RobotModel, root: int, R_pre, o):
    """Yield (predicted zero-angle world position, layout column) pairs.

    Predictions hold the angles of `root` and of everything below it at zero;
    they are valid references because when a child's points sit on the root's
    axis the child axis is collinear, so deeper points still rotate rigidly
    with the root's angle.
    """
    fixed = robot._fixed_rotations
    queue = deque([(root, R_pre, o)])
    first = True
    while queue:
        i, R, t = queue.popleft()
        if not first:
            yield t, ("p", i)
            if robot.dimension == 3:
                yield t + R @ robot.joints[i].axis, ("q", i)
        for k, ee in enumerate(robot.end_effectors):
            if ee.parent == i:
                tip = t + R @ ee.tip
                yield tip, ("ee", k, "pos")
                yield tip + R @ (ee.tip / np.linalg.norm(ee.tip)), ("ee", k, "dir")
        for c in robot.children[i]:
            jc = robot.joints[c]
            queue.append((c, R @ fixed[c], t + R @ jc.translation))
        first = False


def pose_error(achieved: Pose, goal: Pose) -> tuple[float, float]:
    """(position error in meters, direction error in radians)."""
    if achieved.position.shape != goal.position.shape:
        raise ValueError("poses have different dimensions")
    pos = float(np.linalg.norm(achieved.position - goal.position))
    dot = float(np.clip(achieved.direction @ goal.direction, -1.0, 1.0))
    return pos, math.acos(dot)
