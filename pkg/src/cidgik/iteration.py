"""Convex iteration: drive the lifted solution to rank d.

The excess-rank surrogate h(Z) sums every eigenvalue beyond the d largest,
so h(Z) = 0 exactly when a PSD Z has rank at most d.  Minimizing tr(C Z) with
C the projector onto the trailing eigenspace of the previous iterate equals
h at that iterate, so alternating the linear-cost SDP with this closed-form
direction update walks the spectrahedron toward its rank-d points.  The first
pass uses C = I, i.e. the plain nuclear-norm heuristic.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import QcqpInstance, residuals
from .kinematics import (
    Pose,
    RobotModel,
    forward_kinematics,
    joint_points,
    pose_error,
    reconstruct_angles,
)
from .lifting import extract_points, lift
from .solver import InfeasibilityCertificate, SolverSettings, solve
from .workspace import WorkspaceSpec, sphere_violation

logger = logging.getLogger("cidgik.iteration")

SYMMETRY_TOL = 1e-9

# Verification thresholds: position (m), direction (rad), penetration depth (m).
POSITION_TOL = 0.01
DIRECTION_TOL = 0.01
PENETRATION_TOL = 0.01


def excess_rank(Z: np.ndarray, dim: int) -> float:
    """Sum of the eigenvalues of Z beyond the dim largest (zero iff rank <= dim)."""
    Z = np.asarray(Z, dtype=float)
    scale = max(1.0, float(np.max(np.abs(Z))))
    if np.max(np.abs(Z - Z.T)) > SYMMETRY_TOL * scale:
        raise ValueError("excess_rank expects a symmetric matrix")
    lam = np.linalg.eigvalsh(0.5 * (Z + Z.T))  # ascending
    if dim >= len(lam):
        return 0.0
    tail = float(np.sum(lam)) if dim <= 0 else float(np.sum(lam[:-dim]))
    return max(tail, 0.0)


@dataclass(frozen=True, eq=False)
class RankDirection:
    """Projector onto the trailing eigenspace; tr(C Z) equals h(Z) at its source Z."""

    C: np.ndarray


def direction_matrix(Z: np.ndarray, dim: int) -> RankDirection:
    """Closed-form optimal direction: C* = U U^T from the smallest eigenvectors.

    U collects the eigenvectors of the side - dim smallest eigenvalues, so C*
    is an orthogonal projector with trace side - dim and tr(C* Z) = h(Z).
    Eigenvector signs are normalized (first nonzero component positive) so the
    factorization itself is reproducible; C* does not depend on the signs.
    """
    Z = np.asarray(Z, dtype=float)
    scale = max(1.0, float(np.max(np.abs(Z))))
    if np.max(np.abs(Z - Z.T)) > SYMMETRY_TOL * scale:
        raise ValueError("direction_matrix expects a symmetric matrix")
    side = Z.shape[0]
    _, V = np.linalg.eigh(0.5 * (Z + Z.T))  # ascending eigenvalues
    U = V[:, : side - dim]
    for col in range(U.shape[1]):
        nz = np.nonzero(np.abs(U[:, col]) > 1e-12)[0]
        if nz.size and U[nz[0], col] < 0:
            U[:, col] = -U[:, col]
    return RankDirection(C=U @ U.T)


@dataclass(frozen=True)
class IterationRecord:
    h: float
    solver_status: str
    eq_residual: float
    ineq_violation: float
    objective: float


@dataclass(eq=False)
class IterationTrace:
    records: list[IterationRecord] = field(default_factory=list)
    final_status: str = "max_iterations"  # converged | max_iterations | infeasible

    @property
    def h_values(self) -> list[float]:
        return [r.h for r in self.records]

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class CidgikOptions:
    max_iterations: int = 10
    h_tol: float = 1e-6
    solver: SolverSettings = SolverSettings()
    # The nuclear-norm pass only initializes the direction, so it gets a
    # fixed budget instead of the full solver iteration cap.
    first_solve_budget: int = 4000


def _pose_residual(robot: RobotModel, goals, theta, clearances=()) -> np.ndarray:
    """Goal residuals plus hinge terms for requested obstacle clearances.

    A clearance is (point label, Sphere); its residual is the amount by which
    the squared distance falls short of the squared radius, zero when clear.
    """
    poses, _ = forward_kinematics(robot, theta)
    parts = []
    for g in goals:
        p = poses[g.end_effector]
        parts.append(p.position - np.asarray(g.position, dtype=float))
        if g.direction is not None:
            parts.append(p.direction - np.asarray(g.direction, dtype=float))
    if clearances:
        P = joint_points(robot, theta)
        index = robot.layout.index
        for label, sphere in clearances:
            diff = P[:, index[label]] - sphere.center
            parts.append(
                np.array([min(0.0, float(diff @ diff) - sphere.radius**2)])
            )
    return np.concatenate(parts) if parts else np.zeros(0)


def _pose_jacobian(robot: RobotModel, goals, theta, clearances=()) -> np.ndarray:
    """Geometric Jacobian of the stacked goal (and clearance) residuals.

    For a revolute joint with world axis a through origin o, an attached
    point p moves as a x (p - o) and an attached unit direction u as a x u.
    Clearance rows are zero while the point is outside its sphere.
    """
    from .kinematics import _frames

    theta = np.asarray(theta, dtype=float)
    frames = _frames(robot, theta)
    d = robot.dimension
    n = len(robot.joints)
    ancestors = []
    for i in range(n):
        chain = set()
        k = i
        while k >= 0:
            chain.add(k)
            k = robot.joints[k].parent
        ancestors.append(chain)

    def point_jacobian(point, owner):
        J = np.zeros((3, n))
        for i in ancestors[owner]:
            a = frames.axes[i]
            J[:, i] = np.cross(a, point - frames.origins[i])
        return J

    rows = []
    for g in goals:
        ee = robot.end_effectors[g.end_effector]
        R = frames.rotations[ee.parent]
        pos = frames.origins[ee.parent] + R @ ee.tip
        rows.append(point_jacobian(pos, ee.parent)[:d])
        if g.direction is not None:
            direction = R @ (ee.tip / np.linalg.norm(ee.tip))
            Jd = np.zeros((3, n))
            for i in ancestors[ee.parent]:
                Jd[:, i] = np.cross(frames.axes[i], direction)
            rows.append(Jd[:d])
    if clearances:
        P3 = np.zeros((3, len(robot.layout.columns)))
        P3[:d] = joint_points(robot, theta)
        index = robot.layout.index
        for label, sphere in clearances:
            point = P3[:, index[label]]
            center = np.zeros(3)
            center[: sphere.center.shape[0]] = sphere.center
            diff = point - center
            if float(diff @ diff) - sphere.radius**2 >= 0.0:
                rows.append(np.zeros((1, n)))
            else:
                rows.append((2.0 * diff @ point_jacobian(point, label[1]))[None, :])
    return np.vstack(rows) if rows else np.zeros((0, n))


def refine_configuration(
    robot: RobotModel,
    goals,
    theta0,
    *,
    clearances=(),
    tol: float = 1e-11,
    max_steps: int = 40,
) -> np.ndarray | None:
    """Levenberg-Marquardt on the goal residuals over joint angles.

    Configurations satisfy every structural distance constraint identically,
    so driving the goal residuals to zero lands exactly on the feasibility
    set; callers still gate the result against obstacles.  Clearance terms
    (point label, keep-out sphere) enter as hinge residuals for retries whose
    plain solution collided.  Returns None when the iteration stalls above
    the tolerance.
    """
    theta = np.asarray(theta0, dtype=float).copy()
    r = _pose_residual(robot, goals, theta, clearances)
    if r.size == 0:
        return theta
    damping = 1e-8
    for _ in range(max_steps):
        if float(np.max(np.abs(r))) < tol:
            return theta
        J = _pose_jacobian(robot, goals, theta, clearances)
        JtJ = J.T @ J
        g = J.T @ r
        accepted = False
        for _ in range(15):
            step = np.linalg.solve(JtJ + damping * np.eye(len(theta)), -g)
            r_new = _pose_residual(robot, goals, theta + step, clearances)
            if float(np.linalg.norm(r_new)) < float(np.linalg.norm(r)):
                theta = theta + step
                r = r_new
                damping = max(damping / 3.0, 1e-12)
                accepted = True
                break
            damping *= 10.0
        if not accepted:
            return None
    return theta if float(np.max(np.abs(r))) < tol else None


def refine_rank_d_points(
    instance, X: np.ndarray, *, tol: float = 1e-10, max_steps: int = 20
) -> np.ndarray | None:
    """Gauss-Newton refinement of a near-feasible rank-d point.

    Drives the equality residuals of the lifted system to machine precision
    over the factor X (so the refined Z = Z(X) has rank at most d by
    construction).  Inequalities are checked afterwards; any that end up
    violated are pinned at their boundary and the refinement retried once.
    Returns None when the iteration fails to reach the tolerance.
    """
    from .lifting import evaluate, lift_points

    nv = instance.num_variables
    d = instance.dim

    def _solve_system(extra_rows):
        mats = list(instance.eq_mats) + [instance.ineq_mats[j] for j in extra_rows]
        rhs = np.concatenate(
            [instance.eq_rhs, [instance.ineq_rhs[j] for j in extra_rows]]
        )
        X_cur = np.asarray(X, dtype=float).copy()

        def residual(Xc):
            Z = lift_points(Xc)
            return np.array([float(np.tensordot(A, Z)) for A in mats]) - rhs

        r = residual(X_cur)
        for _ in range(max_steps):
            if float(np.max(np.abs(r))) < tol:
                break
            J = np.empty((len(mats), d * nv))
            for k, A in enumerate(mats):
                J[k] = (2.0 * (X_cur @ A[:nv, :nv] + A[nv:, :nv])).ravel()
            step, *_ = np.linalg.lstsq(J, -r, rcond=None)
            step = step.reshape(d, nv)
            alpha = 1.0
            norm_r = float(np.linalg.norm(r))
            while alpha > 1e-4:
                r_new = residual(X_cur + alpha * step)
                if float(np.linalg.norm(r_new)) < norm_r:
                    X_cur = X_cur + alpha * step
                    r = r_new
                    break
                alpha *= 0.5
            else:
                return None
        if float(np.max(np.abs(r))) >= tol:
            return None
        return X_cur

    refined = _solve_system([])
    if refined is None:
        return None
    _, slack = evaluate(instance, lift_points(refined))
    violated = [j for j in range(len(slack)) if slack[j] < -1e-9]
    if violated:
        refined = _solve_system(violated)
        if refined is None:
            return None
        _, slack = evaluate(instance, lift_points(refined))
        if slack.size and float(np.min(slack)) < -1e-9:
            return None
    return refined


@dataclass(eq=False)
class CidgikResult:
    status: str  # converged | max_iterations | infeasible
    trace: IterationTrace
    X: np.ndarray | None = None
    theta: np.ndarray | None = None
    gram_gap: float | None = None
    reconstruction_residual: float | None = None
    position_error: float | None = None
    direction_error: float | None = None
    max_penetration: float | None = None
    certificate: InfeasibilityCertificate | None = None
    solve_time: float = 0.0  # SDP + direction-update time, setup excluded
    h: float | None = None

    @property
    def iterations(self) -> int:
        return len(self.trace)

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "theta": None if self.theta is None else [float(t) for t in self.theta],
            "h_trace": [float(h) if np.isfinite(h) else None for h in self.trace.h_values],
            "position_error": self.position_error,
            "direction_error": self.direction_error,
            "max_penetration": self.max_penetration,
            "iterations": self.iterations,
            "solve_time_s": self.solve_time,
        }


def cidgik_solve(qcqp: QcqpInstance, options: CidgikOptions | None = None) -> CidgikResult:
    """Alternate the linear-cost SDP with the rank-direction update.

    The nuclear-norm pass (C = I) runs the solver's primal variant so that
    objective ties resolve to centered points the way interior-point solvers
    do; subsequent passes use the rank-seeking dual variant, warm-started
    from the previous iterate.  Iteration stops on SDP infeasibility, at the
    cap (returning the best-h iterate), or once a trustworthy rank-d point
    exists: either the solve was optimal with h below threshold, or the
    extracted points were refined to an exactly rank-d matrix whose lifted
    residuals pass the solver tolerance.  h is measured on the solver's
    cone-projected iterate, and the trace records it before any refinement.
    """
    options = options or CidgikOptions()
    instance = lift(qcqp)
    dim = instance.dim
    side = instance.side

    rhs_scale = float(np.max(np.abs(instance.eq_rhs))) if instance.eq_rhs.size else 0.0
    tol_con = options.solver.eps_abs + options.solver.eps_rel * rhs_scale

    trace = IterationTrace()
    C = np.eye(side)
    warm = None
    best: tuple[float, np.ndarray] | None = None
    final: tuple[float, np.ndarray] | None = None
    final_theta = None
    solve_time = 0.0
    status = "max_iterations"
    certificate = None

    for k in range(options.max_iterations):
        if k == 0:
            settings = dataclasses.replace(
                options.solver,
                max_iters=min(options.solver.max_iters, options.first_solve_budget),
            )
            result = solve(instance, C, settings, method="primal")
        else:
            result = solve(instance, C, options.solver, warm_start=warm, method="dual")
        solve_time += result.wall_time
        if result.status == "infeasible":
            trace.records.append(
                IterationRecord(
                    h=float("nan"),
                    solver_status=result.status,
                    eq_residual=result.eq_residual,
                    ineq_violation=result.ineq_violation,
                    objective=result.objective,
                )
            )
            status = "infeasible"
            certificate = result.certificate
            break
        Z = result.Z.Z
        t_post = time.perf_counter()
        h = excess_rank(Z, dim)
        trace.records.append(
            IterationRecord(
                h=h,
                solver_status=result.status,
                eq_residual=result.eq_residual,
                ineq_violation=result.ineq_violation,
                objective=result.objective,
            )
        )
        logger.info("iteration %d: h=%.3e solver=%s", k + 1, h, result.status)
        if best is None or h < best[0]:
            best = (h, Z)
        if h < options.h_tol and result.status == "optimal":
            status = "converged"
            final = (h, Z)
            solve_time += time.perf_counter() - t_post
            break
        refined = _attempt_refinement(qcqp, instance, Z, tol_con, options.h_tol)
        if refined is not None:
            status = "converged"
            final = refined[:2]
            final_theta = refined[2]
            solve_time += time.perf_counter() - t_post
            break
        C = direction_matrix(Z, dim).C
        warm = Z
        solve_time += time.perf_counter() - t_post

    trace.final_status = status
    out = CidgikResult(
        status=status,
        trace=trace,
        certificate=certificate,
        solve_time=solve_time,
    )
    if final is None:
        final = best
    if final is None:
        return out

    out.h = final[0]
    X, gap = extract_points(final[1], dim=dim)
    out.X = X
    out.gram_gap = gap
    robot = qcqp.robot
    if robot is None:
        return out

    if final_theta is not None:
        out.theta = final_theta
        out.reconstruction_residual = 0.0
    else:
        rec = reconstruct_angles(robot, _full_point_matrix(qcqp, X))
        out.theta = rec.theta
        out.reconstruction_residual = rec.residual
    report = verify_solution(
        robot,
        qcqp.goals,
        WorkspaceSpec(spheres=qcqp.spheres, planes=[]),
        out.theta,
    )
    out.position_error = report.position_error
    out.direction_error = report.direction_error
    out.max_penetration = report.max_penetration
    return out


def _attempt_refinement(qcqp: QcqpInstance, instance, Z, tol_con: float, h_tol: float):
    """Try to turn a low-h iterate into a verified, exactly rank-d solution.

    With a robot attached, the reconstructed angles seed a local refinement
    of the goal residuals; a configuration satisfies every structural
    distance identically, so only the goal edges need closing.  Without a
    robot the factor itself is refined by Gauss-Newton.  Either way the
    candidate only counts if the exact lifted residuals pass the solver
    tolerance and no inequality is violated, so an accepted refinement is a
    certified feasible rank-d point, not a guess.
    """
    from .graph import feasible_points
    from .lifting import evaluate, lift_points

    dim = instance.dim
    robot = qcqp.robot if qcqp is not None else None
    X0, _ = extract_points(Z, dim=dim)

    def gate(X, theta):
        Zr = lift_points(X)
        eq, slack = evaluate(instance, Zr)
        ok = float(np.max(np.abs(eq))) <= tol_con and (
            not slack.size or float(np.min(slack)) >= -tol_con
        )
        hr = excess_rank(Zr, dim)
        if ok and hr < h_tol:
            return hr, Zr, theta
        return None

    if robot is None:
        refined = refine_rank_d_points(instance, X0)
        return gate(refined, None) if refined is not None else None

    rec = reconstruct_angles(robot, _full_point_matrix(qcqp, X0))
    theta = refine_configuration(robot, qcqp.goals, rec.theta)
    if theta is None:
        return None
    accepted = gate(feasible_points(qcqp, theta), theta)
    if accepted is not None:
        return accepted
    # Goals closed but a variable point landed inside a keep-out sphere:
    # retry with hinge clearance terms for the violated pairs.
    clearances = _violated_clearances(qcqp, theta)
    if not clearances:
        return None
    theta2 = refine_configuration(robot, qcqp.goals, theta, clearances=clearances)
    if theta2 is None:
        return None
    return gate(feasible_points(qcqp, theta2), theta2)


def _violated_clearances(qcqp: QcqpInstance, theta):
    """Variable-point / keep-out-sphere pairs a configuration violates."""
    robot = qcqp.robot
    graph = qcqp.graph
    P = joint_points(robot, theta)
    index = robot.layout.index
    out = []
    for sphere in qcqp.spheres:
        if sphere.sense != "keep_out":
            continue
        for label in graph.variable_labels:
            if label[0] not in ("p", "q"):
                continue
            diff = P[:, index[label]] - sphere.center
            if float(diff @ diff) < sphere.radius**2:
                out.append((label, sphere))
    return out


def _full_point_matrix(qcqp: QcqpInstance, X: np.ndarray) -> np.ndarray:
    """Assemble the layout-ordered point matrix from solved variables.

    Anchored-joint columns take their fixed positions, goal columns the goal
    data; end-effector columns without a goal (or without a direction goal)
    stay NaN and are skipped during reconstruction.  Variables merged away
    during graph construction are recovered from their representatives.
    """
    robot = qcqp.robot
    graph = qcqp.graph
    layout = robot.layout
    d = graph.dim
    P = np.full((d, len(layout.columns)), np.nan)

    fixed = joint_points(robot, np.zeros(len(robot.joints)))
    for idx, col in enumerate(layout.columns):
        if col[0] in ("p", "q") and robot.anchored[col[1]]:
            P[:, idx] = fixed[:, idx]
    by_label = {lab: i for i, lab in enumerate(graph.variable_labels)}
    anchor_index = {lab: a for a, lab in enumerate(graph.anchor_labels)}
    for idx, col in enumerate(layout.columns[: layout.num_variables]):
        rep = graph.merged.get(col, col)
        if rep in by_label:
            P[:, idx] = X[:, by_label[rep]]
        elif rep in anchor_index:
            P[:, idx] = graph.anchors[:, anchor_index[rep]]
    for a, lab in enumerate(graph.anchor_labels):
        if lab[0] == "ee":
            P[:, layout.index[lab]] = graph.anchors[:, a]
    return P


@dataclass(frozen=True)
class VerificationReport:
    success: bool
    position_error: float
    direction_error: float
    max_penetration: float
    failures: tuple[str, ...] = ()


def verify_solution(
    robot: RobotModel, goals, workspace: WorkspaceSpec | None, theta
) -> VerificationReport:
    """Check a configuration against the goal and workspace tolerances.

    Success requires every goal position within 0.01 m, every specified goal
    direction within 0.01 rad, and every joint point clear of every keep-out
    sphere up to 0.01 m of penetration depth (keep-in spheres and planes are
    held to the same depth tolerance).
    """
    theta = np.asarray(theta, dtype=float)
    poses, _ = forward_kinematics(robot, theta)
    pos_err = 0.0
    dir_err = 0.0
    for g in goals:
        achieved = poses[g.end_effector]
        direction = g.direction if g.direction is not None else achieved.direction
        p, a = pose_error(achieved, Pose(position=np.asarray(g.position, float), direction=np.asarray(direction, float)))
        pos_err = max(pos_err, p)
        if g.direction is not None:
            dir_err = max(dir_err, a)

    penetration = 0.0
    P = joint_points(robot, theta)
    workspace = workspace or WorkspaceSpec()
    for s in workspace.spheres:
        dist = np.linalg.norm(P - s.center[:, None], axis=0)
        if s.sense == "keep_out":
            depth = float(np.max(s.radius - dist))
        else:
            depth = float(np.max(dist - s.radius))
        penetration = max(penetration, depth, 0.0)
    for vertex, plane in workspace.planes:
        vals = plane.normal @ P - plane.offset
        if plane.relation == "above":
            penetration = max(penetration, float(np.max(-vals)), 0.0)
        else:
            penetration = max(penetration, float(np.max(np.abs(vals))))

    failures = []
    if pos_err >= POSITION_TOL:
        failures.append("position")
    if dir_err >= DIRECTION_TOL:
        failures.append("direction")
    if penetration >= PENETRATION_TOL:
        failures.append("collision")
    return VerificationReport(
        success=not failures,
        position_error=pos_err,
        direction_error=dir_err,
        max_penetration=penetration,
        failures=tuple(failures),
    )
