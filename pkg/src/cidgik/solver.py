"""First-order conic solver for linear-cost SDPs, plus the sparse SDPA bridge.

The built-in method is an operator-splitting (ADMM) scheme on

    min tr(C Z)  s.t.  tr(A_k Z) = a_k,  tr(B_j Z) <= b_j,  Z PSD,

with inequality slacks appended so one iterate alternates between a
projection onto the affine constraint set (through a cached factorization of
the constraint normal system) and a projection onto the PSD x nonnegative
cone, with over-relaxation and scaled dual updates.  Everything is dense and
deterministic: the same instance and settings reproduce the same iterates.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lifting import LiftedSolution, SdpInstance

logger = logging.getLogger("cidgik.solver")

OVER_RELAXATION = 1.5
RHO_ADAPT_EVERY = 100
RHO_MIN, RHO_MAX = 1e-4, 1e4
STALL_WINDOW = 2000  # iterations without progress before hunting a certificate
CERT_PROJECTION_ITERS = 2000
CERT_TOL = 1e-6


class NumericalBreakdownError(RuntimeError):
    """The iteration produced non-finite values or a factorization failed."""


@dataclass(frozen=True)
class SolverSettings:
    eps_abs: float = 1e-7
    eps_rel: float = 1e-7
    max_iters: int = 50000
    scaling: bool = True

    def __post_init__(self):
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True, eq=False)
class InfeasibilityCertificate:
    """Farkas-type witness that the constraint set has no PSD solution.

    With multipliers y (free) and mu >= 0, S = sum_k y_k A_k + sum_j mu_j B_j
    is PSD while a.y + b.mu < 0; any feasible Z would give
    0 <= tr(S Z) <= a.y + b.mu, a contradiction.
    """

    y: np.ndarray
    mu: np.ndarray
    S: np.ndarray
    value: float
    min_eigenvalue: float


@dataclass(eq=False)
class SolveResult:
    status: str  # optimal | infeasible | max_iters
    Z: LiftedSolution
    objective: float
    iterations: int
    wall_time: float
    eq_residual: float
    ineq_violation: float
    dual_residual: float
    instance: SdpInstance
    certificate: InfeasibilityCertificate | None = None


def project_psd(M: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm: clamp negative eigenvalues to zero."""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("cannot eigendecompose a non-finite matrix")
    if M.shape[0] != M.shape[1] or np.max(np.abs(M - M.T)) > 1e-9 * max(
        1.0, float(np.max(np.abs(M)))
    ):
        raise ValueError("project_psd expects a symmetric matrix")
    sym = 0.5 * (M + M.T)
    lam, V = np.linalg.eigh(sym)
    np.maximum(lam, 0.0, out=lam)
    return (V * lam) @ V.T


class _SvecSpace:
    """Symmetric matrices as vectors with the trace inner product preserved."""

    def __init__(self, n: int):
        self.n = n
        self.rows, self.cols = np.triu_indices(n)
        self.weights = np.where(self.rows == self.cols, 1.0, math.sqrt(2.0))
        self.dim = len(self.weights)

    def vec(self, M: np.ndarray) -> np.ndarray:
        return M[self.rows, self.cols] * self.weights

    def mat(self, v: np.ndarray) -> np.ndarray:
        M = np.zeros((self.n, self.n))
        vals = v / self.weights
        M[self.rows, self.cols] = vals
        M[self.cols, self.rows] = vals
        return M


class _ConicData:
    """Preprocessed constraint system shared by the solve loop and certificates."""

    def __init__(self, instance: SdpInstance, scaling: bool):
        self.instance = instance
        self.space = _SvecSpace(instance.side)
        D = self.space.dim
        self.n_eq = instance.num_equalities
        self.n_ineq = instance.num_inequalities
        m = self.n_eq + self.n_ineq

        mats = list(instance.eq_mats) + list(instance.ineq_mats)
        rows = np.array([self.space.vec(A) for A in mats]) if m else np.zeros((0, D))
        rhs = np.concatenate([instance.eq_rhs, instance.ineq_rhs])
        norms = np.linalg.norm(rows, axis=1)
        if np.any(norms == 0.0):
            raise ValueError("constraint matrices must be nonzero")
        self.scale = 1.0 / norms if scaling else np.ones(m)
        self.row_norms = norms if scaling else np.ones(m)

        G = np.zeros((m, D + self.n_ineq))
        G[:, :D] = rows * self.scale[:, None]
        for j in range(self.n_ineq):
            G[self.n_eq + j, D + j] = self.scale[self.n_eq + j]
        self.G = G
        self.GT = G.T
        self.h = rhs * self.scale
        self.rhs = rhs
        self.D = D

        K = G @ G.T
        self._cho = None
        self._pinv = None
        try:
            self._cho = scipy.linalg.cho_factor(K)
        except scipy.linalg.LinAlgError:
            lam, V = np.linalg.eigh(K)
            inv = np.zeros_like(lam)
            keep = lam > 1e-12 * max(float(lam[-1]), 1.0)
            inv[keep] = 1.0 / lam[keep]
            self._pinv = (V, inv)

    def solve_normal(self, r: np.ndarray) -> np.ndarray:
        if self._cho is not None:
            return scipy.linalg.cho_solve(self._cho, r)
        V, inv = self._pinv
        return V @ (inv * (V.T @ r))

    def project_affine(self, w: np.ndarray) -> np.ndarray:
        r = self.G @ w
        r -= self.h
        return w - self.GT @ self.solve_normal(r)

    def project_cone(self, w: np.ndarray) -> np.ndarray:
        M = self.space.mat(w[: self.D])
        lam, V = np.linalg.eigh(M)
        np.maximum(lam, 0.0, out=lam)
        out = np.empty_like(w)
        out[: self.D] = self.space.vec((V * lam) @ V.T)
        np.maximum(w[self.D :], 0.0, out=out[self.D :])
        return out

    def split_cone(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One eigendecomposition gives both parts of w = proj_K(w) - proj_K(-w)."""
        M = self.space.mat(w[: self.D])
        lam, V = np.linalg.eigh(M)
        pos = np.empty_like(w)
        neg = np.empty_like(w)
        pos[: self.D] = self.space.vec((V * np.maximum(lam, 0.0)) @ V.T)
        neg[: self.D] = self.space.vec((V * np.maximum(-lam, 0.0)) @ V.T)
        np.maximum(w[self.D :], 0.0, out=pos[self.D :])
        np.maximum(-w[self.D :], 0.0, out=neg[self.D :])
        return pos, neg

    def affine_least_squares_residual(self) -> tuple[np.ndarray, float]:
        """Residual h - proj_range(G) h; nonzero means the affine set is empty."""
        y = self.solve_normal(self.h)
        resid = self.h - self.G @ (self.GT @ y)
        return resid, float(np.max(np.abs(resid))) if resid.size else 0.0

    def unscaled_evaluation(self, z_mat_part: np.ndarray) -> np.ndarray:
        """tr(A_k Z) for every constraint row, in original units."""
        return (self.G[:, : self.D] @ z_mat_part) * self.row_norms

    def multipliers_from_gap(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Least-squares multipliers y with G^T y ~ v, mapped to original units."""
        y = self.solve_normal(self.G @ v)
        y_orig = y * self.scale
        return y_orig[: self.n_eq], y_orig[self.n_eq :]


def _verify_certificate(
    instance: SdpInstance, y: np.ndarray, mu: np.ndarray
) -> InfeasibilityCertificate | None:
    """Normalize multipliers and check the Farkas conditions to 1e-6."""
    mu = np.maximum(mu, 0.0)
    scale = float(np.linalg.norm(np.concatenate([y, mu])))
    if scale <= 0.0:
        return None
    y = y / scale
    mu = mu / scale
    S = np.zeros((instance.side, instance.side))
    for yk, A in zip(y, instance.eq_mats):
        if yk != 0.0:
            S += yk * A
    for mj, B in zip(mu, instance.ineq_mats):
        if mj != 0.0:
            S += mj * B
    value = float(instance.eq_rhs @ y) + float(instance.ineq_rhs @ mu)
    min_eig = float(np.linalg.eigvalsh(S)[0]) if instance.side else 0.0
    if value <= -CERT_TOL and min_eig >= -CERT_TOL:
        return InfeasibilityCertificate(
            y=y, mu=mu, S=S, value=value, min_eigenvalue=min_eig
        )
    return None


def _certificate_from_projections(
    data: _ConicData, start: np.ndarray
) -> InfeasibilityCertificate | None:
    """Hunt a separating direction by pure alternating projections.

    When the affine set and the cone are disjoint, alternating projections
    converge to the closest pair; the gap vector lies in the row space of the
    constraints and in the dual cone, which is exactly the Farkas witness.
    """
    w = start.copy()
    for _ in range(CERT_PROJECTION_ITERS):
        w = data.project_cone(data.project_affine(w))
    v = w - data.project_affine(w)
    if float(np.linalg.norm(v)) < 1e-10:
        return None
    y, mu = data.multipliers_from_gap(v)
    return _verify_certificate(data.instance, y, mu)


def _affine_infeasibility_certificate(
    data: _ConicData, resid: np.ndarray
) -> InfeasibilityCertificate | None:
    """Certificate when the equality system alone is contradictory."""
    y, mu = (-resid * data.scale)[: data.n_eq], (-resid * data.scale)[data.n_eq :]
    return _verify_certificate(data.instance, y, mu)


def _true_residuals(data: _ConicData, instance: SdpInstance, x_vec):
    """(equality residual inf-norm, inequality violation inf-norm) of an iterate."""
    evaluation = data.unscaled_evaluation(x_vec[: data.D])
    eq_res = (
        float(np.max(np.abs(evaluation[: data.n_eq] - instance.eq_rhs)))
        if data.n_eq
        else 0.0
    )
    slacks = instance.ineq_rhs - evaluation[data.n_eq :]
    ineq_viol = float(np.max(np.maximum(-slacks, 0.0))) if data.n_ineq else 0.0
    return eq_res, ineq_viol


def _iterate_dual(data, instance, c_vec, settings, x0):
    """ADMM on the dual pair A^T y + S = C with the primal iterate as multiplier.

    One eigendecomposition per iteration both projects the dual slack and
    rebuilds X = sigma * proj(-M), so X stays PSD with X S = 0 exactly; only
    affine feasibility has to converge, and optima land on low-rank faces.
    """
    D = data.D
    x_vec = x0.copy()
    s_vec = np.zeros_like(x0)
    sigma = 1.0
    rhs_scale = float(np.max(np.abs(data.rhs))) if data.rhs.size else 0.0
    tol_con = settings.eps_abs + settings.eps_rel * rhs_scale
    obj_scale = max(1.0, float(np.max(np.abs(c_vec))))

    best = None
    best_combined = float("inf")
    last_progress_iter = 0
    status = "max_iters"
    eq_res = ineq_viol = dual_res = float("inf")
    certificate = None
    iters_used = settings.max_iters

    for it in range(1, settings.max_iters + 1):
        rhs = data.h / sigma - data.G @ (x_vec / sigma + s_vec - c_vec)
        y = data.solve_normal(rhs)
        r = data.GT @ y  # A^T y in original units (row scaling folds into y)
        r = OVER_RELAXATION * r + (1.0 - OVER_RELAXATION) * (c_vec - s_vec)
        m_vec = c_vec - r - x_vec / sigma
        s_vec, neg = data.split_cone(m_vec)
        x_new = sigma * neg

        dual_res = float(np.max(np.abs(x_new - x_vec))) / sigma
        prim_change = float(np.linalg.norm(x_new - x_vec))
        x_vec = x_new

        full_res = data.G @ x_vec - data.h
        prim_res = (
            float(np.max(np.abs(full_res * data.row_norms))) if full_res.size else 0.0
        )
        eq_res, ineq_viol = _true_residuals(data, instance, x_vec)

        combined = max(prim_res, eq_res, ineq_viol)
        if not np.isfinite(combined):
            raise NumericalBreakdownError(
                f"solver iterates became non-finite at iteration {it}"
            )
        if combined < 0.999 * best_combined:
            best_combined = combined
            last_progress_iter = it
            best = (x_vec.copy(), eq_res, ineq_viol, dual_res)

        pobj = float(c_vec @ x_vec)
        dobj = float(data.h @ y)
        gap_tol = settings.eps_abs + settings.eps_rel * max(abs(pobj), abs(dobj))
        dual_tol = settings.eps_abs + settings.eps_rel * obj_scale
        if (
            prim_res <= tol_con
            and ineq_viol <= tol_con
            and dual_res <= dual_tol
            and abs(pobj - dobj) <= max(gap_tol, 10.0 * tol_con)
        ):
            status = "optimal"
            iters_used = it
            break

        if it - last_progress_iter >= STALL_WINDOW and combined > 50 * tol_con:
            cert = _certificate_from_projections(data, x_vec)
            if cert is not None:
                status = "infeasible"
                certificate = cert
                iters_used = it
                break
            last_progress_iter = it  # do not retry immediately

        if it % RHO_ADAPT_EVERY == 0:
            rp = float(np.linalg.norm(full_res))
            rd = prim_change / sigma
            if rd > 10.0 * rp and sigma < RHO_MAX:
                sigma *= 2.0
            elif rp > 10.0 * rd and sigma > RHO_MIN:
                sigma *= 0.5

    if status == "max_iters" and best is not None:
        x_vec, eq_res, ineq_viol, dual_res = best
    return status, x_vec, eq_res, ineq_viol, dual_res, iters_used, certificate


def _iterate_primal(data, instance, c_vec, settings, x0):
    """Over-relaxed ADMM alternating the affine and cone projections directly.

    Slower to high accuracy than the dual variant, but when the objective
    ties over a face it settles near the face's center instead of a vertex,
    mimicking the max-rank solutions interior-point methods return.
    """
    z = x0.copy()
    u = np.zeros_like(z)
    rho = 1.0
    rhs_scale = float(np.max(np.abs(data.rhs))) if data.rhs.size else 0.0
    tol_con = settings.eps_abs + settings.eps_rel * rhs_scale

    best = None
    best_combined = float("inf")
    last_progress_iter = 0
    status = "max_iters"
    eq_res = ineq_viol = dual_res = float("inf")
    certificate = None
    iters_used = settings.max_iters

    for it in range(1, settings.max_iters + 1):
        w = z - u - c_vec / rho
        x = data.project_affine(w)
        xr = OVER_RELAXATION * x + (1.0 - OVER_RELAXATION) * z
        z_new = data.project_cone(xr + u)
        u += xr - z_new
        dual_res = rho * float(np.max(np.abs(z_new - z)))
        dual_change = rho * float(np.linalg.norm(z_new - z))
        z = z_new

        eq_res, ineq_viol = _true_residuals(data, instance, z)
        split = float(np.max(np.abs(x - z)))
        combined = max(eq_res, ineq_viol, split)
        if not np.isfinite(combined):
            raise NumericalBreakdownError(
                f"solver iterates became non-finite at iteration {it}"
            )
        if combined < 0.999 * best_combined:
            best_combined = combined
            last_progress_iter = it
            best = (z.copy(), eq_res, ineq_viol, dual_res)

        split_tol = settings.eps_abs + settings.eps_rel * max(
            float(np.max(np.abs(x))), float(np.max(np.abs(z)))
        )
        if (
            eq_res <= tol_con
            and ineq_viol <= tol_con
            and split <= split_tol
            and dual_res <= settings.eps_abs + settings.eps_rel
        ):
            status = "optimal"
            iters_used = it
            break

        if it - last_progress_iter >= STALL_WINDOW and combined > 50 * tol_con:
            cert = _certificate_from_projections(data, z)
            if cert is not None:
                status = "infeasible"
                certificate = cert
                iters_used = it
                break
            last_progress_iter = it

        if it % RHO_ADAPT_EVERY == 0:
            rp = float(np.linalg.norm(x - z))
            if rp > 10.0 * dual_change and rho < RHO_MAX:
                rho *= 2.0
                u *= 0.5
            elif dual_change > 10.0 * rp and rho > RHO_MIN:
                rho *= 0.5
                u *= 2.0

    if status == "max_iters" and best is not None:
        z, eq_res, ineq_viol, dual_res = best
    return status, z, eq_res, ineq_viol, dual_res, iters_used, certificate


def solve(
    instance: SdpInstance,
    C: np.ndarray | None = None,
    settings: SolverSettings | None = None,
    warm_start: np.ndarray | None = None,
    method: str = "dual",
) -> SolveResult:
    """Minimize tr(C Z) over the instance's constraints and the PSD cone.

    Returns optimal with residuals below the requested tolerances, infeasible
    with a verified certificate attached, or max_iters with the best iterate
    found.  warm_start, when given, seeds the iteration with a previous Z.

    Two variants of the same splitting are available.  "dual" (the default)
    runs the ADMM on the dual pair, keeping the primal iterate exactly PSD
    and complementary to the dual slack, which identifies low-rank faces
    quickly.  "primal" alternates projections of the primal iterate itself;
    it settles near the center of an optimal face when the objective ties,
    the way interior-point solvers do, which the first rank-direction update
    needs in order to see the full eigenstructure.
    """
    settings = settings or SolverSettings()
    if method not in ("dual", "primal"):
        raise ValueError(f"unknown method {method!r}")
    if C is None:
        C = instance.objective if instance.objective is not None else np.eye(instance.side)
    C = np.asarray(C, dtype=float)
    if C.shape != (instance.side, instance.side):
        raise ValueError("objective matrix side does not match the instance")
    if np.max(np.abs(C - C.T)) > 1e-12 * max(1.0, float(np.max(np.abs(C)))):
        raise ValueError("objective matrix must be symmetric")

    t0 = time.perf_counter()
    data = _ConicData(instance, settings.scaling)
    space = data.space
    D = data.D
    total = D + data.n_ineq

    resid, resid_inf = data.affine_least_squares_residual()
    if resid_inf > 1e-9 * (1.0 + float(np.max(np.abs(data.h)))):
        cert = _affine_infeasibility_certificate(data, resid)
        Z = np.zeros((instance.side, instance.side))
        lifted = LiftedSolution(Z=Z, eigenvalues=np.zeros(instance.side))
        status = "infeasible" if cert is not None else "max_iters"
        return SolveResult(
            status=status,
            Z=lifted,
            objective=0.0,
            iterations=0,
            wall_time=time.perf_counter() - t0,
            eq_residual=resid_inf,
            ineq_violation=0.0,
            dual_residual=float("inf"),
            instance=instance,
            certificate=cert,
        )

    c_vec = np.zeros(total)
    c_vec[:D] = space.vec(0.5 * (C + C.T))

    x0 = np.zeros(total)
    if warm_start is not None:
        x0[:D] = space.vec(np.asarray(warm_start, dtype=float))
    else:
        x0[:D] = space.vec(np.eye(instance.side))
    if data.n_ineq:
        ev = data.unscaled_evaluation(x0[:D])
        x0[D:] = np.maximum(instance.ineq_rhs - ev[data.n_eq :], 0.0)

    loop = _iterate_dual if method == "dual" else _iterate_primal
    status, x_vec, eq_res, ineq_viol, dual_res, iters_used, certificate = loop(
        data, instance, c_vec, settings, x0
    )

    Zm = space.mat(x_vec[:D])
    eigenvalues = np.linalg.eigvalsh(Zm)[::-1]
    lifted = LiftedSolution(Z=Zm, eigenvalues=eigenvalues)
    objective = float(np.tensordot(C, Zm))
    wall = time.perf_counter() - t0
    logger.debug(
        "solve finished: status=%s iters=%d eq_res=%.3e ineq=%.3e obj=%.6g",
        status,
        iters_used,
        eq_res,
        ineq_viol,
        objective,
    )
    return SolveResult(
        status=status,
        Z=lifted,
        objective=objective,
        iterations=iters_used,
        wall_time=wall,
        eq_residual=eq_res,
        ineq_violation=ineq_viol,
        dual_residual=dual_res,
        instance=instance,
        certificate=certificate,
    )


def certify(result: SolveResult) -> InfeasibilityCertificate:
    """Re-verify and return the infeasibility certificate of a solve result."""
    if result.status != "infeasible":
        raise ValueError("certify requires a result with status 'infeasible'")
    cert = result.certificate
    if cert is None:
        raise ValueError("infeasible result carries no certificate")
    checked = _verify_certificate(result.instance, cert.y, cert.mu)
    if checked is None:
        raise ValueError("certificate failed numerical verification")
    return checked


# ---------------------------------------------------------------------------
# Sparse SDPA text format


def _fmt(v: float) -> str:
    return repr(float(v))


def export_sdpa(instance: SdpInstance, C: np.ndarray | None = None) -> str:
    """Serialize the instance as sparse SDPA (.dat-s) text.

    The file encodes the standard SDPA pair whose dual is our problem
    min tr(C Z) s.t. tr(A_k Z) = a_k, tr(B_j Z) <= b_j, Z PSD: the objective
    matrix enters negated, inequalities gain a diagonal slack block, and the
    right-hand sides become the SDPA cost vector.  Constraints are written
    equalities first, matrix entries upper-triangle row-major, so equal
    instances export byte-identical text.  A leading comment records the
    target rank, which the standard format cannot carry.
    """
    if C is None:
        C = instance.objective if instance.objective is not None else np.eye(instance.side)
    n = instance.side
    n_ineq = instance.num_inequalities
    m = instance.num_equalities + n_ineq
    lines = [f"* rank target = {instance.dim}", f"{m}"]
    if n_ineq:
        lines.append("2")
        lines.append(f"{n} -{n_ineq}")
    else:
        lines.append("1")
        lines.append(f"{n}")
    rhs = list(instance.eq_rhs) + list(instance.ineq_rhs)
    lines.append(" ".join(_fmt(v) for v in rhs))

    def emit(matno: int, blkno: int, M: np.ndarray):
        for i in range(M.shape[0]):
            for j in range(i, M.shape[1]):
                if M[i, j] != 0.0:
                    lines.append(f"{matno} {blkno} {i + 1} {j + 1} {_fmt(M[i, j])}")

    emit(0, 1, -np.asarray(C, dtype=float))
    matno = 1
    for A in instance.eq_mats:
        emit(matno, 1, A)
        matno += 1
    for j, B in enumerate(instance.ineq_mats):
        emit(matno, 1, B)
        lines.append(f"{matno} 2 {j + 1} {j + 1} {_fmt(1.0)}")
        matno += 1
    return "\n".join(lines) + "\n"


def parse_sdpa(text: str, dim: int | None = None) -> tuple[SdpInstance, np.ndarray]:
    """Parse sparse SDPA text produced by export_sdpa back into an instance.

    Returns (instance, C).  The rank target is read from the leading comment
    when present; otherwise the dim argument is required.
    """
    rank_target = dim
    tokens: list[str] = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("*") or stripped.startswith('"'):
            if "rank target" in stripped and "=" in stripped:
                rank_target = int(stripped.split("=")[1])
            continue
        tokens.extend(stripped.replace(",", " ").split())
    if rank_target is None:
        raise ValueError("no rank-target comment in file and no dim given")

    pos = 0

    def take() -> str:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    m = int(float(take()))
    nblocks = int(float(take()))
    blocks = [int(float(take())) for _ in range(nblocks)]
    side = blocks[0]
    if side <= 0:
        raise ValueError("first SDPA block must be the PSD block")
    n_ineq = -blocks[1] if nblocks > 1 else 0
    if nblocks > 2 or (nblocks == 2 and blocks[1] >= 0):
        raise ValueError("expected one PSD block plus an optional diagonal slack block")
    rhs = np.array([float(take()) for _ in range(m)])
    n_eq = m - n_ineq

    C = np.zeros((side, side))
    eq_mats = [np.zeros((side, side)) for _ in range(n_eq)]
    ineq_mats = [np.zeros((side, side)) for _ in range(n_ineq)]
    while pos < len(tokens):
        matno = int(float(take()))
        blkno = int(float(take()))
        i = int(float(take())) - 1
        j = int(float(take())) - 1
        v = float(take())
        if blkno == 1:
            if matno == 0:
                target = C
            elif matno <= n_eq:
                target = eq_mats[matno - 1]
            else:
                target = ineq_mats[matno - 1 - n_eq]
            target[i, j] = v
            target[j, i] = v
        elif blkno == 2:
            if matno <= n_eq or i != j or i != matno - 1 - n_eq or v != 1.0:
                raise ValueError("unexpected slack-block entry")
        else:
            raise ValueError(f"unknown block {blkno}")

    instance = SdpInstance(
        side=side,
        dim=rank_target,
        eq_mats=eq_mats,
        eq_rhs=rhs[:n_eq],
        ineq_mats=ineq_mats,
        ineq_rhs=rhs[n_eq:],
    )
    return instance, -C
