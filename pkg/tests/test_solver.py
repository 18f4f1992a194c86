from pathlib import Path

import numpy as np
import pytest

from cidgik import (
    Goal,
    SdpInstance,
    build_toy_instance,
    assemble_qcqp,
    certify,
    direction_matrix,
    excess_rank,
    export_sdpa,
    lift,
    parse_sdpa,
    project_psd,
    solve,
)
from cidgik.solver import NumericalBreakdownError, SolverSettings

GOLDEN = Path(__file__).parent / "data" / "toy_identity.dat-s"


def test_settings_validation():
    with pytest.raises(ValueError):
        SolverSettings(eps_abs=0.0)
    with pytest.raises(ValueError):
        SolverSettings(max_iters=0)


def test_project_psd_basics():
    M = np.diag([1.0, -1.0])
    np.testing.assert_allclose(project_psd(M), np.diag([1.0, 0.0]), atol=1e-14)
    rng = np.random.Generator(np.random.Philox(key=2))
    A = rng.normal(size=(6, 6))
    P = A @ A.T  # already PSD
    np.testing.assert_allclose(project_psd(P), P, atol=1e-12)
    with pytest.raises(ValueError):
        project_psd(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        project_psd(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_project_psd_is_nearest():
    rng = np.random.Generator(np.random.Philox(key=3))
    M = rng.normal(size=(5, 5))
    M = 0.5 * (M + M.T)
    best = project_psd(M)
    dist = np.linalg.norm(best - M)
    for _ in range(1000):
        A = rng.normal(size=(5, 5))
        sample = A @ A.T
        assert np.linalg.norm(sample - M) >= dist - 1e-12


def test_toy_solve_feasible():
    toy = build_toy_instance()
    result = solve(toy, np.eye(3))
    assert result.status == "optimal"
    eq, slack = (
        np.array([np.tensordot(A, result.Z.Z) for A in toy.eq_mats]) - toy.eq_rhs,
        toy.ineq_rhs - np.array([np.tensordot(B, result.Z.Z) for B in toy.ineq_mats]),
    )
    assert np.max(np.abs(eq)) < 1e-6
    assert np.min(slack) > -1e-6
    assert np.min(result.Z.eigenvalues) >= -10 * SolverSettings().eps_abs


def test_toy_convex_iteration_concentrates_rank_one():
    toy = build_toy_instance()
    result = solve(toy, np.eye(3), method="primal")
    C = direction_matrix(result.Z.Z, 1).C
    warm = result.Z.Z
    for _ in range(8):
        result = solve(toy, C, warm_start=warm)
        h = excess_rank(result.Z.Z, 1)
        if h < 1e-6:
            break
        C = direction_matrix(result.Z.Z, 1).C
        warm = result.Z.Z
    assert h < 1e-6
    z = result.Z.Z[:, 2]  # last column of the rank-1 solution zz^T with s=1
    np.testing.assert_allclose(z, [0.0, 1.0, 1.0], atol=1e-4)


def test_zero_cost_returns_any_feasible():
    toy = build_toy_instance()
    result = solve(toy, np.zeros((3, 3)))
    assert result.status == "optimal"
    assert result.objective == 0.0


def test_contradictory_equalities_infeasible():
    instance = SdpInstance(
        side=2,
        dim=1,
        eq_mats=[np.eye(2), np.eye(2)],
        eq_rhs=np.array([0.0, 1.0]),
    )
    result = solve(instance)
    assert result.status == "infeasible"
    cert = certify(result)
    assert cert.value < 0.0
    assert cert.min_eigenvalue > -1e-6


def test_unreachable_goal_certified(chain_6dof):
    goal = Goal(
        end_effector=0,
        position=np.array([1.5 * chain_6dof.reach, 0.0, 0.0]),
        direction=np.array([1.0, 0.0, 0.0]),
    )
    qcqp = assemble_qcqp(chain_6dof, [goal])
    result = solve(lift(qcqp), settings=SolverSettings(max_iters=8000))
    assert result.status in ("infeasible", "max_iters")
    if result.status == "infeasible":
        cert = certify(result)
        assert cert.value < -1e-6
        assert cert.min_eigenvalue >= -1e-6
        assert cert.mu.size == 0 or np.min(cert.mu) >= 0.0


def test_certify_requires_infeasible_status():
    toy = build_toy_instance()
    result = solve(toy)
    with pytest.raises(ValueError, match="infeasible"):
        certify(result)


def test_solver_determinism(toy_qcqp):
    instance = lift(toy_qcqp)
    a = solve(instance, np.eye(instance.side))
    b = solve(instance, np.eye(instance.side))
    assert a.iterations == b.iterations
    assert a.Z.Z.tobytes() == b.Z.Z.tobytes()


def test_optimal_residual_contract(toy_qcqp):
    instance = lift(toy_qcqp)
    settings = SolverSettings()
    result = solve(instance, np.eye(instance.side), settings)
    assert result.status == "optimal"
    bound = settings.eps_abs + settings.eps_rel * float(np.max(np.abs(instance.eq_rhs)))
    assert result.eq_residual <= bound
    assert np.min(result.Z.eigenvalues) >= -10 * settings.eps_abs


def test_breakdown_on_nonfinite_objective(toy_qcqp):
    instance = lift(toy_qcqp)
    C = np.full((instance.side, instance.side), np.nan)
    with pytest.raises((NumericalBreakdownError, ValueError)):
        solve(instance, C)


# ---------------------------------------------------------------------------
# SDPA format


def test_sdpa_golden_file():
    toy = build_toy_instance()
    assert export_sdpa(toy, np.eye(3)) == GOLDEN.read_text()


def test_sdpa_round_trip_exact():
    toy = build_toy_instance()
    text = export_sdpa(toy, np.eye(3))
    parsed, C = parse_sdpa(text)
    assert parsed.side == 3 and parsed.dim == 1
    for a, b in zip(toy.eq_mats, parsed.eq_mats):
        np.testing.assert_array_equal(a, b)
    for a, b in zip(toy.ineq_mats, parsed.ineq_mats):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(parsed.eq_rhs, toy.eq_rhs)
    np.testing.assert_array_equal(parsed.ineq_rhs, toy.ineq_rhs)
    np.testing.assert_array_equal(C, np.eye(3))
    assert export_sdpa(parsed, C) == text


def test_sdpa_no_slack_block_without_inequalities():
    instance = SdpInstance(
        side=2, dim=1, eq_mats=[np.eye(2)], eq_rhs=np.array([1.0])
    )
    text = export_sdpa(instance, np.eye(2))
    lines = text.splitlines()
    assert lines[2] == "1"  # single PSD block
    assert lines[3] == "2"
    parsed, _ = parse_sdpa(text)
    assert parsed.num_inequalities == 0


def test_sdpa_export_stable_for_robot_instance(toy_qcqp):
    instance = lift(toy_qcqp)
    text1 = export_sdpa(instance, np.eye(instance.side))
    text2 = export_sdpa(instance, np.eye(instance.side))
    assert text1 == text2
    parsed, _ = parse_sdpa(text1)
    assert parsed.num_equalities == instance.num_equalities
    assert parsed.num_inequalities == instance.num_inequalities
