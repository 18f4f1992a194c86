import numpy as np
import pytest

from cidgik import (
    Goal,
    GraphError,
    Sphere,
    WorkspaceSpec,
    assemble_qcqp,
    build_graph,
    forward_kinematics,
    incidence_matrix,
    joint_points,
    residuals,
)
from cidgik.graph import feasible_points, squared_distance_vector
from cidgik.kinematics import load_robot
from cidgik.robots import planar_chain_document, random_coplanar_chain
from conftest import sample_angles


def pose_goals(robot, theta):
    poses, _ = forward_kinematics(robot, theta)
    return [
        Goal(end_effector=k, position=p.position, direction=p.direction)
        for k, p in enumerate(poses)
    ]


def test_fig2_graph_counts(fig2_robot):
    goals = pose_goals(fig2_robot, np.array([0.2, -0.4, 0.8]))
    graph = build_graph(fig2_robot, goals)
    assert graph.num_variables == 4  # p, q of the two unanchored joints
    assert graph.num_anchors == 4  # base p, q plus position and direction anchors


def test_planar_2r_graph(planar_2r):
    graph = build_graph(planar_2r, [Goal(end_effector=0, position=np.array([1.0, 1.0]))])
    assert graph.num_variables == 1
    assert graph.num_anchors == 2
    assert sorted(e.weight for e in graph.edges) == [1.0, 1.0]


def test_fully_anchored_robot_rejected():
    robot = load_robot(
        {
            "dimension": 3,
            "joints": [
                {
                    "name": "a",
                    "parent": "base",
                    "translation": [0.0, 0.0, 0.1],
                    "rotation_rpy": [0.0, 0.0, 0.0],
                    "axis": [0.0, 0.0, 1.0],
                }
            ],
            "end_effectors": [{"parent": "a", "tip": [0.2, 0.0, 0.0]}],
        }
    )
    with pytest.raises(GraphError, match="no unanchored joints"):
        build_graph(robot, [Goal(end_effector=0, position=np.array([0.2, 0.0, 0.1]))])


def test_goal_validation(planar_2r):
    with pytest.raises(GraphError, match="unknown end-effector"):
        build_graph(planar_2r, [Goal(end_effector=3, position=np.array([1.0, 1.0]))])
    with pytest.raises(GraphError, match="at least one goal"):
        build_graph(planar_2r, [])
    with pytest.raises(GraphError, match="unit vector"):
        build_graph(
            planar_2r,
            [
                Goal(
                    end_effector=0,
                    position=np.array([1.0, 1.0]),
                    direction=np.array([2.0, 0.0]),
                )
            ],
        )


def test_incidence_single_edge_and_column_sums(planar_2r):
    graph = build_graph(planar_2r, [Goal(end_effector=0, position=np.array([1.0, 1.0]))])
    B = incidence_matrix(graph)
    assert B.shape == (3, 2)
    for e_idx, e in enumerate(graph.edges):
        col = B[:, e_idx]
        assert col[e.tail] == -1.0 and col[e.head] == 1.0
        assert col.sum() == 0.0


def test_incidence_distance_identity():
    robot = random_coplanar_chain(5, seed=4)
    rng = np.random.Generator(np.random.Philox(key=17))
    theta = sample_angles(rng, 5)
    goals = pose_goals(robot, theta)
    graph = build_graph(robot, goals)
    X = feasible_points(assemble_qcqp(robot, goals), theta)
    P = np.hstack([X, graph.anchors])
    B = incidence_matrix(graph)
    measured = np.diag(B.T @ P.T @ P @ B)
    np.testing.assert_allclose(measured, squared_distance_vector(graph), atol=1e-10)


def test_graph_is_acyclic_by_orientation(chain_6dof):
    goals = pose_goals(chain_6dof, np.zeros(6))
    graph = build_graph(chain_6dof, goals)
    assert all(e.tail < e.head for e in graph.edges)  # topological by index


def test_six_edges_per_consecutive_unanchored_pair(chain_6dof):
    goals = pose_goals(chain_6dof, np.zeros(6))
    graph = build_graph(chain_6dof, goals)
    label_of = {lab: v for v, lab in enumerate(graph.variable_labels)}
    # joints 2..5 (0-based 1..5 unanchored); count edges within pairs (i, i+1)
    for i in range(1, 5):
        pair_vertices = {
            label_of[("p", i)],
            label_of[("q", i)],
            label_of[("p", i + 1)],
            label_of[("q", i + 1)],
        }
        inside = [
            e for e in graph.edges if e.tail in pair_vertices and e.head in pair_vertices
        ]
        assert len(inside) == 6


def test_assemble_counts_toy(toy_qcqp):
    counts = toy_qcqp.constraint_counts()
    assert counts["equalities"] == 2
    assert counts["obstacle_inequalities"] == 1
    assert counts["planes"] == 0


def test_assemble_no_obstacles(planar_2r):
    qcqp = assemble_qcqp(planar_2r, [Goal(end_effector=0, position=np.array([1.0, 1.0]))])
    assert qcqp.spheres == []
    assert qcqp.constraint_counts()["obstacle_inequalities"] == 0


def test_assemble_obstacle_count_6dof(chain_6dof):
    goals = pose_goals(chain_6dof, np.array([0.4, 0.5, -0.3, 0.8, 0.2, -0.6]))
    spheres = [
        Sphere(center=np.array([2.0 + i, 0.0, 0.0]), radius=0.1) for i in range(6)
    ]
    qcqp = assemble_qcqp(chain_6dof, goals, WorkspaceSpec(spheres=spheres))
    n_unanchored = sum(not a for a in chain_6dof.anchored)
    assert qcqp.constraint_counts()["obstacle_inequalities"] == 2 * n_unanchored * 6


def test_residuals_feasible_and_perturbed(chain_6dof):
    rng = np.random.Generator(np.random.Philox(key=23))
    theta = sample_angles(rng, 6)
    goals = pose_goals(chain_6dof, theta)
    ws = WorkspaceSpec(spheres=[Sphere(center=np.array([0.0, 0.0, -3.0]), radius=0.4)])
    qcqp = assemble_qcqp(chain_6dof, goals, ws)
    X = feasible_points(qcqp, theta)
    r = residuals(qcqp, X)
    assert r.equality < 1e-9
    assert r.inequality == 0.0
    assert r.plane == 0.0

    # drag one point to the obstacle centre: violation is the full radius^2
    X2 = X.copy()
    X2[:, 0] = np.array([0.0, 0.0, -3.0])
    r2 = residuals(qcqp, X2)
    assert r2.inequality == pytest.approx(0.4**2)


def test_residuals_empty_sets(planar_2r):
    qcqp = assemble_qcqp(planar_2r, [Goal(end_effector=0, position=np.array([1.0, 1.0]))])
    X = np.array([[0.0], [1.0]])
    r = residuals(qcqp, X)
    assert r.inequality == 0.0 and r.plane == 0.0
    assert r.equality < 1e-12


def test_equality_residuals_vanish_at_any_theta(chain_6dof):
    rng = np.random.Generator(np.random.Philox(key=29))
    for _ in range(10):
        theta = sample_angles(rng, 6)
        goals = pose_goals(chain_6dof, theta)
        qcqp = assemble_qcqp(chain_6dof, goals)
        assert residuals(qcqp, feasible_points(qcqp, theta)).equality < 1e-9


def test_merging_coincident_points():
    """A child origin one unit along the parent axis coincides with q_parent."""
    robot = load_robot(
        {
            "dimension": 3,
            "joints": [
                {
                    "name": "a",
                    "parent": "base",
                    "translation": [0.0, 0.0, 0.2],
                    "rotation_rpy": [0.0, 0.0, 0.0],
                    "axis": [0.0, 0.0, 1.0],
                },
                {
                    "name": "b",
                    "parent": "a",
                    "translation": [0.0, 0.0, 0.3],
                    "rotation_rpy": [0.0, 0.0, 0.0],
                    "axis": [0.0, 1.0, 0.0],
                },
                {
                    "name": "c",
                    "parent": "b",
                    # exactly 1.0 along b's axis: p_c lands on q_b
                    "translation": [0.0, 1.0, 0.0],
                    "rotation_rpy": [0.0, 0.0, 0.0],
                    "axis": [0.0, 1.0, 0.0],
                },
            ],
            "end_effectors": [{"parent": "c", "tip": [0.3, 0.0, 0.0]}],
        }
    )
    theta = np.array([0.3, -0.4, 0.9])
    goals = pose_goals(robot, theta)
    graph = build_graph(robot, goals)
    # q_b and p_c merged into one vertex; no zero-weight edges survive
    assert ("p", 2) in graph.merged or ("q", 1) in graph.merged
    assert all(e.weight > 1e-12 for e in graph.edges)
    qcqp = assemble_qcqp(robot, goals)
    assert residuals(qcqp, feasible_points(qcqp, theta)).equality < 1e-9
