"""Solve the planar two-link reach problem with an obstacle and print the trace.

The unit-link arm must reach (1, 1); a disc of radius 0.5 at (1, 0) rules out
the elbow-down root, so the solver has to land on the elbow at (0, 1).
"""

import numpy as np

import cidgik as ck
from cidgik.robots import planar_two_link


def main():
    robot = planar_two_link()
    goal = ck.Goal(end_effector=0, position=np.array([1.0, 1.0]))
    workspace = ck.WorkspaceSpec(
        spheres=[ck.Sphere(center=np.array([1.0, 0.0]), radius=0.5)]
    )
    qcqp = ck.assemble_qcqp(robot, [goal], workspace)
    print("constraint counts:", qcqp.constraint_counts())

    result = ck.cidgik_solve(qcqp)
    print(f"status: {result.status} after {result.iterations} iterations")
    for k, record in enumerate(result.trace.records):
        print(f"  iteration {k + 1}: h = {record.h:.3e} ({record.solver_status})")
    print("elbow:", np.round(result.X.ravel(), 6))
    print("theta:", np.round(result.theta, 6))
    print(f"position error: {result.position_error:.2e} m")


if __name__ == "__main__":
    main()
