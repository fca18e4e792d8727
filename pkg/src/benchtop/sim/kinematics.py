"""Planar 6-joint chain kinematics: forward pass, Jacobian, damped IK."""

import numpy as np

N_JOINTS = 6


def forward_kinematics(angles, links, base):
    """Positions of every joint plus the end effector.

    Returns (points, pose): ``points`` is (7, 2) from base to end effector,
    ``pose`` is (x, y, orientation) with orientation the angle sum.
    """
    angles = np.asarray(angles, dtype=np.float64)
    links = np.asarray(links, dtype=np.float64)
    pts = np.empty((N_JOINTS + 1, 2))
    pts[0] = base
    theta = 0.0
    for i in range(N_JOINTS):
        theta += angles[i]
        pts[i + 1, 0] = pts[i, 0] + links[i] * np.cos(theta)
        pts[i + 1, 1] = pts[i, 1] + links[i] * np.sin(theta)
    return pts, np.array([pts[-1, 0], pts[-1, 1], theta])


def end_effector(angles, links, base):
    return forward_kinematics(angles, links, base)[0][-1]


def jacobian(angles, links, base):
    """2x6 position Jacobian of the end effector."""
    pts, _ = forward_kinematics(angles, links, base)
    ee = pts[-1]
    jac = np.empty((2, N_JOINTS))
    for i in range(N_JOINTS):
        r = ee - pts[i]
        jac[0, i] = -r[1]
        jac[1, i] = r[0]
    return jac


def inverse_kinematics(
    target_xy,
    current,
    links,
    base,
    damping=0.1,
    max_iters=200,
    tol=1e-3,
):
    """Damped-least-squares IK toward a position target.

    Returns (angles, reached). Targets beyond the chain's total reach are
    flagged unreachable immediately but still get a best-effort solution.
    """
    target = np.asarray(target_xy, dtype=np.float64)[:2]
    links = np.asarray(links, dtype=np.float64)
    angles = np.array(current, dtype=np.float64)
    reach = links.sum()
    unreachable = np.linalg.norm(target - np.asarray(base)) > reach
    lam2 = damping * damping
    eye = np.eye(2)
    for _ in range(max_iters):
        ee = end_effector(angles, links, base)
        err = target - ee
        if np.linalg.norm(err) < tol:
            return angles, not unreachable
        jac = jacobian(angles, links, base)
        # dtheta = J^T (J J^T + lambda^2 I)^-1 err
        core = jac @ jac.T + lam2 * eye
        angles = angles + jac.T @ np.linalg.solve(core, err)
        np.clip(angles, -np.pi, np.pi, out=angles)
    reached = np.linalg.norm(target - end_effector(angles, links, base)) < tol
    return angles, reached and not unreachable
