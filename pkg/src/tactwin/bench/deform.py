"""Reference deformed configuration: tip dragged to a rotated pose by springs."""

from __future__ import annotations

import numpy as np

from ..scene import Scene, attach_tip_springs


def rotation_angle_deg(rest_points, current_points):
    """Best-fit rigid rotation angle between two point clouds (Kabsch)."""
    a = np.asarray(rest_points, dtype=float)
    b = np.asarray(current_points, dtype=float)
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    u, _, vt = np.linalg.svd(a.T @ b)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    c = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    return float(np.degrees(np.arccos(c)))


def apply_deformed_config(scene: Scene, load_steps=12, **solve_kw):
    """Drive the tip toward its rotated pose and report what was achieved.

    Returns (positions, info) where info carries the commanded and achieved
    tip rotation plus solver counters. The springs stay attached so callers
    can continue from this state.
    """
    attach_tip_springs(scene)
    q, rep = scene.model.solve_equilibrium(load_steps=load_steps, **solve_kw)
    tips = scene.meta["tip_nodes"]
    achieved = rotation_angle_deg(scene.mesh.vertices0[tips], q[tips])
    info = {
        "commanded_deg": float(scene.meta["tip_angle_deg"]),
        "achieved_deg": achieved,
        "newton_iterations": rep.newton_iterations,
        "load_increments": rep.load_steps,
        "residual_norm": rep.residual_norm,
    }
    return q, info
