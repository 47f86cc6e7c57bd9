"""Quasi-static corotational FEM with pressure-loaded internal cavities.

Unit system: mm, N, MPa (1 MPa = 1 N/mm^2). Config-facing pressures are Pa
and converted on entry; density stays kg/m^3 and gravity mm/s^2, so nodal
gravity forces carry a 1e-12 factor (kg/m^3 * mm^3 * mm/s^2 -> N).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import (
    InvertedElement,
    NotConverged,
    SingularSystem,
    UnknownCavity,
)
from ..mesh import TetMesh
from . import kernels

STANDARD_GRAVITY_MM_S2 = 9810.0


@dataclass(frozen=True)
class MaterialParams:
    """Isotropic linear material. youngs_modulus in MPa, density in kg/m^3."""

    youngs_modulus: float
    poisson_ratio: float
    density: float = 1000.0

    def __post_init__(self):
        if self.youngs_modulus <= 0:
            raise ValueError("youngs_modulus must be positive")
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise ValueError("poisson_ratio must be in [0, 0.5)")
        if self.density < 0:
            raise ValueError("density must be nonnegative")


@dataclass
class SpringAttachment:
    """Zero-rest-length spring from a node to a world-space target point."""

    node: int
    target: np.ndarray
    stiffness: float  # N/mm

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=float)


@dataclass
class SolveReport:
    converged: bool
    load_steps: int
    newton_iterations: int
    residual_norm: float
    backend: str = field(default_factory=lambda: kernels.backend_name)


def _signed_cavity_volume(positions, triangles):
    p0 = positions[triangles[:, 0]]
    p1 = positions[triangles[:, 1]]
    p2 = positions[triangles[:, 2]]
    return float(np.einsum("ij,ij->i", p0, np.cross(p1, p2)).sum() / 6.0)


class FemModel:
    """Element data, loads, and the equilibrium solver for one mesh."""

    def __init__(self, mesh: TetMesh, material: MaterialParams,
                 gravity=(0.0, 0.0, -STANDARD_GRAVITY_MM_S2)):
        self.mesh = mesh
        self.material = material
        self.gravity = np.asarray(gravity, dtype=float)
        self.bm, self.ke, self.volumes = kernels.precompute(
            mesh.vertices0, mesh.tets, material.youngs_modulus, material.poisson_ratio)

        # cavity windings are normalized once so rest volume is positive,
        # which makes positive pressure inflate
        self.cavity_triangles = {}
        for name, tris in mesh.cavities.items():
            tris = np.array(tris, dtype=np.int64)
            vol = _signed_cavity_volume(mesh.vertices0, tris)
            if vol < 0:
                tris = tris[:, [0, 2, 1]]
            self.cavity_triangles[name] = tris
        self.pressures = {name: 0.0 for name in self.cavity_triangles}  # MPa

        self.springs: list[SpringAttachment] = []

        n = mesh.n_vertices
        dofs = (3 * mesh.tets[:, :, None].astype(np.int64) + np.arange(3)).reshape(-1, 12)
        self._rows = np.repeat(dofs, 12, axis=1).ravel()
        self._cols = np.tile(dofs, (1, 12)).ravel()
        self._free = np.ones(3 * n, dtype=bool)
        if mesh.fixed_nodes.size:
            self._free[(3 * mesh.fixed_nodes[:, None] + np.arange(3)).ravel()] = False
        self.nodal_loads = np.zeros((n, 3))  # dead loads, N

        # lumped gravitational load, constant in the quasi-static setting
        self._gravity_force = np.zeros((n, 3))
        share = (self.material.density * self.volumes * 1e-12)[:, None] * self.gravity / 4.0
        for k in range(4):
            np.add.at(self._gravity_force, mesh.tets[:, k], share)

    # ------------------------------------------------------------------ loads

    def set_pressure(self, cavity: str, pascals: float):
        if cavity not in self.pressures:
            raise UnknownCavity(f"no cavity named '{cavity}'")
        self.pressures[cavity] = float(pascals) * 1e-6  # Pa -> MPa

    def get_pressure_pa(self, cavity: str) -> float:
        if cavity not in self.pressures:
            raise UnknownCavity(f"no cavity named '{cavity}'")
        return self.pressures[cavity] * 1e6

    def fix_node(self, node: int):
        self._free[3 * node:3 * node + 3] = False

    def fix_dof(self, node: int, axis: int):
        self._free[3 * node + axis] = False

    def add_spring(self, node: int, target, stiffness: float):
        self.springs.append(SpringAttachment(int(node), target, float(stiffness)))

    def clear_springs(self):
        self.springs = []

    def cavity_volume(self, cavity: str, positions=None) -> float:
        if cavity not in self.cavity_triangles:
            raise UnknownCavity(f"no cavity named '{cavity}'")
        p = self.mesh.positions if positions is None else np.asarray(positions, dtype=float)
        return _signed_cavity_volume(p, self.cavity_triangles[cavity])

    def cavity_nodal_forces(self, cavity: str, positions, pressure_mpa: float):
        """Follower pressure load: P/3 times the triangle area vector per node."""
        if cavity not in self.cavity_triangles:
            raise UnknownCavity(f"no cavity named '{cavity}'")
        tris = self.cavity_triangles[cavity]
        p = np.asarray(positions, dtype=float)
        area_vec = 0.5 * np.cross(p[tris[:, 1]] - p[tris[:, 0]], p[tris[:, 2]] - p[tris[:, 0]])
        f = np.zeros_like(p)
        share = pressure_mpa * area_vec / 3.0
        for k in range(3):
            np.add.at(f, tris[:, k], share)
        return f

    def external_forces(self, positions, scale=1.0):
        f = scale * (self._gravity_force + self.nodal_loads)
        for name, tris in self.cavity_triangles.items():
            pr = self.pressures[name]
            if pr != 0.0:
                f += self.cavity_nodal_forces(name, positions, scale * pr)
        for s in self.springs:
            tgt = self._ramped_target(s, scale)
            f[s.node] += s.stiffness * (tgt - positions[s.node])
        return f

    def _ramped_target(self, spring: SpringAttachment, scale):
        if scale >= 1.0:
            return spring.target
        return (1.0 - scale) * self.mesh.vertices0[spring.node] + scale * spring.target

    # -------------------------------------------------------------- mechanics

    def _evaluate(self, positions, want_blocks=True, strict=True):
        f_int, blocks, min_detf = kernels.forces_and_blocks(
            positions, self.mesh.tets, self.bm, self.ke, self.mesh.vertices0,
            want_blocks)
        if min_detf <= 0.0:
            if strict:
                raise InvertedElement(
                    f"element inverted, min det(F) = {min_detf:g}")
            # transient inversion during continuation: recompute with the
            # reference kernel, whose reflection-fixed polar rotations give
            # finite restoring forces through det(F) <= 0
            f_int, blocks, _ = kernels.reference_forces_and_blocks(
                positions, self.mesh.tets, self.bm, self.ke,
                self.mesh.vertices0, want_blocks)
        self._last_min_detf = min_detf
        return f_int, blocks

    def internal_forces(self, positions):
        f_int, _ = self._evaluate(np.asarray(positions, dtype=float), want_blocks=False)
        return f_int

    def tangent_stiffness(self, positions):
        """Sparse symmetric stiffness (3n, 3n) including spring terms."""
        _, blocks = self._evaluate(np.asarray(positions, dtype=float))
        return self._assemble(blocks)

    def _assemble(self, blocks):
        n3 = 3 * self.mesh.n_vertices
        k = sp.coo_matrix((blocks.ravel(), (self._rows, self._cols)), shape=(n3, n3)).tocsr()
        if self.springs:
            diag = np.zeros(n3)
            for s in self.springs:
                diag[3 * s.node:3 * s.node + 3] += s.stiffness
            k = k + sp.diags(diag)
        return k

    def residual(self, positions, scale=1.0, strict=True):
        f_int, _ = self._evaluate(positions, want_blocks=False, strict=strict)
        return self.external_forces(positions, scale) - f_int

    # ----------------------------------------------------------------- solver

    def solve_equilibrium(self, load_steps=10, tol=2e-5, max_newton=60,
                          solver="direct", update_mesh=True, positions=None):
        """March external loads to full scale, running damped Newton at each
        increment and bisecting any increment whose Newton stalls.

        The warped-stiffness Jacobian is only accurate for small incremental
        rotations, so robustness comes from the load schedule, not from the
        line search: a failed increment is retried at half size down to a
        floor of 1/64 of the nominal increment.

        Starts from the mesh's current positions (warm start), so incremental
        pressure changes can use fewer steps. Fixed nodes keep their starting
        coordinates. Raises NotConverged / SingularSystem / InvertedElement.
        """
        q = np.array(self.mesh.positions if positions is None else positions, dtype=float)
        free = self._free
        f_full = self.external_forces(q, 1.0)
        f_ref = float(np.abs(f_full.ravel()[free]).max(initial=0.0))
        # absolute floor keeps the unloaded (or barely loaded) case from
        # chasing kernel rounding noise, which sits around 1e-13 N
        abs_tol = max(tol * f_ref, 1e-10)
        min_increment = 1.0 / (load_steps * 64.0)

        total_newton = 0
        increments = 0
        res_norm = np.inf
        reached = 0.0
        targets = [s / load_steps for s in range(1, load_steps + 1)]
        while targets:
            scale = targets[0]
            snapshot = q.copy()
            try:
                res_norm = self._newton(q, scale, abs_tol, max_newton, solver)
            except NotConverged:
                q[:] = snapshot
                if scale - reached <= min_increment:
                    raise
                targets.insert(0, 0.5 * (reached + scale))
                continue
            total_newton += self._last_iters
            increments += 1
            reached = scale
            targets.pop(0)
        # transient inversions are tolerated on the way; an inverted
        # equilibrium is not a valid result
        self._evaluate(q, want_blocks=False, strict=True)
        if update_mesh:
            self.mesh.positions = q
        return q, SolveReport(True, increments, total_newton, res_norm)

    def _newton(self, q, scale, abs_tol, max_newton, solver):
        free = self._free
        r = self.residual(q, scale, strict=False)
        rn = float(np.abs(r.ravel()[free]).max(initial=0.0))
        self._last_iters = 0
        for it in range(max_newton):
            if rn <= abs_tol and self._last_min_detf > 0.0:
                self._last_iters = it
                return rn
            k = self._assemble(self._evaluate(q, strict=False)[1])
            kff = k[free][:, free]
            dq = self._solve_linear(kff, r.ravel()[free], solver)
            q_new, r_new, rn_new = self._line_search(q, dq, r, rn, scale)
            if q_new is None:
                if rn <= abs_tol:
                    raise NotConverged(
                        f"equilibrium at load scale {scale:g} contains an "
                        f"inverted element (min det(F) {self._last_min_detf:g})")
                raise NotConverged(
                    f"line search stalled at load scale {scale:g}, residual {rn:g}")
            q[:] = q_new
            r, rn = r_new, rn_new
        r = self.residual(q, scale, strict=False)
        rn = float(np.abs(r.ravel()[free]).max(initial=0.0))
        if rn <= abs_tol and self._last_min_detf > 0.0:
            self._last_iters = max_newton
            return rn
        if rn <= abs_tol:
            raise NotConverged(
                f"equilibrium at load scale {scale:g} contains an inverted "
                f"element (min det(F) {self._last_min_detf:g})")
        raise NotConverged(
            f"Newton budget exhausted at load scale {scale:g}: residual {rn:g} > {abs_tol:g}")

    @property
    def _step_cap_mm(self):
        cap = getattr(self, "_step_cap_cache", None)
        if cap is None:
            p = self.mesh.vertices0[self.mesh.tets]
            edges = np.linalg.norm(p[:, 1:] - p[:, :1], axis=2)
            cap = float(np.mean(edges))
            self._step_cap_cache = cap
        return cap

    def _line_search(self, q, dq, r, rn, scale):
        free = self._free
        step = np.zeros(q.size)
        step[free] = dq
        step = step.reshape(-1, 3)
        # cap the update at one mean edge length to keep incremental
        # element rotations inside the Jacobian's trust region
        biggest = float(np.abs(step).max(initial=0.0))
        if biggest > self._step_cap_mm:
            step *= self._step_cap_mm / biggest
        r2 = float(np.linalg.norm(r.ravel()[free]))
        alpha = 1.0
        best = None
        for _ in range(12):
            q_try = q + alpha * step
            r_try = self.residual(q_try, scale, strict=False)
            rvec = r_try.ravel()[free]
            rn_try = float(np.abs(rvec).max(initial=0.0))
            r2_try = float(np.linalg.norm(rvec))
            if r2_try <= (1.0 - 1e-4 * alpha) * r2:
                return q_try, r_try, rn_try
            if best is None or r2_try < best[3]:
                best = (q_try, r_try, rn_try, r2_try)
            alpha *= 0.5
        # no sufficient decrease: crawl with the best sampled point if it
        # reduces the residual at all, otherwise report the stall
        if best is not None and best[3] < r2:
            return best[:3]
        return None, None, None

    def _solve_linear(self, kff, rhs, solver):
        if solver == "direct":
            x = spla.spsolve(kff.tocsc(), rhs)
            if not np.all(np.isfinite(x)):
                raise SingularSystem("direct solve produced non-finite values")
            return x
        if solver == "cg":
            ilu_diag = kff.diagonal()
            if np.any(ilu_diag <= 0):
                raise SingularSystem("non-positive diagonal in CG preconditioner")
            m = sp.diags(1.0 / ilu_diag)
            try:
                x, info = spla.cg(kff, rhs, rtol=1e-10, atol=0.0, maxiter=20 * kff.shape[0], M=m)
            except TypeError:  # scipy < 1.12 spells rtol as tol
                x, info = spla.cg(kff, rhs, tol=1e-10, atol=0.0, maxiter=20 * kff.shape[0], M=m)
            if info < 0:
                raise SingularSystem(f"CG failed with status {info}")
            if info > 0:
                raise NotConverged(f"CG did not reach tolerance ({info} iterations)")
            return x
        raise ValueError(f"unknown solver '{solver}'")
