"""Built-in scenes: meshes, taxel grids, calibrated sensor models.

Three scenes cover the evaluation surface:

* ``bar``      frictionless tension test piece, no sensor
* ``pad``      4x4 taxel pad on a slab, bent around a cylinder analytically
* ``fruit``    standing superellipsoid body, three internal cavities,
               47-taxel front grid, optional tip-rotation targets

Scene geometry is generated, not shipped: Kuhn-subdivided box lattices,
optionally carved (cavities) and warped (superellipsoid map for the fruit,
cylinder wrap for the bent pad). All scenes reference the unloaded geometry;
gravity is off in the bundled configs so taxel placement coincides with the
placement-time shape.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import SceneError
from .fem import FemModel, MaterialParams
from .mapping import AnchorSet, build_anchors
from .mesh import (
    GridLayout,
    HalfSpace,
    SurfaceMesh,
    TetMesh,
    extract_surface,
    place_grid,
)
from .sensor import SensorModel, TaxelGrid

FRUIT_HEIGHT_MM = 152.0       # reference span for percent errors
PAD_BEND_RADIUS_MM = 48.0 / np.pi


@dataclass
class Scene:
    name: str
    mesh: TetMesh
    model: FemModel
    surface: SurfaceMesh
    grid: TaxelGrid = None
    layout: GridLayout = None
    grid_rest: np.ndarray = None          # (rows, cols, 3) anchored rest points
    anchors: AnchorSet = None
    sensor: SensorModel = None
    meta: dict = field(default_factory=dict)

    def grid_points(self, positions=None):
        """Current 3D taxel positions via the anchor set."""
        if self.anchors is None:
            raise SceneError(f"scene '{self.name}' has no taxel grid")
        return self.anchors.evaluate(self.mesh, positions)

    def topology(self) -> dict:
        """Static description used by clients; positions travel separately."""
        top = {
            "name": self.name,
            "n_vertices": self.mesh.n_vertices,
            "triangles": self.surface.triangles.tolist(),
            "cavities": sorted(self.model.cavity_triangles.keys()),
            "material": {
                "youngs_modulus_pa": self.model.material.youngs_modulus * 1e6,
                "poisson_ratio": self.model.material.poisson_ratio,
                "density_kg_m3": self.model.material.density,
            },
        }
        if self.grid is not None:
            top["grid"] = {
                "rows": self.grid.rows,
                "cols": self.grid.cols,
                "row_pitch_mm": self.grid.row_pitch,
                "col_pitch_mm": self.grid.col_pitch,
                "valid": self.grid.valid.astype(int).tolist(),
                "threshold": self.sensor.threshold if self.sensor else 20,
            }
        return top


# ---------------------------------------------------------------------------
# lattice construction


_KUHN_PATHS = [perm for perm in itertools.permutations(range(3))]


def kuhn_box(divisions, keep_cell=None):
    """Tets of a box lattice, 6 per cell, all sharing the cell diagonal.

    Returns (node_lattice_coords (n,3) int, tets (m,4), kept cell ids).
    Face-compatible across neighboring cells. ``keep_cell(cx,cy,cz)`` drops
    cells (for cavities); unreferenced nodes are compressed out.
    """
    nx, ny, nz = divisions
    shape = (nx + 1, ny + 1, nz + 1)

    def nid(c):
        return (c[0] * shape[1] + c[1]) * shape[2] + c[2]

    eye = np.eye(3, dtype=int)
    tets = []
    kept = []
    for cx in range(nx):
        for cy in range(ny):
            for cz in range(nz):
                if keep_cell is not None and not keep_cell(cx, cy, cz):
                    continue
                kept.append((cx, cy, cz))
                base = np.array((cx, cy, cz))
                for perm in _KUHN_PATHS:
                    chain = [base]
                    cur = base
                    for axis in perm[:2]:
                        cur = cur + eye[axis]
                        chain.append(cur)
                    chain.append(base + 1)
                    tets.append([nid(c) for c in chain])
    tets = np.array(tets, dtype=np.int64)
    used = np.unique(tets)
    remap = -np.ones(shape[0] * shape[1] * shape[2], dtype=np.int64)
    remap[used] = np.arange(len(used))
    coords = np.stack(np.unravel_index(used, shape), axis=1)
    return coords, remap[tets], kept


def _cavity_wall_triangles(surface_tris, lattice_coords, blocks):
    """Split boundary triangles into per-cavity walls and the outer shell.

    A triangle belongs to a cavity when all its vertices lie on that
    cavity's lattice-aligned node box. Blocks must not touch the domain
    boundary or each other.
    """
    cavities = {name: [] for name, _ in blocks}
    outer = []
    for tri in surface_tris:
        lc = lattice_coords[tri]
        owner = None
        for name, (lo, hi) in blocks:
            if np.all(lc >= lo) and np.all(lc <= hi):
                owner = name
                break
        if owner is None:
            outer.append(tri)
        else:
            cavities[owner].append(tri)
    return {k: np.array(v, dtype=np.int64) for k, v in cavities.items()}, outer


# ---------------------------------------------------------------------------
# bar


def build_bar_scene(youngs_mpa=0.1, poisson=0.45, length=100.0, side=10.0,
                    divisions=(10, 2, 2)) -> Scene:
    """Tension test piece, statically determinate support on the x=0 face.

    The support removes exactly the six rigid modes and leaves lateral
    contraction free, so a uniform end traction produces the textbook
    elongation F L / (E A) regardless of the Poisson ratio.
    """
    coords, tets, _ = kuhn_box(divisions)
    scale = np.array([length, side, side]) / np.array(divisions, dtype=float)
    verts = coords * scale
    mesh = TetMesh(verts, tets)
    model = FemModel(mesh, MaterialParams(youngs_mpa, poisson, density=1070.0),
                     gravity=(0.0, 0.0, 0.0))

    root = np.nonzero(np.isclose(verts[:, 0], 0.0))[0]
    for n in root:
        model.fix_dof(n, 0)
    anchor_a = _node_at(verts, (0.0, 0.0, 0.0))
    anchor_b = _node_at(verts, (0.0, side, 0.0))
    model.fix_dof(anchor_a, 1)
    model.fix_dof(anchor_a, 2)
    model.fix_dof(anchor_b, 2)

    surface = extract_surface(mesh)
    end_nodes = np.nonzero(np.isclose(verts[:, 0], length))[0]
    meta = {
        "length_mm": length,
        "section_mm2": side * side,
        "end_nodes": end_nodes,
        "end_face_x": length,
    }
    return Scene("bar", mesh, model, surface, meta=meta)


def apply_end_traction(scene: Scene, newtons: float):
    """Consistent nodal loads for a uniform +x traction on the far face."""
    mesh = scene.mesh
    x_end = scene.meta["end_face_x"]
    sigma = newtons / scene.meta["section_mm2"]
    on_end = np.isclose(mesh.vertices0[:, 0], x_end)
    scene.model.nodal_loads[:] = 0.0
    for tri in scene.surface.triangles:
        if not on_end[tri].all():
            continue
        p = mesh.vertices0[tri]
        area = 0.5 * np.linalg.norm(np.cross(p[1] - p[0], p[2] - p[0]))
        for v in tri:
            scene.model.nodal_loads[v, 0] += sigma * area / 3.0


def _node_at(verts, point):
    d = np.linalg.norm(verts - np.asarray(point), axis=1)
    k = int(np.argmin(d))
    if d[k] > 1e-6:
        raise SceneError(f"no lattice node at {point}")
    return k


# ---------------------------------------------------------------------------
# 4x4 pad


def build_pad_scene(youngs_mpa=0.25, poisson=0.45) -> Scene:
    """Flat slab carrying a 4x4 taxel patch (12 mm rows, 16 mm columns)."""
    divisions = (8, 6, 2)
    size = np.array([64.0, 48.0, 6.0])
    coords, tets, _ = kuhn_box(divisions)
    verts = coords * (size / np.array(divisions, dtype=float))
    verts[:, 0] -= 8.0   # taxel (i, j) sits at x = 16 j, y = 12 i
    verts[:, 1] -= 6.0
    mesh = TetMesh(verts, tets)
    model = FemModel(mesh, MaterialParams(youngs_mpa, poisson, density=1070.0),
                     gravity=(0.0, 0.0, 0.0))
    surface = extract_surface(mesh)

    layout = GridLayout.regular((0, 1, 0), [12.0 * i for i in range(4)],
                                (1, 0, 0), [16.0 * j for j in range(4)])
    side = HalfSpace(direction=(0, 0, 1), threshold=3.0)
    points, mask = place_grid(surface, layout, side, mesh.vertices0)
    if not mask.all():
        raise SceneError("pad grid placement must cover all 16 taxels")
    anchors = build_anchors(mesh, points, valid_mask=mask)
    grid = TaxelGrid(4, 4, row_pitch=12.0, col_pitch=16.0, valid=mask)

    # small pad drifts less than the tall body: its worst-case bend shift
    # saturates at 10 counts, well under the 20-count detection threshold
    sensor = SensorModel(shift_gain=PAD_SHIFT_GAIN, shift_cap=10.0)
    scene = Scene("pad", mesh, model, surface, grid=grid, layout=layout,
                  grid_rest=anchors.evaluate(mesh, mesh.vertices0),
                  anchors=anchors, sensor=sensor,
                  meta={"bend_radius_mm": PAD_BEND_RADIUS_MM,
                        "top_z": 6.0, "center_x": 24.0})
    return scene


def bend_pad_positions(scene: Scene, radius=None):
    """Wrap the slab around a cylinder whose axis runs along the rows.

    Arc length along the top surface is preserved, so in-surface geodesic
    distances survive while 3D chords between taxels shorten. With the
    default radius a 16 mm column pitch subtends 60 degrees.
    """
    r = PAD_BEND_RADIUS_MM if radius is None else float(radius)
    top_z = scene.meta["top_z"]
    cx = scene.meta["center_x"]
    p = scene.mesh.vertices0
    phi = (p[:, 0] - cx) / r
    rad = r - (top_z - p[:, 2])
    out = np.empty_like(p)
    out[:, 0] = cx + rad * np.sin(phi)
    out[:, 1] = p[:, 1]
    out[:, 2] = top_z - r + rad * np.cos(phi)
    return out


def bend_pad_point(scene: Scene, point, radius=None):
    """The analytic bend map for a single rest-space point (ground truth)."""
    return bend_pad_positions_for(scene, np.asarray(point, dtype=float)[None, :],
                                  radius)[0]


def bend_pad_positions_for(scene: Scene, points, radius=None):
    r = PAD_BEND_RADIUS_MM if radius is None else float(radius)
    top_z = scene.meta["top_z"]
    cx = scene.meta["center_x"]
    p = np.asarray(points, dtype=float)
    phi = (p[:, 0] - cx) / r
    rad = r - (top_z - p[:, 2])
    out = np.empty_like(p)
    out[:, 0] = cx + rad * np.sin(phi)
    out[:, 1] = p[:, 1]
    out[:, 2] = top_z - r + rad * np.cos(phi)
    return out


# ---------------------------------------------------------------------------
# fruit


FRUIT_DIVISIONS = (8, 8, 16)
FRUIT_RADII = (36.0, 36.0, 76.0)
FRUIT_EXPONENT = 2.5
FRUIT_CAVITY_BLOCKS = [
    ("c1", ((3, 3, 2), (5, 5, 5))),
    ("c2", ((3, 3, 6), (5, 5, 9))),
    ("c3", ((3, 3, 10), (5, 5, 13))),
]
FRUIT_ROW_OFFSETS = [12.0 * k - 60.0 for k in range(11)]   # z planes
FRUIT_COL_OFFSETS = [16.0 * k - 32.0 for k in range(5)]    # x planes
PAD_SHIFT_GAIN = 332.8
# Tip-bend calibration: at the reference deformed equilibrium the strain
# proxy peaks at 0.0399 (taxel 9,1) with grid mean 0.0206. A uniform gain of
# 5.0/mean sets the grid-average drift ceiling to ~5 counts; one outlier
# crossing point is boosted so the worst taxel saturates the 16-count cap,
# matching grids whose worst crossing deforms more than designed.
FRUIT_SHIFT_GAIN = 242.5
FRUIT_OUTLIER_TAXEL = (9, 1)
FRUIT_OUTLIER_FACTOR = 1.75
FRUIT_TIP_ANGLE_DEG = 30.0
FRUIT_TIP_PIVOT_Z = 20.0
FRUIT_TIP_SPRING_N_MM = 0.1


def superellipsoid_map(lattice_unit, radii, exponent):
    """Radial cube-to-superellipsoid map for points in [-1, 1]^3.

    Nested sup-norm shells map to nested superellipsoid shells, which keeps
    the warped lattice free of inverted elements.
    """
    p = np.asarray(lattice_unit, dtype=float)
    t = np.abs(p).max(axis=1)
    out = np.zeros_like(p)
    nz = t > 1e-12
    d = p[nz] / t[nz, None]
    s = (np.abs(d) ** exponent).sum(axis=1) ** (-1.0 / exponent)
    out[nz] = p[nz] * s[:, None]
    return out * np.asarray(radii, dtype=float)


def build_fruit_scene(youngs_mpa=0.12, poisson=0.45) -> Scene:
    """Standing soft body with three stacked cavities and a 47-taxel grid."""
    divisions = FRUIT_DIVISIONS
    blocks = [(name, (np.array(lo), np.array(hi)))
              for name, (lo, hi) in FRUIT_CAVITY_BLOCKS]

    def keep_cell(cx, cy, cz):
        for _, (lo, hi) in blocks:
            if lo[0] <= cx < hi[0] and lo[1] <= cy < hi[1] and lo[2] <= cz < hi[2]:
                return False
        return True

    coords, tets, _ = kuhn_box(divisions, keep_cell)
    lattice_unit = 2.0 * coords / np.array(divisions, dtype=float) - 1.0

    # classify boundary triangles in lattice space, then warp the nodes
    probe_mesh = TetMesh(coords.astype(float), tets)
    boundary = extract_surface(probe_mesh)
    cavities, _ = _cavity_wall_triangles(boundary.triangles, coords, blocks)
    for name, tris in cavities.items():
        if len(tris) == 0:
            raise SceneError(f"cavity '{name}' produced no wall triangles")

    verts = superellipsoid_map(lattice_unit, FRUIT_RADII, FRUIT_EXPONENT)
    fixed = np.nonzero(coords[:, 2] == 0)[0]
    mesh = TetMesh(verts, tets, cavities=cavities, fixed_nodes=fixed)
    model = FemModel(mesh, MaterialParams(youngs_mpa, poisson, density=1070.0),
                     gravity=(0.0, 0.0, 0.0))
    surface = extract_surface(mesh)

    layout = GridLayout.regular((0, 0, 1), FRUIT_ROW_OFFSETS,
                                (1, 0, 0), FRUIT_COL_OFFSETS)
    side = HalfSpace(direction=(0, 1, 0), threshold=0.0)
    points, mask = place_grid(surface, layout, side, mesh.vertices0)
    anchors = build_anchors(mesh, points, valid_mask=mask)
    grid = TaxelGrid(layout.rows, layout.cols, row_pitch=12.0, col_pitch=16.0,
                     valid=mask)
    gain_map = np.ones((layout.rows, layout.cols))
    gain_map[FRUIT_OUTLIER_TAXEL] = FRUIT_OUTLIER_FACTOR
    sensor = SensorModel(shift_gain=FRUIT_SHIFT_GAIN, shift_cap=16.0,
                         gain_map=gain_map)

    tip_nodes = np.nonzero(coords[:, 2] == divisions[2])[0]
    meta = {
        "height_mm": FRUIT_HEIGHT_MM,
        "tip_nodes": tip_nodes,
        "tip_angle_deg": FRUIT_TIP_ANGLE_DEG,
        "tip_axis": np.array([1.0, 0.0, 0.0]),
        "tip_pivot": np.array([0.0, 0.0, FRUIT_TIP_PIVOT_Z]),
        "tip_spring_n_mm": FRUIT_TIP_SPRING_N_MM,
    }
    return Scene("fruit", mesh, model, surface, grid=grid, layout=layout,
                 grid_rest=anchors.evaluate(mesh, mesh.vertices0),
                 anchors=anchors, sensor=sensor, meta=meta)


def rotation_about_axis(axis, angle_rad) -> np.ndarray:
    """Rodrigues rotation matrix for a unit-normalized axis."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    cross = np.array([[0.0, -a[2], a[1]],
                      [a[2], 0.0, -a[0]],
                      [-a[1], a[0], 0.0]])
    return c * np.eye(3) + s * cross + (1.0 - c) * np.outer(a, a)


def tip_rotation_targets(scene: Scene, angle_deg=None):
    """Rigidly rotated rest positions of the tip cap about the scene's axis."""
    angle = np.deg2rad(scene.meta["tip_angle_deg"] if angle_deg is None
                       else angle_deg)
    rot = rotation_about_axis(scene.meta["tip_axis"], angle)
    pivot = scene.meta["tip_pivot"]
    tips = scene.meta["tip_nodes"]
    rest = scene.mesh.vertices0[tips]
    return tips, (rest - pivot) @ rot.T + pivot


def attach_tip_springs(scene: Scene, angle_deg=None, stiffness=None):
    """Pull the tip cap toward rigidly rotated rest targets with springs.

    Spring stiffness trades target tracking against wall integrity. On a
    solid body, k >= 10x the per-node elastic stiffness tracks the target
    angle within 3 degrees. The stacked-cavity body runs far below that
    threshold on purpose: its single-cell cavity walls invert before the
    tip reaches the target, so the default k leaves the tip lagging the
    commanded angle and the achieved rotation is reported by the solver
    harness instead of assumed.
    """
    k = scene.meta["tip_spring_n_mm"] if stiffness is None else float(stiffness)
    tips, targets = tip_rotation_targets(scene, angle_deg)
    scene.model.clear_springs()
    for node, tgt in zip(tips, targets):
        scene.model.add_spring(int(node), tgt, k)


def build_scene(name: str) -> Scene:
    builders = {"bar": build_bar_scene, "pad": build_pad_scene,
                "fruit": build_fruit_scene}
    if name not in builders:
        raise SceneError(f"unknown scene '{name}' (have: {sorted(builders)})")
    return builders[name]()
