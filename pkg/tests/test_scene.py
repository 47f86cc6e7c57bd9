import numpy as np
import pytest

from tactwin.errors import SceneError
from tactwin.mesh import extract_surface, tet_volumes
from tactwin.scene import (FRUIT_OUTLIER_TAXEL, bend_pad_positions, build_scene,
                           kuhn_box, superellipsoid_map, tip_rotation_targets)


def test_kuhn_box_fills_volume():
    from tactwin.mesh import TetMesh
    coords, tets, kept = kuhn_box((3, 2, 2), lambda *c: True)
    mesh = TetMesh(coords.astype(float), tets)  # normalizes orientation
    vols = tet_volumes(mesh.vertices0, mesh.tets)
    assert vols.sum() == pytest.approx(3 * 2 * 2)
    assert len(tets) == 6 * 12


def test_kuhn_box_carving_removes_cells():
    from tactwin.mesh import TetMesh
    coords, tets, kept = kuhn_box((2, 2, 2), lambda x, y, z: (x, y, z) != (0, 0, 0))
    mesh = TetMesh(coords.astype(float), tets)
    vols = tet_volumes(mesh.vertices0, mesh.tets)
    assert vols.sum() == pytest.approx(7.0)


def test_kuhn_box_is_watertight():
    coords, tets, _ = kuhn_box((2, 3, 2), lambda *c: True)
    from tactwin.mesh import TetMesh
    surf = extract_surface(TetMesh(coords.astype(float), tets))
    assert (surf.edge_use_counts() == 2).all()


def test_superellipsoid_map_preserves_orientation():
    rng = np.random.default_rng(9)
    pts = rng.uniform(-1.0, 1.0, size=(500, 3))
    out = superellipsoid_map(pts, (36.0, 36.0, 76.0), 2.5)
    # radial map: direction preserved, scaling monotone
    norms_in = np.abs(pts).max(axis=1)
    order = np.argsort(norms_in)
    r_out = np.linalg.norm(out, axis=1)
    same_dir = np.einsum("ij,ij->i", pts, out)
    assert (same_dir[norms_in > 1e-6] > 0).all()
    assert r_out[order[-1]] > r_out[order[0]]


def test_bar_scene_shape(bar_scene):
    meta = bar_scene.meta
    assert meta["length_mm"] == pytest.approx(100.0)
    assert meta["section_mm2"] == pytest.approx(100.0)
    assert len(meta["end_nodes"]) > 0


def test_pad_scene_grid(pad_scene):
    assert pad_scene.grid.valid.shape == (4, 4)
    assert pad_scene.grid.n_valid == 16
    # taxel (i, j) sits at x = 16 j, y = 12 i on the top face
    pts = pad_scene.grid_points()
    np.testing.assert_allclose(pts[..., 2], 6.0, atol=1e-6)
    np.testing.assert_allclose(pts[1, 2, 0], 32.0, atol=1e-6)
    np.testing.assert_allclose(pts[1, 2, 1], 12.0, atol=1e-6)


def test_pad_grid_points_on_surface(pad_scene):
    pts = pad_scene.grid_points().reshape(-1, 3)
    tris = pad_scene.surface.triangles
    verts = pad_scene.mesh.vertices0
    for p in pts:
        d = _point_to_triangles(p, verts, tris)
        assert d < 1e-6


def _point_to_triangles(p, verts, tris):
    best = np.inf
    for tri in tris:
        a, b, c = verts[tri[0]], verts[tri[1]], verts[tri[2]]
        best = min(best, _point_triangle_distance(p, a, b, c))
    return best


def _point_triangle_distance(p, a, b, c):
    # closest point on triangle via projection and edge clamping
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = ab @ ap, ac @ ap
    if d1 <= 0 and d2 <= 0:
        return np.linalg.norm(ap)
    bp = p - b
    d3, d4 = ab @ bp, ac @ bp
    if d3 >= 0 and d4 <= d3:
        return np.linalg.norm(bp)
    vc = d1 * d4 - d3 * d2
    if vc <= 0 <= d1 and d3 <= 0:
        t = d1 / (d1 - d3)
        return np.linalg.norm(ap - t * ab)
    cp = p - c
    d5, d6 = ab @ cp, ac @ cp
    if d6 >= 0 and d5 <= d6:
        return np.linalg.norm(cp)
    vb = d5 * d2 - d1 * d6
    if vb <= 0 <= d2 and d6 <= 0:
        t = d2 / (d2 - d6)
        return np.linalg.norm(ap - t * ac)
    va = d3 * d6 - d5 * d4
    if va <= 0 and d4 - d3 >= 0 and d5 - d6 >= 0:
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return np.linalg.norm(bp - t * (c - b))
    denom = 1.0 / (va + vb + vc)
    v, w = vb * denom, vc * denom
    return np.linalg.norm(ap - v * ab - w * ac)


def test_pad_bend_preserves_top_arc_length(pad_scene):
    bent = bend_pad_positions(pad_scene)
    # top-face arc length along x is preserved by the cylindrical wrap
    pts = pad_scene.grid_points()
    assert bent.shape == pad_scene.mesh.vertices0.shape
    # chord between extreme columns shrinks below the flat distance
    top = pad_scene.mesh.vertices0[:, 2] == 6.0
    flat_span = np.ptp(pad_scene.mesh.vertices0[top, 0])
    bent_span = np.ptp(bent[top, 0])
    assert bent_span < flat_span


def test_fruit_scene_grid_count(fruit_scene):
    assert fruit_scene.grid.n_valid == 47
    rows_hit = fruit_scene.grid.valid.sum(axis=1)
    assert rows_hit.tolist() == [3, 3, 5, 5, 5, 5, 5, 5, 5, 3, 3]
    assert fruit_scene.grid.valid[FRUIT_OUTLIER_TAXEL]


def test_fruit_cavities_closed_and_positive(fruit_scene):
    model = fruit_scene.model
    for name in ("c1", "c2", "c3"):
        vol = model.cavity_volume(name, fruit_scene.mesh.vertices0)
        assert vol > 0
        tris = model.cavity_triangles[name]
        e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        e = np.sort(e, axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        assert (counts == 2).all()


def test_fruit_tip_targets_rotate_rigidly(fruit_scene):
    tips, targets = tip_rotation_targets(fruit_scene, angle_deg=30.0)
    rest = fruit_scene.mesh.vertices0[tips]
    d_rest = np.linalg.norm(rest[0] - rest[-1])
    d_target = np.linalg.norm(targets[0] - targets[-1])
    assert d_target == pytest.approx(d_rest, rel=1e-12)
    assert np.abs(targets - rest).max() > 1.0  # they actually moved


def test_fruit_base_is_fixed(fruit_scene):
    # the bottom lattice layer warps onto the lower cap, all well below mid
    fixed = fruit_scene.mesh.fixed_nodes
    assert len(fixed) == 81
    z = fruit_scene.mesh.vertices0[:, 2]
    assert z[fixed].max() < -45.0
    assert z.min() == pytest.approx(z[fixed].min())


def test_scene_topology_payload(fruit_scene):
    topo = fruit_scene.topology()
    assert topo["name"] == "fruit"
    assert topo["n_vertices"] == len(fruit_scene.mesh.vertices0)
    assert topo["grid"]["threshold"] == 20
    assert topo["material"]["youngs_modulus_pa"] == pytest.approx(120000.0)
    assert set(topo["cavities"]) == {"c1", "c2", "c3"}


def test_unknown_scene_rejected():
    with pytest.raises(SceneError):
        build_scene("teapot")
