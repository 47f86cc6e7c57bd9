import io

import numpy as np
import pytest

from tactwin.errors import (DegenerateElement, EmptyIntersection, ParallelPlanes,
                            ParseError)
from tactwin.mesh import (GridLayout, HalfSpace, Plane, TetMesh, barycentric_in_tet,
                          extract_surface, load_mesh, locate_element,
                          plane_surface_cut, place_grid, save_softmesh,
                          tet_volumes)

# the classic 5-tet cube decomposition: 4 corner tets + 1 central
CUBE_VERTS = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1],
                       [1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]], dtype=float)
CUBE_TETS = np.array([[1, 0, 4, 5], [2, 0, 4, 6], [3, 0, 5, 6],
                      [7, 4, 5, 6], [0, 4, 5, 6]], dtype=np.int32)


def make_cube():
    return TetMesh(CUBE_VERTS.copy(), CUBE_TETS.copy())


def test_single_tet_volume():
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    mesh = TetMesh(verts, np.array([[0, 1, 2, 3]], dtype=np.int32))
    assert tet_volumes(mesh.vertices0, mesh.tets)[0] == pytest.approx(1.0 / 6.0)


def test_negative_orientation_is_fixed():
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    mesh = TetMesh(verts, np.array([[0, 2, 1, 3]], dtype=np.int32))
    assert tet_volumes(mesh.vertices0, mesh.tets)[0] > 0


def test_degenerate_tet_rejected():
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.5, 0.5, 0]], dtype=float)
    with pytest.raises(DegenerateElement):
        TetMesh(verts, np.array([[0, 1, 2, 3]], dtype=np.int32))


def test_single_tet_surface_outward():
    verts = np.array([[0, 0, 0], [2, 0, 0], [0, 2, 0], [0, 0, 2]], dtype=float)
    mesh = TetMesh(verts, np.array([[0, 1, 2, 3]], dtype=np.int32))
    surf = extract_surface(mesh)
    assert len(surf.triangles) == 4
    centroid = verts.mean(axis=0)
    for tri in surf.triangles:
        p = verts[list(tri)]
        n = np.cross(p[1] - p[0], p[2] - p[0])
        assert np.dot(n, p.mean(axis=0) - centroid) > 0


def test_cube_surface_topology():
    surf = extract_surface(make_cube())
    assert len(surf.triangles) == 12
    assert surf.areas(CUBE_VERTS).sum() == pytest.approx(6.0)
    # watertight: every edge shared by exactly two triangles
    assert (surf.edge_use_counts() == 2).all()


def test_cube_volume_sums_to_one():
    mesh = make_cube()
    assert tet_volumes(mesh.vertices0, mesh.tets).sum() == pytest.approx(1.0)


def test_softmesh_round_trip(tmp_path):
    mesh = make_cube()
    path = tmp_path / "cube.softmesh"
    save_softmesh(mesh, str(path))
    again = load_mesh(str(path))
    np.testing.assert_allclose(again.vertices0, mesh.vertices0)
    np.testing.assert_array_equal(again.tets, mesh.tets)


def test_softmesh_sections(tmp_path):
    text = """softmesh 1
# comment line
vertices 4
0 0 0
1 0 0
0 1 0
0 0 1
tets 1
0 1 2 3
fixed 2
0
1
"""
    path = tmp_path / "one.softmesh"
    path.write_text(text)
    mesh = load_mesh(str(path))
    assert len(mesh.tets) == 1
    assert sorted(mesh.fixed_nodes.tolist()) == [0, 1]


def test_softmesh_malformed(tmp_path):
    path = tmp_path / "bad.softmesh"
    path.write_text("softmesh 1\nvertices 2\n0 0 0\n")
    with pytest.raises(ParseError):
        load_mesh(str(path))


def test_msh_import(tmp_path):
    text = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
10 0 0 0
11 1 0 0
12 0 1 0
13 0 0 1
$EndNodes
$Elements
2
1 2 2 0 1 10 11 12
2 4 2 0 1 10 11 12 13
$EndElements
"""
    path = tmp_path / "one.msh"
    path.write_text(text)
    mesh = load_mesh(str(path))
    assert len(mesh.vertices0) == 4
    assert len(mesh.tets) == 1  # the surface element is ignored
    assert tet_volumes(mesh.vertices0, mesh.tets)[0] == pytest.approx(1.0 / 6.0)


def test_plane_cut_square_perimeter():
    # cutting the unit cube at z=0.5 must give one closed chain of length 4
    surf = extract_surface(make_cube())
    chains = plane_surface_cut(surf, Plane((0, 0, 1), 0.5), CUBE_VERTS)
    assert len(chains) == 1
    assert chains[0].closed
    assert chains[0].length == pytest.approx(4.0)


def test_plane_cut_diagonal_perimeter():
    # plane x=y cuts the cube in a rectangle sqrt(2) x 1
    surf = extract_surface(make_cube())
    plane = Plane((1, -1, 0), 0.0)
    chains = plane_surface_cut(surf, plane, CUBE_VERTS)
    total = sum(c.length for c in chains)
    assert total == pytest.approx(2.0 + 2.0 * np.sqrt(2.0), rel=1e-9)


def test_plane_cut_miss():
    surf = extract_surface(make_cube())
    with pytest.raises(EmptyIntersection):
        plane_surface_cut(surf, Plane((0, 0, 1), 5.0), CUBE_VERTS)


def test_grid_layout_regular_rejects_uneven():
    with pytest.raises(Exception):
        GridLayout.regular((0, 0, 1), [0.0, 1.0, 3.0], (1, 0, 0), [0.0, 1.0])


def test_place_grid_on_cube():
    # 2x2 grid on the z=1 top face of a 2x2x2 cube
    mesh = make_cube()
    mesh = TetMesh(mesh.vertices0 * 2.0, mesh.tets)
    surf = extract_surface(mesh)
    layout = GridLayout.regular((1, 0, 0), [0.5, 1.5], (0, 1, 0), [0.5, 1.5])
    side = HalfSpace((0, 0, 1), threshold=1.5)
    points, mask = place_grid(surf, layout, side, mesh.vertices0)
    assert mask.all()
    np.testing.assert_allclose(points[..., 2], 2.0, atol=1e-9)
    np.testing.assert_allclose(points[0, 0, :2], [0.5, 0.5], atol=1e-9)


def test_place_grid_parallel_planes():
    mesh = make_cube()
    surf = extract_surface(mesh)
    layout = GridLayout.regular((0, 0, 1), [0.5], (0, 0, 1), [0.5])
    with pytest.raises(ParallelPlanes):
        place_grid(surf, layout, HalfSpace((0, 0, 1), 0.0), mesh.vertices0)


def test_barycentric_matches_brute_force(rng):
    mesh = make_cube()
    for _ in range(200):
        p = rng.uniform(0.0, 1.0, size=3)
        elem, coords = locate_element(mesh, p)
        verts = mesh.vertices0[mesh.tets[elem]]
        np.testing.assert_allclose(coords @ verts, p, atol=1e-9)
        assert coords.min() >= -1e-9
        assert coords.sum() == pytest.approx(1.0, abs=1e-12)


def test_locate_element_outside_clamps():
    mesh = make_cube()
    elem, coords = locate_element(mesh, np.array([2.0, 2.0, 2.0]))
    assert coords.min() >= 0.0
    assert coords.sum() == pytest.approx(1.0)


def test_barycentric_in_tet_vertices():
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    dm = np.stack([verts[1] - verts[0], verts[2] - verts[0],
                   verts[3] - verts[0]], axis=1)
    inv = np.linalg.inv(dm)
    for k in range(4):
        coords = barycentric_in_tet(inv, verts[0], verts[k])
        expect = np.zeros(4)
        expect[k] = 1.0
        np.testing.assert_allclose(coords, expect, atol=1e-12)
