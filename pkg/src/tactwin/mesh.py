"""Tetrahedral meshes, their boundary surfaces, and grid-placement geometry.

Lengths are millimeters throughout. A mesh carries both rest positions
(``vertices0``) and current positions (``positions``); all geometric queries
take an explicit position array so they can run against either configuration.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateElement,
    EmptyIntersection,
    ParallelPlanes,
    ParseError,
)

# Faces of a positively oriented tet (v0,v1,v2,v3), wound so the right-hand
# normal points out of the element.
_TET_FACES = ((1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1))


def tet_volumes(points, tets):
    """Signed volumes of tets (mm^3); positive for correct orientation."""
    p = points[tets]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    d3 = p[:, 3] - p[:, 0]
    return np.einsum("ij,ij->i", np.cross(d1, d2), d3) / 6.0


@dataclass
class Plane:
    """Plane in signed-distance form: normal . p == offset."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        self.normal = np.asarray(self.normal, dtype=float)
        n = np.linalg.norm(self.normal)
        if abs(n - 1.0) > 1e-9:
            if n < 1e-12:
                raise ValueError("plane normal must be nonzero")
            self.normal = self.normal / n
        self.offset = float(self.offset)

    def signed_distance(self, points):
        return np.asarray(points, dtype=float) @ self.normal - self.offset


@dataclass
class HalfSpace:
    """Side selector: accepts points with p . direction >= threshold.

    ``direction`` doubles as the reference direction: when a grid line
    crosses the accepted side more than once, the point furthest along
    ``direction`` wins.
    """

    direction: np.ndarray
    threshold: float = -np.inf

    def __post_init__(self):
        self.direction = np.asarray(self.direction, dtype=float)
        n = np.linalg.norm(self.direction)
        if n < 1e-12:
            raise ValueError("selector direction must be nonzero")
        self.direction = self.direction / n

    def accepts(self, points):
        return np.asarray(points, dtype=float) @ self.direction >= self.threshold

    def score(self, points):
        return np.asarray(points, dtype=float) @ self.direction


@dataclass
class GridLayout:
    """Two families of parallel, evenly spaced cutting planes."""

    rows: int
    cols: int
    row_planes: list
    col_planes: list
    valid_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        if len(self.row_planes) != self.rows or len(self.col_planes) != self.cols:
            raise ValueError("plane counts must match rows/cols")
        for planes in (self.row_planes, self.col_planes):
            offs = np.array([p.offset for p in planes])
            if len(offs) > 1:
                gaps = np.diff(offs)
                if np.ptp(gaps) > 1e-9 * max(1.0, abs(gaps[0])):
                    raise ValueError("plane spacing must be constant per axis")
        if self.valid_mask is None:
            self.valid_mask = np.ones((self.rows, self.cols), dtype=bool)

    @classmethod
    def regular(cls, row_normal, row_offsets, col_normal, col_offsets):
        rp = [Plane(row_normal, o) for o in row_offsets]
        cp = [Plane(col_normal, o) for o in col_offsets]
        return cls(len(rp), len(cp), rp, cp)


class TetMesh:
    """Volumetric tet mesh with rest and current node positions.

    Optional payload parsed from mesh files: named cavity surfaces
    (triangle index arrays) and a fixed-node set.
    """

    def __init__(self, vertices, tets, cavities=None, fixed_nodes=None):
        self.vertices0 = np.ascontiguousarray(vertices, dtype=np.float64)
        self.tets = np.ascontiguousarray(tets, dtype=np.int32)
        if self.vertices0.ndim != 2 or self.vertices0.shape[1] != 3:
            raise ValueError("vertices must be (n, 3)")
        if not np.all(np.isfinite(self.vertices0)):
            raise ValueError("vertex coordinates must be finite")
        if self.tets.ndim != 2 or self.tets.shape[1] != 4:
            raise ValueError("tets must be (m, 4)")
        n = len(self.vertices0)
        if self.tets.size and (self.tets.min() < 0 or self.tets.max() >= n):
            raise ValueError("tet index out of range")
        self._fix_orientation()
        self.positions = self.vertices0.copy()
        self.cavities = {k: np.asarray(v, dtype=np.int32) for k, v in (cavities or {}).items()}
        for name, tris in self.cavities.items():
            if tris.size and (tris.min() < 0 or tris.max() >= n):
                raise ValueError(f"cavity '{name}' index out of range")
        self.fixed_nodes = np.asarray(fixed_nodes if fixed_nodes is not None else [], dtype=np.int64)
        if self.fixed_nodes.size and (self.fixed_nodes.min() < 0 or self.fixed_nodes.max() >= n):
            raise ValueError("fixed node index out of range")
        self._rest_inverses = None

    def _fix_orientation(self):
        vols = tet_volumes(self.vertices0, self.tets)
        flip = vols < 0
        if np.any(flip):
            self.tets[flip] = self.tets[flip][:, [0, 2, 1, 3]]
            vols = np.abs(vols)
        scale = max(self.bbox_diagonal(self.vertices0), 1.0)
        if np.any(vols <= 1e-12 * scale**3):
            bad = int(np.argmin(vols))
            raise DegenerateElement(f"tet {bad} has near-zero volume {vols[bad]:g}")

    @staticmethod
    def bbox_diagonal(points):
        if len(points) == 0:
            return 0.0
        return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))

    @property
    def n_vertices(self):
        return len(self.vertices0)

    @property
    def n_tets(self):
        return len(self.tets)

    def reset(self):
        self.positions = self.vertices0.copy()

    def rest_inverses(self):
        """Per-tet inverse edge matrices at rest, cached (used for location)."""
        if self._rest_inverses is None:
            p = self.vertices0[self.tets]
            dm = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]], axis=2)
            self._rest_inverses = np.linalg.inv(dm)
        return self._rest_inverses


@dataclass
class SurfaceMesh:
    """Boundary triangles of a tet mesh, outward-oriented, global vertex ids."""

    vertices: np.ndarray      # unique vertex ids used by the triangles
    triangles: np.ndarray     # (t, 3) indices into the parent TetMesh

    def edge_use_counts(self):
        e = np.concatenate([self.triangles[:, [0, 1]],
                            self.triangles[:, [1, 2]],
                            self.triangles[:, [2, 0]]])
        e = np.sort(e, axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return counts

    def areas(self, positions):
        p = positions[self.triangles]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)


@dataclass
class Polyline:
    points: np.ndarray  # (k, 3)
    closed: bool

    @property
    def length(self):
        d = np.diff(self.points, axis=0)
        total = float(np.linalg.norm(d, axis=1).sum())
        if self.closed and len(self.points) > 1:
            total += float(np.linalg.norm(self.points[-1] - self.points[0]))
        return total


# ---------------------------------------------------------------------------
# file formats


def load_mesh(path) -> TetMesh:
    """Load a tet mesh from a `softmesh 1` file or a Gmsh MSH v2 ASCII file."""
    with open(path, "r") as fh:
        text = fh.read()
    head = text.lstrip()[:32]
    try:
        if head.startswith("softmesh"):
            return _parse_softmesh(text)
        if head.startswith("$MeshFormat"):
            return _parse_gmsh_v2(text)
    except (ValueError, IndexError) as exc:
        raise ParseError(str(exc)) from exc
    raise ParseError(f"unrecognized mesh format in {path}")


def _tokens(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse_softmesh(text) -> TetMesh:
    it = _tokens(text)
    _, header = next(it)
    if header[:2] != ["softmesh", "1"]:
        raise ParseError(f"unsupported softmesh header: {' '.join(header)}")

    def take(n, what):
        rows = []
        for _ in range(n):
            try:
                lineno, tok = next(it)
            except StopIteration:
                raise ParseError(f"unexpected end of file while reading {what}")
            rows.append((lineno, tok))
        return rows

    vertices = None
    tets = None
    cavities = {}
    fixed = None
    for lineno, tok in it:
        kind = tok[0]
        if kind == "vertices":
            rows = take(int(tok[1]), "vertices")
            vertices = np.array([[float(x) for x in t[:3]] for _, t in rows])
        elif kind == "tets":
            rows = take(int(tok[1]), "tets")
            tets = np.array([[int(x) for x in t[:4]] for _, t in rows])
        elif kind == "cavity":
            name = tok[1]
            rows = take(int(tok[2]), f"cavity {name}")
            cavities[name] = np.array([[int(x) for x in t[:3]] for _, t in rows])
        elif kind == "fixed":
            rows = take(int(tok[1]), "fixed nodes")
            fixed = np.array([int(t[0]) for _, t in rows])
        else:
            raise ParseError(f"line {lineno}: unknown section '{kind}'")
    if vertices is None or tets is None:
        raise ParseError("softmesh file must contain vertices and tets sections")
    try:
        return TetMesh(vertices, tets, cavities=cavities, fixed_nodes=fixed)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def _parse_gmsh_v2(text) -> TetMesh:
    lines = iter(text.splitlines())
    node_ids = []
    coords = []
    tets = []
    for line in lines:
        tag = line.strip()
        if tag == "$Nodes":
            n = int(next(lines))
            for _ in range(n):
                parts = next(lines).split()
                node_ids.append(int(parts[0]))
                coords.append([float(x) for x in parts[1:4]])
        elif tag == "$Elements":
            n = int(next(lines))
            for _ in range(n):
                parts = [int(x) for x in next(lines).split()]
                etype, ntags = parts[1], parts[2]
                if etype == 4:  # 4-node tetrahedron
                    tets.append(parts[3 + ntags:7 + ntags])
    if not coords:
        raise ParseError("MSH file has no $Nodes section")
    remap = {nid: k for k, nid in enumerate(node_ids)}
    try:
        tets_arr = np.array([[remap[i] for i in t] for t in tets], dtype=np.int64)
    except KeyError as exc:
        raise ParseError(f"element references unknown node id {exc}") from exc
    if len(tets_arr) == 0:
        raise ParseError("MSH file contains no tetrahedra (element type 4)")
    try:
        return TetMesh(np.array(coords), tets_arr)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def save_softmesh(mesh: TetMesh, path):
    """Write the versioned ASCII format (rest positions)."""
    buf = io.StringIO()
    buf.write("softmesh 1\n")
    buf.write(f"vertices {mesh.n_vertices}\n")
    for v in mesh.vertices0:
        buf.write(f"{v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
    buf.write(f"tets {mesh.n_tets}\n")
    for t in mesh.tets:
        buf.write(f"{t[0]} {t[1]} {t[2]} {t[3]}\n")
    for name, tris in mesh.cavities.items():
        buf.write(f"cavity {name} {len(tris)}\n")
        for t in tris:
            buf.write(f"{t[0]} {t[1]} {t[2]}\n")
    if mesh.fixed_nodes.size:
        buf.write(f"fixed {len(mesh.fixed_nodes)}\n")
        for i in mesh.fixed_nodes:
            buf.write(f"{i}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


# ---------------------------------------------------------------------------
# surface extraction


def extract_surface(mesh: TetMesh) -> SurfaceMesh:
    """Boundary faces owned by exactly one tet, outward-oriented."""
    owned = {}
    for tet in mesh.tets:
        for fa, fb, fc in _TET_FACES:
            tri = (int(tet[fa]), int(tet[fb]), int(tet[fc]))
            key = tuple(sorted(tri))
            if key in owned:
                owned[key] = None  # interior face
            else:
                owned[key] = tri
    tris = np.array([t for t in owned.values() if t is not None], dtype=np.int64)
    verts = np.unique(tris) if tris.size else np.empty(0, dtype=np.int64)
    return SurfaceMesh(vertices=verts, triangles=tris)


# ---------------------------------------------------------------------------
# plane cutting


def plane_surface_cut(surface: SurfaceMesh, plane: Plane, positions) -> list:
    """Intersect the surface with a plane; returns connected Polyline chains.

    Intersection points are keyed by the mesh edge (or vertex) they lie on, so
    chains connect exactly across adjacent triangles without float matching.
    """
    positions = np.asarray(positions, dtype=float)
    lo, hi = positions.min(axis=0), positions.max(axis=0)
    scale = max(float(np.linalg.norm(hi - lo)), 1e-30)
    corners = np.array([[lo[k] if b & (1 << k) == 0 else hi[k] for k in range(3)]
                        for b in range(8)])
    cd = plane.signed_distance(corners)
    if cd.min() > 1e-9 * scale or cd.max() < -1e-9 * scale:
        raise EmptyIntersection("plane misses the surface bounding box")

    d = plane.signed_distance(positions)
    on = np.abs(d) <= 1e-12 * scale
    sign = np.where(on, 0, np.sign(d)).astype(np.int8)

    segments = {}  # frozenset{keyA,keyB} -> (keyA, keyB, pA, pB)

    def edge_point(i, j):
        t = d[i] / (d[i] - d[j])
        return ("e", min(i, j), max(i, j)), positions[i] + t * (positions[j] - positions[i])

    for tri in surface.triangles:
        s = sign[tri]
        if s.min() >= 0 or s.max() <= 0:
            # may still contain an on-plane edge with the rest on one side
            zeros = [int(v) for v, sv in zip(tri, s) if sv == 0]
            if len(zeros) == 2:
                ka, kb = ("v", zeros[0]), ("v", zeros[1])
                segments.setdefault(frozenset((ka, kb)),
                                    (ka, kb, positions[zeros[0]], positions[zeros[1]]))
            continue
        pts = []
        for a in range(3):
            v = int(tri[a])
            if s[a] == 0:
                pts.append((("v", v), positions[v]))
        for a, b in ((0, 1), (1, 2), (2, 0)):
            if s[a] * s[b] < 0:
                pts.append(edge_point(int(tri[a]), int(tri[b])))
        if len(pts) == 2 and pts[0][0] != pts[1][0]:
            (ka, pa), (kb, pb) = pts
            segments.setdefault(frozenset((ka, kb)), (ka, kb, pa, pb))

    polylines = _chain_segments(list(segments.values()))
    total = sum(pl.length for pl in polylines)
    if total < 1e-9:
        raise EmptyIntersection("plane intersection is empty or degenerate")
    return polylines


def _chain_segments(segments) -> list:
    adjacency = {}
    for idx, (ka, kb, _, _) in enumerate(segments):
        adjacency.setdefault(ka, []).append(idx)
        adjacency.setdefault(kb, []).append(idx)
    used = [False] * len(segments)
    # open chains first: start walks at odd-degree endpoints
    starts = [k for k, ids in adjacency.items() if len(ids) % 2 == 1]
    polylines = []

    def walk(start_key):
        chain_keys = [start_key]
        chain_pts = [None]
        key = start_key
        while True:
            nxt = next((i for i in adjacency[key] if not used[i]), None)
            if nxt is None:
                break
            used[nxt] = True
            ka, kb, pa, pb = segments[nxt]
            if chain_pts[0] is None:
                chain_pts[0] = pa if ka == key else pb
            other_key, other_pt = (kb, pb) if ka == key else (ka, pa)
            chain_keys.append(other_key)
            chain_pts.append(other_pt)
            key = other_key
        return chain_keys, chain_pts

    for start in starts:
        if all(used[i] for i in adjacency[start]):
            continue
        keys, pts = walk(start)
        if len(pts) > 1:
            polylines.append(Polyline(np.array(pts), closed=False))
    for idx in range(len(segments)):
        if used[idx]:
            continue
        start = segments[idx][0]
        keys, pts = walk(start)
        if len(pts) > 1:
            closed = keys[0] == keys[-1]
            if closed:
                pts = pts[:-1]
            polylines.append(Polyline(np.array(pts), closed=closed))
    return polylines


# ---------------------------------------------------------------------------
# grid placement


def _plane_pair_line(pa: Plane, pb: Plane):
    u = np.cross(pa.normal, pb.normal)
    nu = np.linalg.norm(u)
    if nu < 1e-9:
        raise ParallelPlanes("cross-family grid planes are parallel")
    u = u / nu
    m = np.stack([pa.normal, pb.normal, u])
    origin = np.linalg.solve(m, np.array([pa.offset, pb.offset, 0.0]))
    return origin, u


def _line_surface_hits(origin, direction, triangles, positions):
    """All intersection points of an infinite line with the triangle set."""
    a = positions[triangles[:, 0]]
    e1 = positions[triangles[:, 1]] - a
    e2 = positions[triangles[:, 2]] - a
    h = np.cross(direction, e2)
    det = np.einsum("ij,ij->i", e1, h)
    ok = np.abs(det) > 1e-14
    inv = np.where(ok, det, 1.0)
    s = origin - a
    beta = np.einsum("ij,ij->i", s, h) / inv
    q = np.cross(s, e1)
    gamma = (q @ direction) / inv
    t = np.einsum("ij,ij->i", e2, q) / inv
    eps = 1e-9
    hit = ok & (beta >= -eps) & (gamma >= -eps) & (beta + gamma <= 1 + eps)
    return origin + np.outer(t[hit], direction)


def place_grid(surface: SurfaceMesh, layout: GridLayout, side: HalfSpace, positions):
    """3D grid points: (row plane ∩ col plane) lines intersected with the surface.

    Returns (points, valid_mask): points is (rows, cols, 3) with NaN where the
    line misses the selected side; layout.valid_mask is updated in place.
    """
    positions = np.asarray(positions, dtype=float)
    points = np.full((layout.rows, layout.cols, 3), np.nan)
    mask = np.zeros((layout.rows, layout.cols), dtype=bool)
    for i, rp in enumerate(layout.row_planes):
        for j, cp in enumerate(layout.col_planes):
            origin, direction = _plane_pair_line(rp, cp)
            hits = _line_surface_hits(origin, direction, surface.triangles, positions)
            if len(hits) == 0:
                continue
            hits = hits[side.accepts(hits)]
            if len(hits) == 0:
                continue
            best = hits[int(np.argmax(side.score(hits)))]
            points[i, j] = best
            mask[i, j] = True
    layout.valid_mask = mask
    return points, mask


# ---------------------------------------------------------------------------
# point location


def barycentric_in_tet(invdm, v0, p):
    """Coordinates (a0..a3) of p in the tet whose edge inverse is invdm."""
    b = invdm @ (np.asarray(p, dtype=float) - v0)
    return np.array([1.0 - b.sum(), b[0], b[1], b[2]])


def locate_element(mesh: TetMesh, p, positions=None):
    """Find the tet containing p, or the closest tet with clamped coords.

    Works against rest positions by default; pass ``positions`` to locate in
    a deformed configuration. Returns (tet index, 4 barycentric coords).
    """
    p = np.asarray(p, dtype=float)
    if positions is None:
        pts = mesh.vertices0
        inv = mesh.rest_inverses()
    else:
        pts = np.asarray(positions, dtype=float)
        q = pts[mesh.tets]
        dm = np.stack([q[:, 1] - q[:, 0], q[:, 2] - q[:, 0], q[:, 3] - q[:, 0]], axis=2)
        inv = np.linalg.inv(dm)
    v0 = pts[mesh.tets[:, 0]]
    b = np.einsum("mij,mj->mi", inv, p[None, :] - v0)
    coords = np.column_stack([1.0 - b.sum(axis=1), b])
    worst = coords.min(axis=1)
    inside = np.nonzero(worst >= -1e-9)[0]
    e = int(inside[0]) if len(inside) else int(np.argmax(worst))
    c = np.clip(coords[e], 0.0, None)
    c = c / c.sum()
    return e, c
