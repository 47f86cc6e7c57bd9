"""Barycentric anchors: pin surface points to the mesh once, follow forever.

An anchor stores (element, 4 coords) and is immutable. Evaluating anchors
against any node position array is a pure linear combination, so anchored
points commute exactly with affine maps of the positions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .mesh import TetMesh, locate_element


@dataclass(frozen=True)
class BarycentricAnchor:
    element: int
    coords: tuple  # (a0, a1, a2, a3), nonnegative, sums to 1

    def __post_init__(self):
        if len(self.coords) != 4:
            raise ValueError("barycentric coords must have 4 entries")
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))


class AnchorSet:
    """An ordered collection of anchors plus the grid shape they came from."""

    def __init__(self, anchors, shape=None, valid_mask=None):
        self.anchors = list(anchors)
        self.shape = tuple(shape) if shape is not None else (len(self.anchors),)
        self.valid_mask = (np.asarray(valid_mask, dtype=bool)
                           if valid_mask is not None else None)
        self._elements = np.array([a.element for a in self.anchors], dtype=np.int64)
        self._coords = np.array([a.coords for a in self.anchors], dtype=np.float64)

    def __len__(self):
        return len(self.anchors)

    def __iter__(self):
        return iter(self.anchors)

    def evaluate(self, mesh: TetMesh, positions=None):
        """World positions of all anchors, shaped like the source grid."""
        p = mesh.positions if positions is None else np.asarray(positions, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3:
            raise DimensionMismatch("positions must be (n, 3)")
        nodes = mesh.tets[self._elements]          # (k, 4)
        pts = np.einsum("ka,kaj->kj", self._coords, p[nodes])
        return pts.reshape(self.shape + (3,))

    # JSON round trip must be exact: float repr in Python is the shortest
    # string that parses back to the same double, and json uses it.
    def to_json(self) -> str:
        payload = {
            "shape": list(self.shape),
            "anchors": [{"element": a.element, "coords": list(a.coords)}
                        for a in self.anchors],
        }
        if self.valid_mask is not None:
            payload["valid_mask"] = self.valid_mask.astype(int).ravel().tolist()
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "AnchorSet":
        payload = json.loads(text)
        anchors = [BarycentricAnchor(int(a["element"]), tuple(a["coords"]))
                   for a in payload["anchors"]]
        mask = payload.get("valid_mask")
        shape = tuple(payload["shape"])
        if mask is not None:
            mask = np.array(mask, dtype=bool).reshape(shape)
        return cls(anchors, shape=shape, valid_mask=mask)


def build_anchors(mesh: TetMesh, points, positions=None, valid_mask=None) -> AnchorSet:
    """Locate each point in the mesh and freeze its barycentric coordinates.

    `points` may be (k, 3) or a grid (r, c, 3); invalid grid slots (NaN or
    masked out) get a degenerate anchor on element 0 with zero influence kept
    out of use by the mask.
    """
    pts = np.asarray(points, dtype=float)
    shape = pts.shape[:-1]
    flat = pts.reshape(-1, 3)
    if valid_mask is None:
        valid = np.all(np.isfinite(flat), axis=1)
    else:
        valid = np.asarray(valid_mask, dtype=bool).ravel()
    anchors = []
    for k, p in enumerate(flat):
        if not valid[k]:
            anchors.append(BarycentricAnchor(0, (0.25, 0.25, 0.25, 0.25)))
            continue
        elem, coords = locate_element(mesh, p, positions=positions)
        anchors.append(BarycentricAnchor(elem, tuple(coords)))
    return AnchorSet(anchors, shape=shape, valid_mask=valid.reshape(shape))
