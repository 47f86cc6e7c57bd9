"""Synthetic probe experiment: press at known positions, compare estimates.

Probes visit every valid taxel center plus quarter-pitch offsets along both
grid axes. Ground truth in 3D comes from bilinear interpolation of the
anchored taxel positions, the same geometric reference the lifting step
uses, so the reported error isolates the sensing and localization chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NoDetection
from ..sensor import Touch2D, deformation_metric
from ..touch import detect_touches
from .stats import error_stats

QUARTER_OFFSETS = ((0.0, 0.0), (0.25, 0.0), (-0.25, 0.0), (0.0, 0.25), (0.0, -0.25))


@dataclass
class ProbeProtocol:
    offsets: tuple = QUARTER_OFFSETS   # (di, dj) in taxel pitches
    strength: float = 1.0
    seed: int = 12345
    allow_misses: bool = False

    def probe_positions(self, valid):
        """Fractional (i, j) probe sites whose bilinear support is valid."""
        rows, cols = valid.shape
        sites = []
        for i in range(rows):
            for j in range(cols):
                if not valid[i, j]:
                    continue
                for di, dj in self.offsets:
                    fi, fj = i + di, j + dj
                    if not 0.0 <= fi <= rows - 1 or not 0.0 <= fj <= cols - 1:
                        continue
                    if _support_valid(valid, fi, fj):
                        sites.append((fi, fj))
        return sites


def _support_corners(fi, fj):
    i0, j0 = int(np.floor(fi)), int(np.floor(fj))
    ti, tj = fi - i0, fj - j0
    corners = []
    for (ci, wi) in ((i0, 1.0 - ti), (i0 + 1, ti)):
        for (cj, wj) in ((j0, 1.0 - tj), (j0 + 1, tj)):
            w = wi * wj
            if w > 0.0:
                corners.append((ci, cj, w))
    return corners


def _support_valid(valid, fi, fj):
    return all(valid[ci, cj] for ci, cj, _ in _support_corners(fi, fj))


def bilinear_grid_point(grid3d, fi, fj):
    corners = _support_corners(fi, fj)
    out = np.zeros(3)
    for ci, cj, w in corners:
        out += w * grid3d[ci, cj]
    return out


def run_probe_experiment(scene, positions=None, protocol: ProbeProtocol = None,
                         label=None):
    """Press once at every probe site and report 3D localization errors.

    positions: node positions to evaluate against (defaults to the rest
    geometry). Raises NoDetection on a missed probe unless the protocol
    allows misses, in which case misses are counted in the report.
    """
    protocol = protocol or ProbeProtocol()
    mesh = scene.mesh
    q = mesh.vertices0 if positions is None else np.asarray(positions, dtype=float)
    grid3d = scene.anchors.evaluate(mesh, q)
    metric = deformation_metric(grid3d, scene.grid_rest, scene.grid.valid)
    rng = np.random.default_rng(protocol.seed)

    errors = []
    misses = 0
    sites = protocol.probe_positions(scene.grid.valid)
    for fi, fj in sites:
        gt = bilinear_grid_point(grid3d, fi, fj)
        touch = Touch2D(u=fi * scene.grid.row_pitch, v=fj * scene.grid.col_pitch,
                        strength=protocol.strength)
        frame = scene.sensor.synthesize_frame(scene.grid, [touch], metric=metric,
                                              rng=rng)
        dets = detect_touches(frame, threshold=scene.sensor.threshold)
        if not dets:
            if not protocol.allow_misses:
                raise NoDetection(f"probe at ({fi:.2f}, {fj:.2f}) went undetected")
            misses += 1
            continue
        lifted = dets[0].lift_to_3d(grid3d)
        errors.append(float(np.linalg.norm(lifted - gt)))

    name = label or f"probe[{scene.name}]"
    return error_stats(errors, label=name,
                       extra={"sites": len(sites), "misses": misses,
                              "detection_rate": 1.0 - misses / max(len(sites), 1)})
