"""Multitouch peak detection and sub-taxel localization.

Detection walks global maxima above the threshold, localizes each with a
weighted centroid over the 3x3 neighborhood, then zeroes that neighborhood
and repeats. Negative counts contribute nothing to the weights, which keeps
every centroid inside the convex hull of its neighborhood.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroActivation
from .sensor import ActivationMap


@dataclass
class TouchDetection:
    peak: tuple                 # (i, j) of the maximal taxel
    taxels: np.ndarray          # (k, 2) contributing taxel indices
    weights: np.ndarray         # (k,) convex weights over those taxels
    pos_rc: tuple               # weighted centroid in index space (row, col)

    def chart_mm(self, row_pitch, col_pitch):
        return (self.pos_rc[0] * row_pitch, self.pos_rc[1] * col_pitch)

    def lift_to_3d(self, grid3d):
        """Carry the centroid to 3D with the same convex weights."""
        g = np.asarray(grid3d, dtype=float)
        pts = g[self.taxels[:, 0], self.taxels[:, 1]]
        return self.weights @ pts


def weighted_position_2d(values, peak, valid):
    """Centroid over the valid, in-grid 3x3 patch around `peak`.

    Returns (taxels, weights, (row, col)). Negative values are clamped to
    zero before weighting; weights renormalize over what remains.
    """
    rows, cols = values.shape
    pi, pj = peak
    ii = []
    vv = []
    for i in range(max(pi - 1, 0), min(pi + 2, rows)):
        for j in range(max(pj - 1, 0), min(pj + 2, cols)):
            if valid[i, j]:
                ii.append((i, j))
                vv.append(max(float(values[i, j]), 0.0))
    taxels = np.array(ii, dtype=np.int64)
    vv = np.array(vv)
    total = vv.sum()
    if total <= 0:
        raise ZeroActivation(f"no positive activation around peak {peak}")
    w = vv / total
    centroid = w @ taxels
    return taxels, w, (float(centroid[0]), float(centroid[1]))


def _patch_foot(c00, c01, c10, c11, p):
    """Closest point on one bilinear patch, by clamped Gauss-Newton."""
    s = t = 0.5
    x = None
    for _ in range(16):
        a = c00 + t * (c01 - c00)
        b = c10 + t * (c11 - c10)
        x = a + s * (b - a)
        dxds = b - a
        dxdt = (c01 - c00) + s * ((c11 - c10) - (c01 - c00))
        r = x - p
        jtj = np.array([[dxds @ dxds, dxds @ dxdt],
                        [dxds @ dxdt, dxdt @ dxdt]])
        rhs = -np.array([dxds @ r, dxdt @ r])
        try:
            step = np.linalg.solve(jtj, rhs)
        except np.linalg.LinAlgError:
            break
        s = min(max(s + step[0], 0.0), 1.0)
        t = min(max(t + step[1], 0.0), 1.0)
        if np.abs(step).max() < 1e-10:
            break
    a = c00 + t * (c01 - c00)
    b = c10 + t * (c11 - c10)
    x = a + s * (b - a)
    return s, t, x


def project_to_grid(grid3d, valid, point):
    """Nearest point on the taxel sheet, as fractional (row, col).

    The sheet is the union of bilinear patches over grid cells whose four
    corners are valid; cells touching invalid taxels are skipped. Falls back
    to the nearest valid taxel center when no complete cell exists. Returns
    (frac_row, frac_col, foot_3d, distance_mm).
    """
    g = np.asarray(grid3d, dtype=float)
    p = np.asarray(point, dtype=float)
    rows, cols = valid.shape
    best = None
    for i in range(rows - 1):
        for j in range(cols - 1):
            if not (valid[i, j] and valid[i, j + 1]
                    and valid[i + 1, j] and valid[i + 1, j + 1]):
                continue
            # cell centroid prefilter keeps the scan cheap on big grids
            center = 0.25 * (g[i, j] + g[i, j + 1] + g[i + 1, j] + g[i + 1, j + 1])
            if best is not None and np.linalg.norm(center - p) > best[3] + \
                    np.linalg.norm(g[i + 1, j + 1] - g[i, j]):
                continue
            s, t, x = _patch_foot(g[i, j], g[i, j + 1],
                                  g[i + 1, j], g[i + 1, j + 1], p)
            d = float(np.linalg.norm(x - p))
            if best is None or d < best[3]:
                best = (i + s, j + t, x, d)
    if best is None:
        ii, jj = np.nonzero(valid)
        d = np.linalg.norm(g[ii, jj] - p, axis=1)
        k = int(np.argmin(d))
        best = (float(ii[k]), float(jj[k]), g[ii[k], jj[k]], float(d[k]))
    return best


def detect_touches(activation: ActivationMap, threshold=20, max_touches=5):
    """All touches in one frame, strongest first.

    A taxel starts a touch when its count is strictly above `threshold`.
    After localizing, the 3x3 neighborhood is zeroed so one contact cannot
    shadow the search for the next.
    """
    work = activation.values.astype(float).copy()
    work[~activation.valid] = 0.0
    rows, cols = work.shape
    touches = []
    for _ in range(max_touches):
        flat = int(np.argmax(work))
        pi, pj = divmod(flat, cols)
        if work[pi, pj] <= threshold:
            break
        taxels, weights, pos = weighted_position_2d(work, (pi, pj), activation.valid)
        touches.append(TouchDetection((pi, pj), taxels, weights, pos))
        work[max(pi - 1, 0):pi + 2, max(pj - 1, 0):pj + 2] = 0.0
    return touches
