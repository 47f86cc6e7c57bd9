"""Mutual-capacitance taxel grid synthesis.

Values are baseline-subtracted digital counts, rounded to integers and
deliberately left signed: real acquisition hardware reports negative
excursions around the baseline, and clamping them would skew the noise
statistics that the detection thresholds are tuned against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InsufficientFrames


@dataclass
class TaxelGrid:
    """Index lattice of taxels with physical pitches (mm) and a validity mask.

    Chart coordinates: taxel (i, j) sits at (u, v) = (i * row_pitch,
    j * col_pitch), a 2D unrolling of the sensed surface patch.
    """

    rows: int
    cols: int
    row_pitch: float
    col_pitch: float
    valid: np.ndarray = None

    def __post_init__(self):
        if self.valid is None:
            self.valid = np.ones((self.rows, self.cols), dtype=bool)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.valid.shape != (self.rows, self.cols):
            raise DimensionMismatch("valid mask shape must be (rows, cols)")

    def chart_coords(self):
        """(rows, cols, 2) array of (u, v) taxel centers in mm."""
        u = np.arange(self.rows)[:, None] * self.row_pitch
        v = np.arange(self.cols)[None, :] * self.col_pitch
        out = np.empty((self.rows, self.cols, 2))
        out[..., 0] = u
        out[..., 1] = v
        return out

    @property
    def n_valid(self):
        return int(self.valid.sum())


@dataclass
class Touch2D:
    """A contact in chart coordinates: (u, v) mm and a strength in [0, 1]."""

    u: float
    v: float
    strength: float = 1.0


@dataclass
class ActivationMap:
    values: np.ndarray          # (rows, cols) int32, signed counts
    valid: np.ndarray           # (rows, cols) bool

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int32)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.values.shape != self.valid.shape:
            raise DimensionMismatch("values and valid mask must share a shape")


@dataclass
class SensorModel:
    """Forward model from contacts and deformation to digital counts.

    counts = round(sum_t strength * amplitude * exp(-d^2 / (2 sigma^2))
                   + min(shift_gain * metric, shift_cap) + noise)
    """

    amplitude: float = 100.0
    sigma: float = 8.0            # mm, footprint of one contact
    noise_std: float = 1.9        # counts
    shift_gain: float = 0.0       # counts per unit deformation metric
    shift_cap: float = 16.0       # counts
    threshold: int = 20           # detection threshold, exclusive
    gain_map: np.ndarray = None   # optional per-taxel gain multiplier
    seed: int = 0
    _rng: np.random.Generator = field(default=None, repr=False)

    def rng(self):
        if self._rng is None:
            self._rng = np.random.default_rng(self.seed)
        return self._rng

    def reseed(self, seed):
        self._rng = np.random.default_rng(seed)

    def baseline_shift(self, metric):
        """Deformation-induced count shift, saturating at shift_cap.

        gain_map scales the gain per taxel; real grids shift unevenly
        because some crossing points deform more than their neighbors.
        """
        gain = self.shift_gain
        if self.gain_map is not None:
            gain = gain * self.gain_map
        return np.minimum(gain * np.asarray(metric, dtype=float),
                          self.shift_cap)

    def synthesize_frame(self, grid: TaxelGrid, touches=(), metric=None,
                         rng=None) -> ActivationMap:
        rng = rng if rng is not None else self.rng()
        chart = grid.chart_coords()
        acc = np.zeros((grid.rows, grid.cols))
        for t in touches:
            d2 = (chart[..., 0] - t.u) ** 2 + (chart[..., 1] - t.v) ** 2
            acc += t.strength * self.amplitude * np.exp(-d2 / (2.0 * self.sigma ** 2))
        if metric is not None:
            acc += self.baseline_shift(metric)
        acc += rng.normal(0.0, self.noise_std, size=acc.shape)
        values = np.rint(acc).astype(np.int32)
        values[~grid.valid] = 0
        return ActivationMap(values, grid.valid.copy())


def deformation_metric(grid3d, grid3d_rest, valid):
    """Per-taxel relative change of mean 4-neighbor spacing.

    For each taxel: the mean over its valid lattice neighbors of
    |current distance| / |rest distance|, folded into |mean - 1|. Zero at
    rest and under any rigid motion of the whole grid.
    """
    g = np.asarray(grid3d, dtype=float)
    g0 = np.asarray(grid3d_rest, dtype=float)
    valid = np.asarray(valid, dtype=bool)
    rows, cols = valid.shape
    ratio_sum = np.zeros((rows, cols))
    count = np.zeros((rows, cols))

    def accumulate(a_idx, b_idx):
        ia, ja = a_idx
        ib, jb = b_idx
        ok = valid[ia, ja] & valid[ib, jb]
        d0 = np.linalg.norm(g0[ia, ja] - g0[ib, jb], axis=-1)
        d1 = np.linalg.norm(g[ia, ja] - g[ib, jb], axis=-1)
        ok = ok & (d0 > 1e-12)
        r = np.zeros_like(d0)
        r[ok] = d1[ok] / d0[ok]
        for (ii, jj) in (a_idx, b_idx):
            np.add.at(ratio_sum, (ii[ok], jj[ok]), r[ok])
            np.add.at(count, (ii[ok], jj[ok]), 1.0)

    ii, jj = np.meshgrid(np.arange(rows - 1), np.arange(cols), indexing="ij")
    accumulate((ii.ravel(), jj.ravel()), (ii.ravel() + 1, jj.ravel()))
    ii, jj = np.meshgrid(np.arange(rows), np.arange(cols - 1), indexing="ij")
    accumulate((ii.ravel(), jj.ravel()), (ii.ravel(), jj.ravel() + 1))

    metric = np.zeros((rows, cols))
    has = count > 0
    metric[has] = np.abs(ratio_sum[has] / count[has] - 1.0)
    return metric


def calibrate_baseline(frames, min_frames=300):
    """Per-taxel mean and standard deviation over a window of idle frames."""
    if len(frames) < min_frames:
        raise InsufficientFrames(
            f"need at least {min_frames} frames, got {len(frames)}")
    stack = np.stack([f.values for f in frames]).astype(float)
    return stack.mean(axis=0), stack.std(axis=0)
