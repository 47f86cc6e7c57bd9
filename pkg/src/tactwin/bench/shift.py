"""Baseline-shift behavior under an actuation schedule, and noise robustness.

The body animates between its rest and deformed grids; each frame gets the
deformation-driven baseline shift plus sensor noise. Two long runs matter:
false positives with no contact present, and detection of a real contact
riding on top of the shifting baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sensor import Touch2D, deformation_metric
from ..touch import detect_touches
from .stats import EvalReport  # noqa: F401  (re-exported alongside reports)


def animation_schedule(n_frames, plateau=0.30, period=500, peak_width=12):
    """Deformation level per frame: a hold level with brief full-range peaks.

    Mimics an inflate-hold-deflate actuation cycle: the body spends most of
    the time near the hold level and sweeps to full deformation for a few
    frames per period (raised-cosine bump, so levels vary smoothly).
    """
    t = np.arange(n_frames)
    phase = t % period
    s = np.full(n_frames, float(plateau))
    in_peak = phase < peak_width
    x = phase[in_peak] / peak_width
    bump = 0.5 * (1.0 - np.cos(2.0 * np.pi * x))
    s[in_peak] = plateau + (1.0 - plateau) * bump
    return s


class _MetricCache:
    """Deformation metric per quantized animation level."""

    def __init__(self, scene, grid_deformed, quant=256):
        self.scene = scene
        self.delta = grid_deformed - scene.grid_rest
        self.quant = quant
        self._cache = {}

    def __call__(self, s):
        key = int(round(s * self.quant))
        m = self._cache.get(key)
        if m is None:
            level = key / self.quant
            g = self.scene.grid_rest + level * self.delta
            m = deformation_metric(g, self.scene.grid_rest, self.scene.grid.valid)
            self._cache[key] = m
        return m


@dataclass
class ShiftReport:
    """Per-taxel maximum baseline shift over one animation run."""

    label: str
    n_frames: int
    max_shift: float            # largest per-taxel maximum (counts)
    avg_max_shift: float        # per-taxel maxima averaged over valid taxels
    max_map: np.ndarray         # (rows, cols) per-taxel maximum shift

    def to_dict(self):
        return {"label": self.label, "n_frames": self.n_frames,
                "max_shift": self.max_shift,
                "avg_max_shift": self.avg_max_shift,
                "max_map": self.max_map.tolist()}


@dataclass
class RobustnessReport:
    n_frames: int
    false_positive_frames: int
    false_positive_rate: float
    touch_frames: int
    touch_hits: int
    detection_rate: float
    max_shift: float            # worst taxel, worst frame (counts)
    avg_max_shift: float        # grid average of per-taxel maxima

    def to_dict(self):
        return self.__dict__.copy()


def shift_max_map(scene, grid_deformed, schedule):
    """Per-taxel maximum of the capped baseline shift over a schedule."""
    cache = _MetricCache(scene, grid_deformed)
    max_map = np.zeros((scene.grid.rows, scene.grid.cols))
    for s in schedule:
        np.maximum(max_map, scene.sensor.baseline_shift(cache(s)), out=max_map)
    max_map[~scene.grid.valid] = 0.0
    return max_map


def baseline_shift_report(scene, grid_deformed, schedule, label="shift") -> ShiftReport:
    """Summarize how far each taxel's baseline wanders during the animation.

    The headline numbers are the worst single taxel and the grid average of
    per-taxel maxima, the two figures a drift calibration is judged on.
    """
    max_map = shift_max_map(scene, grid_deformed, schedule)
    per_taxel = max_map[scene.grid.valid]
    return ShiftReport(label, len(schedule), float(per_taxel.max()),
                       float(per_taxel.mean()), max_map)


def run_robustness(scene, grid_deformed, n_frames=10000, schedule=None,
                   seed=777) -> RobustnessReport:
    """Noise robustness over a long animated run.

    Every frame is synthesized twice from one schedule: once idle (any
    detection is a false positive) and once with a full-strength contact at
    a valid taxel center (the contact must be detected and localized to its
    neighborhood).
    """
    if schedule is None:
        schedule = animation_schedule(n_frames)
    if len(schedule) < n_frames:
        reps = int(np.ceil(n_frames / len(schedule)))
        schedule = np.tile(schedule, reps)
    schedule = schedule[:n_frames]

    cache = _MetricCache(scene, grid_deformed)
    rng = np.random.default_rng(seed)
    valid_sites = np.argwhere(scene.grid.valid)
    thr = scene.sensor.threshold

    fp_frames = 0
    touch_hits = 0
    max_map = np.zeros((scene.grid.rows, scene.grid.cols))
    for t in range(n_frames):
        metric = cache(schedule[t])
        np.maximum(max_map, scene.sensor.baseline_shift(metric), out=max_map)

        idle = scene.sensor.synthesize_frame(scene.grid, [], metric=metric, rng=rng)
        if detect_touches(idle, threshold=thr):
            fp_frames += 1

        site = valid_sites[t % len(valid_sites)]
        touch = Touch2D(u=site[0] * scene.grid.row_pitch,
                        v=site[1] * scene.grid.col_pitch, strength=1.0)
        active = scene.sensor.synthesize_frame(scene.grid, [touch], metric=metric,
                                               rng=rng)
        dets = detect_touches(active, threshold=thr)
        hit = any(abs(d.pos_rc[0] - site[0]) <= 1.0
                  and abs(d.pos_rc[1] - site[1]) <= 1.0 for d in dets)
        if hit:
            touch_hits += 1

    per_taxel = max_map[scene.grid.valid]
    return RobustnessReport(
        n_frames=n_frames,
        false_positive_frames=fp_frames,
        false_positive_rate=fp_frames / n_frames,
        touch_frames=n_frames,
        touch_hits=touch_hits,
        detection_rate=touch_hits / n_frames,
        max_shift=float(per_taxel.max()),
        avg_max_shift=float(per_taxel.mean()),
    )
