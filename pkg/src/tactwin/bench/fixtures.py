"""Recorded localization fixtures: ground-truth probe positions vs estimates.

Two small captures from a 47-taxel sensorized body, digitized from front
(x, y) and side (y, z) views. The rest capture exists in both views with
row-aligned y, so it joins into full 3D points; the deformed capture is
front-view only and stays 2D.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from ..errors import UnknownFixture, ValidationError
from .stats import EvalReport, error_stats

FIXTURE_NAMES = ("rest_small", "deformed_small")


def _read_csv(name):
    path = resources.files(__package__) / "data" / name
    with path.open("r") as fh:
        return np.genfromtxt(fh, delimiter=",", names=True)


def load_fixture(name):
    """Returns (ground_truth, measured) arrays in mm.

    rest_small: (n, 3) pairs joined from the two views; raises
    ValidationError if the shared y columns disagree anywhere.
    deformed_small: (n, 2) front-view pairs.
    """
    if name == "rest_small":
        front = _read_csv("rest_front.csv")
        side = _read_csv("rest_side.csv")
        if len(front) != len(side):
            raise ValidationError("rest fixture views have different row counts")
        if (np.max(np.abs(front["gt_y"] - side["gt_y"])) > 0.0
                or np.max(np.abs(front["m_y"] - side["m_y"])) > 0.0):
            raise ValidationError("rest fixture views disagree on shared y values")
        gt = np.column_stack([front["gt_x"], front["gt_y"], side["gt_z"]])
        m = np.column_stack([front["m_x"], front["m_y"], side["m_z"]])
        return gt, m
    if name == "deformed_small":
        front = _read_csv("deformed_front.csv")
        gt = np.column_stack([front["gt_x"], front["gt_y"]])
        m = np.column_stack([front["m_x"], front["m_y"]])
        return gt, m
    raise UnknownFixture(f"no fixture named '{name}' (have: {FIXTURE_NAMES})")


def evaluate_fixture(name) -> EvalReport:
    gt, m = load_fixture(name)
    errors = np.linalg.norm(gt - m, axis=1)
    return error_stats(errors, label=name,
                       extra={"dimensions": gt.shape[1]})
