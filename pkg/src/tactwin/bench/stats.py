"""Error statistics shared by the evaluation runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInput

REFERENCE_SPAN_MM = 152.0


@dataclass
class EvalReport:
    label: str
    count: int
    mean_mm: float
    std_mm: float
    max_mm: float
    percent_of_span: float
    extra: dict = None

    def to_dict(self):
        d = {
            "label": self.label,
            "count": self.count,
            "mean_mm": self.mean_mm,
            "std_mm": self.std_mm,
            "max_mm": self.max_mm,
            "percent_of_span": self.percent_of_span,
        }
        if self.extra:
            d.update(self.extra)
        return d

    def __str__(self):
        return (f"{self.label}: n={self.count} mean={self.mean_mm:.3f}mm "
                f"std={self.std_mm:.3f}mm max={self.max_mm:.3f}mm "
                f"({self.percent_of_span:.2f}% of span)")


def error_stats(errors, label="errors", span_mm=REFERENCE_SPAN_MM, extra=None):
    """Summary of a set of positional errors (mm). Sample std (ddof=1)."""
    e = np.asarray(errors, dtype=float).ravel()
    if e.size == 0:
        raise EmptyInput(f"no errors to summarize for '{label}'")
    std = float(e.std(ddof=1)) if e.size > 1 else 0.0
    return EvalReport(label, int(e.size), float(e.mean()), std,
                      float(e.max()), float(e.mean() / span_mm * 100.0), extra)
