"""CheckReport: the record every inequality/identity monitor returns."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

REPORT_COLUMNS = ("name", "samples", "worst_slack", "mean_slack", "tolerance", "asserted", "pass", "notes")


@dataclass(frozen=True)
class CheckReport:
    """Slack statistics for one named property.

    A slack is ``lhs - rhs`` of an inequality (or ``-|residual|`` of an
    identity), already normalized. ``passed`` is ``worst_slack >= -tolerance``.
    Probes carry ``asserted=False``: their ``passed`` is informative only.
    """

    name: str
    samples: int
    worst_slack: float
    mean_slack: float
    tolerance: float
    passed: bool
    asserted: bool = True
    notes: str = ""
    parts: tuple = field(default=(), compare=False)

    @classmethod
    def from_slacks(cls, name, slacks, tolerance, *, asserted=True, notes=""):
        s = np.asarray(slacks, dtype=float).ravel()
        if s.size == 0:
            return cls(name, 0, math.nan, math.nan, tolerance, False, asserted,
                       (notes + "; " if notes else "") + "no samples")
        if np.isnan(s).any():
            worst = math.nan
            passed = False
            notes = (notes + "; " if notes else "") + "NaN slack encountered"
        else:
            worst = float(s.min())
            passed = worst >= -tolerance
        return cls(name, int(s.size), worst, float(np.nanmean(s)), float(tolerance),
                   bool(passed), asserted, notes)

    @property
    def failed(self):
        """True when the report is asserted and did not pass."""
        return self.asserted and not self.passed

    def row(self):
        return {
            "name": self.name,
            "samples": self.samples,
            "worst_slack": repr(self.worst_slack),
            "mean_slack": repr(self.mean_slack),
            "tolerance": repr(self.tolerance),
            "asserted": int(self.asserted),
            "pass": int(self.passed),
            "notes": self.notes,
        }

    def summary(self):
        tag = ("PASS" if self.passed else "FAIL") if self.asserted else "PROBE"
        return (f"[{tag}] {self.name}: worst={self.worst_slack:.3e} "
                f"mean={self.mean_slack:.3e} n={self.samples} tol={self.tolerance:g}"
                + (f" ({self.notes})" if self.notes else ""))


def merge(name, reports, *, notes=""):
    """Combine several reports of the same property into one."""
    reports = list(reports)
    worst = min((r.worst_slack for r in reports if r.samples), default=math.nan)
    n = sum(r.samples for r in reports)
    mean = (sum(r.mean_slack * r.samples for r in reports if r.samples) / n) if n else math.nan
    tol = max(r.tolerance for r in reports)
    passed = all(r.passed for r in reports)
    asserted = any(r.asserted for r in reports)
    return CheckReport(name, n, worst, mean, tol, passed, asserted, notes, tuple(reports))


def reports_to_csv(reports):
    """Serialize reports as comma-delimited text with a fixed header."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.row())
    return buf.getvalue()
