"""Experiment reports: verdicts, metrics, CSV rows, JSON serialisation."""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_COLUMNS = ("series", "t", "lhs", "rhs", "ratio")


@dataclass
class Verdict:
    criterion: str
    detail: str
    value: float
    tolerance: float
    passed: bool

    def as_dict(self):
        return {
            "criterion": self.criterion,
            "detail": self.detail,
            "value": _clean(self.value),
            "tolerance": _clean(self.tolerance),
            "passed": bool(self.passed),
        }


@dataclass
class ExperimentReport:
    name: str
    params: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)  # (series, t, lhs, rhs, ratio)
    files: dict = field(default_factory=dict)  # extra CSVs: relative path -> text
    wall_seconds: float = 0.0

    def check(self, criterion, detail, value, tolerance, passed):
        v = Verdict(criterion, detail, float(value), float(tolerance), bool(passed))
        self.verdicts.append(v)
        return v

    def at_most(self, criterion, detail, value, tolerance):
        return self.check(criterion, detail, value, tolerance, value <= tolerance)

    def row(self, series, t, lhs, rhs):
        ratio = lhs / rhs if rhs != 0 else (1.0 if lhs == 0 else math.inf)
        self.rows.append((series, float(t), float(lhs), float(rhs), float(ratio)))

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def failures(self):
        return [v for v in self.verdicts if not v.passed]

    def csv_text(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for series, t, lhs, rhs, ratio in self.rows:
            w.writerow([series, repr(t), repr(lhs), repr(rhs), repr(ratio)])
        return buf.getvalue()

    def as_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "params": _clean(self.params),
            "verdicts": [v.as_dict() for v in self.verdicts],
            "metrics": _clean(self.metrics),
            "wall_seconds": round(self.wall_seconds, 3),
        }


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_reports(reports, out_dir, config):
    """report.json plus one CSV per experiment (and any extra files) under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for rep in reports:
        if rep.rows:
            (out / f"{rep.name}.csv").write_text(rep.csv_text())
        for rel, text in rep.files.items():
            path = out / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
    doc = {
        "passed": all(r.passed for r in reports),
        "config": _clean(config),
        "experiments": {r.name: r.as_dict() for r in reports},
    }
    (out / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return out / "report.json"
