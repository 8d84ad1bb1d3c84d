"""Tabular experiment results with log-log slope fits and CSV export."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np


def loglog_slope(ns, values) -> float:
    """Least-squares slope of ``log|value|`` against ``log n``.

    Returns nan with fewer than two usable points (zero values are skipped).
    """
    pts = [(math.log(n), math.log(abs(v))) for n, v in zip(ns, values) if abs(v) > 0]
    if len(pts) < 2:
        return math.nan
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


@dataclass
class ExperimentTable:
    """Rows of an experiment plus run metadata.

    ``columns`` fixes the CSV header order; ``meta`` collects summary values
    (fitted slopes, constants, the config record).
    """

    columns: tuple
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, **row):
        missing = set(self.columns) - set(row)
        if missing:
            raise KeyError(f"row is missing columns {sorted(missing)}")
        self.rows.append(row)

    def column(self, name, **where):
        return [r[name] for r in self.rows if all(r[k] == v for k, v in where.items())]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in self.columns])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.to_csv())
