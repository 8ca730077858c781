"""Report serialization: atomic file writes, versioned CSV, 9-digit numbers.

Files are written to a temporary sibling and renamed into place so an
interrupted run never leaves a partial report under the final name.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Iterable

import numpy as np

__all__ = [
    "fmt9",
    "atomic_write_text",
    "write_json",
    "write_csv",
    "regret_csv_rows",
    "diagnostics_csv_rows",
    "hotel_csv_rows",
]


def fmt9(x) -> str:
    """Render a number with 9 significant digits (or as-is if not a number)."""
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str | os.PathLike, obj: dict) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(
    path: str | os.PathLike,
    schema: str,
    header: Iterable[str],
    rows: Iterable[Iterable],
) -> None:
    lines = [f"# schema: {schema}", ",".join(header)]
    for row in rows:
        lines.append(",".join(fmt9(x) for x in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def regret_csv_rows(report) -> list[list]:
    """Long-format rows (experiment, T, metric, value) for a regret report."""
    rows = []
    for e in report.entries:
        rows.append([report.policy, e.horizon, "mean_regret", e.mean])
        rows.append([report.policy, e.horizon, "se", e.se])
        rows.append([report.policy, e.horizon, "reps", e.reps])
    rows.append([report.policy, "", "fit_intercept", report.fit_intercept])
    rows.append([report.policy, "", "fit_slope", report.fit_slope])
    rows.append([report.policy, "", "fit_r2", report.fit_r2])
    return rows


def diagnostics_csv_rows(report) -> list[list]:
    rows = []
    for t, m, s in zip(report.checkpoints, report.means, report.ses):
        rows.append([report.name, int(t), "mean", m])
        rows.append([report.name, int(t), "se", s])
    for key, value in sorted(report.extras.items()):
        if isinstance(value, (int, float, np.integer, np.floating)):
            rows.append([report.name, "", key, value])
    return rows


def hotel_csv_rows(report) -> list[list]:
    rows = []
    for d in report.days:
        rows.append([f"day{d.day}", "", "requests", "|".join(str(k) for k in d.requests)])
        rows.append([f"day{d.day}", "", "static_mean", d.static_mean])
        rows.append([f"day{d.day}", "", "dynamic_mean", d.dynamic_mean])
        rows.append([f"day{d.day}", "", "improvement_pct", d.improvement_pct])
        rows.append([f"day{d.day}", "", "p_value", d.p_value])
    rows.append(["aggregate", "", "static_total", report.aggregate_static])
    rows.append(["aggregate", "", "dynamic_total", report.aggregate_dynamic])
    rows.append(["aggregate", "", "improvement_pct", report.aggregate_improvement_pct])
    rows.append(["aggregate", "", "pooled_p_value", report.pooled_p_value])
    return rows
