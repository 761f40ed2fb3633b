"""Metric curves: the long-form CSV they are stored in, and their summaries."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from pathlib import Path

import numpy as np

DEFAULT_WINDOW = 32


def mauc(values, window: int = DEFAULT_WINDOW) -> float:
    """Mean area under the curve over the last ``window`` points (trapezoid rule)."""
    if window < 1:
        raise ValueError("window must be >= 1")
    tail = np.asarray(values, dtype=float)[-window:]
    if len(tail) == 0:
        raise ValueError("empty curve")
    if len(tail) == 1:
        return float(tail[0])
    return float(np.trapezoid(tail) / (len(tail) - 1))


METRICS_HEADER = ["step", "metric", "value", "stderr"]


def format_metrics(rows) -> str:
    """``(step, metric, value, stderr)`` rows as CSV; empty stderr stays empty."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for step, name, value, err in rows:
        writer.writerow([step, name, repr(float(value)), "" if err == "" else repr(float(err))])
    return buf.getvalue()


def read_metrics(path: str | Path) -> dict[str, list[tuple[float, float]]]:
    """metric -> [(step, value), ...] in file order."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != METRICS_HEADER:
            raise ValueError(f"{path}: not a metrics file (header {header})")
        out = defaultdict(list)
        for row in reader:
            out[row[1]].append((float(row[0]), float(row[2])))
    return dict(out)
