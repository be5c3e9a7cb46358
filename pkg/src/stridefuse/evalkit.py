"""Trajectory error metrics: per-step error, percentiles, CDF, recognition.

All estimators are pinned so reported numbers are unambiguous: percentiles
use linear interpolation between order statistics (inclusive endpoints),
and the CDF assigns fraction (i+1)/n to the i-th sorted error.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .fusion import FusedStepRecord
from .sensors import Position2D
from .synth import BeaconEvent, TrueStep


def horizontal_error(
    estimated: Sequence[Position2D], truth: Sequence[Position2D]
) -> np.ndarray:
    """Per-step Euclidean error between aligned trajectories, metres."""
    if len(estimated) != len(truth):
        raise ValueError(
            f"trajectory length {len(estimated)} != ground truth length {len(truth)}"
        )
    est = np.asarray([(p.x, p.y) for p in estimated], dtype=float)
    tru = np.asarray([(p.x, p.y) for p in truth], dtype=float)
    if est.size == 0:
        return np.empty(0)
    return np.hypot(est[:, 0] - tru[:, 0], est[:, 1] - tru[:, 1])


def percentile(series: Sequence[float] | np.ndarray, q: float) -> float:
    """Linear-interpolation percentile, q in (0, 100)."""
    arr = np.asarray(series, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot take a percentile of an empty series")
    if not 0.0 < q < 100.0:
        raise ValueError(f"q must be in (0, 100), got {q}")
    return float(np.percentile(arr, q, method="linear"))


CDF_HEADER = "error_m,fraction"


def cdf_export(series: Sequence[float] | np.ndarray, path: str | Path) -> None:
    """Write sorted (error, cumulative fraction) pairs as CSV.

    Both columns are monotone non-decreasing and the final fraction is 1.
    """
    arr = np.sort(np.asarray(series, dtype=float))
    if arr.size == 0:
        raise ValueError("cannot export a CDF of an empty series")
    n = arr.size
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(CDF_HEADER + "\n")
        for i, v in enumerate(arr):
            fh.write(f"{v:.6f},{(i + 1) / n:.6f}\n")


def load_cdf(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a CDF CSV back as (errors, fractions)."""
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return rows[:, 0], rows[:, 1]


class RecognitionStats(NamedTuple):
    recognized: int
    total: int
    accuracy: Optional[float]


def recognition_stats(
    records: Sequence[FusedStepRecord], events: Sequence[BeaconEvent]
) -> RecognitionStats:
    """Count scheduled beacon events whose step applied an update.

    With no scheduled events the accuracy is reported as absent.
    """
    applied_steps = {r.step for r in records if r.update_applied}
    recognized = sum(1 for ev in events if ev.step in applied_steps)
    total = len(events)
    accuracy = recognized / total if total else None
    return RecognitionStats(recognized=recognized, total=total, accuracy=accuracy)


def heading_error(records: Sequence[FusedStepRecord], truth: Sequence[TrueStep]) -> np.ndarray:
    """Per-step absolute heading error, radians, wrapped to [0, pi]."""
    if len(records) != len(truth):
        raise ValueError("records and truth must have equal step counts")
    out = np.empty(len(records))
    for i, (r, s) in enumerate(zip(records, truth)):
        d = math.atan2(math.sin(r.psi - s.heading), math.cos(r.psi - s.heading))
        out[i] = abs(d)
    return out


def metrics_summary(
    errors: Optional[np.ndarray],
    recognition: Optional[RecognitionStats] = None,
) -> dict:
    """The metrics JSON payload: {p50, p75, p95, mean, recognized, total}."""
    if errors is not None and len(errors):
        payload = {
            "p50": percentile(errors, 50),
            "p75": percentile(errors, 75),
            "p95": percentile(errors, 95),
            "mean": float(np.mean(errors)),
        }
    else:
        payload = {"p50": None, "p75": None, "p95": None, "mean": None}
    payload["recognized"] = recognition.recognized if recognition else None
    payload["total"] = recognition.total if recognition else None
    return payload


def write_metrics(metrics: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(metrics, indent=2) + "\n", encoding="utf-8")
