"""Figure rendering for run reports (PNG files next to the CSV outputs)."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fusion import FusedStepRecord
from .sensors import BeaconDatabase
from .synth import TrueStep

_RC = {
    "figure.figsize": (7.0, 5.0),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "legend.fontsize": 9,
}


def save_trajectory_figure(
    records: Sequence[FusedStepRecord],
    path: str | Path,
    truth: Optional[Sequence[TrueStep]] = None,
    db: Optional[BeaconDatabase] = None,
) -> None:
    """Plan-view plot of dead-reckoned vs fused paths (and truth/beacons)."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        if truth is not None:
            tx = [s.position.x for s in truth]
            ty = [s.position.y for s in truth]
            ax.plot(tx, ty, color="0.3", lw=1.2, label="ground truth")
        px = [r.x_pdr.x for r in records]
        py = [r.x_pdr.y for r in records]
        ax.plot(px, py, color="tab:orange", lw=1.0, label="dead reckoning")
        fx = [r.x_fused.x for r in records]
        fy = [r.x_fused.y for r in records]
        ax.plot(fx, fy, color="tab:blue", lw=1.0, label="fused")
        if db is not None and len(db):
            bx = [b.position.x for b in db.beacons()]
            by = [b.position.y for b in db.beacons()]
            ax.scatter(bx, by, marker="^", s=18, color="0.6", label="beacons", zorder=3)
        ux = [r.x_fused.x for r in records if r.update_applied]
        uy = [r.x_fused.y for r in records if r.update_applied]
        if ux:
            ax.scatter(ux, uy, marker="o", s=24, facecolors="none", edgecolors="tab:red",
                       label="accepted fixes", zorder=4)
        ax.set_xlabel("east, m")
        ax.set_ylabel("north, m")
        ax.set_aspect("equal", adjustable="datalim")
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def save_cdf_figure(curves: dict[str, np.ndarray], path: str | Path) -> None:
    """Error-CDF overlay; ``curves`` maps label -> error series (metres)."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for label, series in curves.items():
            arr = np.sort(np.asarray(series, dtype=float))
            frac = np.arange(1, arr.size + 1) / arr.size
            ax.step(arr, frac, where="post", label=label)
        ax.set_xlabel("horizontal error, m")
        ax.set_ylabel("cumulative fraction")
        ax.set_ylim(0.0, 1.02)
        ax.legend(loc="lower right")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
