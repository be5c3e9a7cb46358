"""Gated Kalman fusion of dead reckoning with beacon position fixes.

Per detected step the filter predicts with the stride displacement, grows
the drift model, and derives the gross-error gate T. Candidate beacon
fixes for that step are admitted only if they land within T of the
prediction; the survivors elect a single observation through the location
consistency vote, which then drives a standard position-only Kalman
update followed by a low-pass blend against the previous state. The state
and observation are both bare planar positions (transition and
observation matrices are the identity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import deadreck, orientation, stride
from .beacons import MatchList, QueryKey, consistency_vote
from .deadreck import DriftModel, NoiseConfig
from .orientation import MdrConfig
from .sensors import BeaconDatabase, ImuSample, Position2D, ValidationError
from .stride import StrideConfig


def as_cov(value, name: str = "covariance") -> np.ndarray:
    """Coerce a scalar or 2x2 array-like to a validated 2x2 covariance."""
    if np.isscalar(value):
        m = float(value) * np.eye(2)
    else:
        m = np.asarray(value, dtype=float)
    if m.shape != (2, 2):
        raise ValueError(f"{name} must be scalar or 2x2, got shape {m.shape}")
    if not np.allclose(m, m.T, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(m).min() < -1e-12:
        raise ValueError(f"{name} must be positive semi-definite")
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class FilterState:
    """Position estimate and its 2x2 covariance (symmetric PSD)."""

    x: Position2D
    P: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "P", as_cov(self.P, "P"))


@dataclass(frozen=True)
class FusionConfig:
    """Filter tuning. ``q`` and ``r`` may be None to derive defaults at run
    time (q from the mean step length, r from the adjacency margin)."""

    q: Optional[np.ndarray] = None
    r: Optional[np.ndarray] = None
    p0: np.ndarray = field(default_factory=lambda: np.eye(2))
    smooth_a: float = 0.7

    def __post_init__(self) -> None:
        if self.q is not None:
            object.__setattr__(self, "q", as_cov(self.q, "Q"))
        if self.r is not None:
            object.__setattr__(self, "r", as_cov(self.r, "R"))
        object.__setattr__(self, "p0", as_cov(self.p0, "P0"))
        if not 0.0 <= self.smooth_a <= 1.0:
            raise ValueError(f"smooth_a must be in [0, 1], got {self.smooth_a}")


@dataclass(frozen=True)
class FusedStepRecord:
    """Per-step pipeline output.

    ``x_pdr`` is the dead-reckoned prediction before any correction at
    this step; ``x_fused`` is the emitted estimate. ``t_threshold`` is the
    gross-error gate active at the step. ``psi``, ``length`` and ``alpha``
    carry the stride/orientation context for downstream analysis.
    """

    step: int
    t: float
    x_pdr: Position2D
    x_fused: Position2D
    update_applied: bool
    accepted_beacon: Optional[str]
    t_threshold: float
    psi: float
    length: float
    alpha: int
    support: int = 0

    def __post_init__(self) -> None:
        if self.update_applied and self.accepted_beacon is None:
            raise ValueError("an applied update must name its accepted beacon")


class GateResult(NamedTuple):
    z: Position2D
    beacon_id: str
    support: int


def predict(state: FilterState, length: float, psi: float, Q: np.ndarray) -> FilterState:
    """Propagate the state by one stride and grow the covariance by Q."""
    if length < 0:
        raise ValueError(f"step length must be >= 0, got {length}")
    x = deadreck.propagate(state.x, length, psi)
    return FilterState(x=x, P=state.P + Q)


def ges_gate(
    match_list: MatchList,
    x: Position2D,
    threshold: float,
    db: BeaconDatabase,
    bin_radius: float,
    first_pass: bool = False,
) -> Optional[GateResult]:
    """Admit candidates within ``threshold`` of the prediction, then pick.

    Returns None when every candidate is gated out. By default the
    surviving candidates run the consistency vote; ``first_pass`` instead
    takes the highest-similarity survivor directly.
    """
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    survivors = [
        c
        for c in match_list.candidates
        if db[c.beacon_id].position.distance_to(x) < threshold
    ]
    if not survivors:
        return None
    if first_pass:
        best = survivors[0]
        return GateResult(z=db[best.beacon_id].position, beacon_id=best.beacon_id, support=1)
    vote = consistency_vote(
        MatchList.from_candidates(match_list.query_key, survivors), db, bin_radius
    )
    return GateResult(z=vote.position, beacon_id=vote.beacon_id, support=vote.support)


def kf_update(state: FilterState, z: Position2D, R: np.ndarray) -> FilterState:
    """Standard Kalman measurement update with identity observation."""
    P = state.P
    S = P + R
    try:
        K = np.linalg.solve(S.T, P.T).T
    except np.linalg.LinAlgError as exc:
        raise ValueError("innovation covariance is singular") from exc
    y = np.array([z.x - state.x.x, z.y - state.x.y])
    dx = K @ y
    P_new = (np.eye(2) - K) @ P
    P_new = 0.5 * (P_new + P_new.T)
    return FilterState(x=Position2D(state.x.x + dx[0], state.x.y + dx[1]), P=P_new)


def smooth(x_new: Position2D, x_prev: Position2D, a: float) -> Position2D:
    """Low-pass blend a*x_new + (1-a)*x_prev."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a must be in [0, 1], got {a}")
    return Position2D(
        a * x_new.x + (1.0 - a) * x_prev.x,
        a * x_new.y + (1.0 - a) * x_prev.y,
    )


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one pipeline run needs, resolved ahead of time.

    ``gamma`` falls back to half the minimum beacon spacing; ``bin_radius``
    falls back to gamma. ``smooth_feedback`` selects whether the smoothed
    estimate is carried forward as the filter state (default) or applied
    to the emitted trajectory only.
    """

    stride: StrideConfig = field(default_factory=StrideConfig)
    mdr: MdrConfig = field(default_factory=MdrConfig)
    drift_noise: NoiseConfig = field(default_factory=NoiseConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    gamma: Optional[float] = None
    bin_radius: Optional[float] = None
    ges_enabled: bool = True
    mdr_enabled: bool = True
    first_pass: bool = False
    literal_sum: bool = False
    smooth_feedback: bool = True
    start: Position2D = Position2D(0.0, 0.0)


def resolve_gamma(cfg: PipelineConfig, db: Optional[BeaconDatabase]) -> float:
    """Adjacency margin: explicit override, else half the minimum beacon
    spacing, else zero when no database is in play."""
    if cfg.gamma is not None:
        return cfg.gamma
    if db is not None and db.min_spacing is not None:
        return 0.5 * db.min_spacing
    if db is not None and len(db) > 0:
        raise ValidationError(
            "beacon spacing is undefined for a database of fewer than two "
            "beacons; set gamma explicitly"
        )
    return 0.0


def _match_lookup(
    matches: Optional[dict[QueryKey, MatchList]],
    events: Sequence[stride.StepEvent],
) -> dict[int, MatchList]:
    """Resolve query keys to 1-based step numbers.

    Integer keys (and integer-valued strings) are step numbers; float keys
    (and float strings) are timestamps matched to the nearest step peak
    within half the median inter-step interval.
    """
    if not matches:
        return {}
    peak_times = [ev.t_peak for ev in events]
    gaps = [b - a for a, b in zip(peak_times, peak_times[1:])]
    tol = 0.5 * sorted(gaps)[len(gaps) // 2] if gaps else math.inf

    resolved: dict[int, MatchList] = {}
    for key, mlist in matches.items():
        if isinstance(key, bool):
            raise ValidationError(f"match query key {key!r} is not a step or timestamp")
        if isinstance(key, int):
            step = key
        else:
            try:
                as_float = float(key)
            except (TypeError, ValueError) as exc:
                raise ValidationError(
                    f"match query key {key!r} is neither a step index nor a timestamp"
                ) from exc
            if isinstance(key, str) and as_float.is_integer() and "." not in key:
                step = int(as_float)
            else:
                diffs = [abs(t - as_float) for t in peak_times]
                best = min(range(len(diffs)), key=diffs.__getitem__)
                if diffs[best] > tol:
                    raise ValidationError(
                        f"match timestamp {key!r} is not near any detected step peak"
                    )
                step = best + 1
        if step in resolved:
            raise ValidationError(f"multiple match lists resolve to step {step}")
        resolved[step] = mlist
    return resolved


def run_pipeline(
    samples: Sequence[ImuSample],
    matches: Optional[dict[QueryKey, MatchList]],
    db: Optional[BeaconDatabase],
    cfg: PipelineConfig,
) -> list[FusedStepRecord]:
    """Run stride detection, orientation, prediction and gated fusion.

    Deterministic: identical inputs and configuration produce identical
    records. Without match lists the output is exactly the dead-reckoned
    trajectory.
    """
    if not samples:
        raise ValidationError("empty IMU stream")
    if matches and db is None:
        raise ValidationError("match lists were supplied without a beacon database")

    events = stride.detect_steps(samples, cfg.stride)
    if not events:
        return []

    # Orientation pass: heading and detector state at each step peak.
    alpha_override = None if cfg.mdr_enabled else 1
    peak_indices = {ev.index for ev in events}
    psi_at: dict[int, float] = {}
    alpha_at: dict[int, int] = {}
    ostate = orientation.initial_orientation(samples, cfg.mdr)
    ostate = orientation.OrientationState(q=ostate.q, mag_window=(samples[0].mag,))
    if 0 in peak_indices:
        psi_at[0] = orientation.to_euler(ostate.q)[2]
        alpha_at[0] = 1 if not cfg.mdr_enabled else ostate.alpha_last
    for k in range(1, len(samples)):
        s = samples[k]
        ostate = orientation.update(
            ostate,
            s.gyro,
            s.accel,
            s.mag,
            s.t - samples[k - 1].t,
            cfg.mdr,
            alpha_override=alpha_override,
        )
        if k in peak_indices:
            psi_at[k] = orientation.to_euler(ostate.q)[2]
            alpha_at[k] = ostate.alpha_last

    gamma = resolve_gamma(cfg, db)
    bin_radius = cfg.bin_radius if cfg.bin_radius is not None else gamma
    mean_length = sum(ev.length for ev in events) / len(events)
    Q = cfg.fusion.q if cfg.fusion.q is not None else as_cov((0.15 * mean_length) ** 2)
    R = cfg.fusion.r if cfg.fusion.r is not None else as_cov(gamma * gamma / 4.0)
    obs_variance = float(np.trace(R)) / 2.0
    a = cfg.fusion.smooth_a

    by_step = _match_lookup(matches, events)

    state = FilterState(x=cfg.start, P=cfg.fusion.p0)
    drift = DriftModel(gamma=gamma)
    prev_output = state.x
    t_prev = samples[0].t
    records: list[FusedStepRecord] = []

    for i, ev in enumerate(events, start=1):
        psi = psi_at[ev.index]
        alpha = alpha_at[ev.index]
        x_before = state.x
        state = predict(state, ev.length, psi, Q)
        dt_step = ev.t_peak - t_prev
        drift = deadreck.accumulate_heading_variance(
            drift, alpha, dt_step, cfg.drift_noise, cfg.mdr.beta
        )
        drift = deadreck.accumulate_position_variance(drift, ev.length, cfg.drift_noise)
        threshold = deadreck.ges_threshold(drift, literal_sum=cfg.literal_sum)
        x_pdr = state.x

        applied = False
        accepted: Optional[str] = None
        support = 0
        output = state.x
        mlist = by_step.get(i)
        if mlist is not None and mlist.candidates:
            gate_t = threshold if cfg.ges_enabled else math.inf
            hit = ges_gate(mlist, state.x, gate_t, db, bin_radius, first_pass=cfg.first_pass)
            if hit is not None:
                state = kf_update(state, hit.z, R)
                if cfg.smooth_feedback:
                    state = FilterState(x=smooth(state.x, x_before, a), P=state.P)
                    output = state.x
                else:
                    output = smooth(state.x, prev_output, a)
                drift = deadreck.reset_after_update(drift, obs_variance)
                applied = True
                accepted = hit.beacon_id
                support = hit.support

        records.append(
            FusedStepRecord(
                step=i,
                t=ev.t_peak,
                x_pdr=x_pdr,
                x_fused=output,
                update_applied=applied,
                accepted_beacon=accepted,
                t_threshold=threshold,
                psi=psi,
                length=ev.length,
                alpha=alpha,
                support=support,
            )
        )
        prev_output = output
        t_prev = ev.t_peak

    return records


TRAJECTORY_HEADER = "step,t,x_pdr,y_pdr,x_fused,y_fused,updated,beacon,T"


def write_trajectory(records: Sequence[FusedStepRecord], path: str | Path) -> None:
    """Write the per-step trajectory CSV with fixed 6-decimal formatting."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(TRAJECTORY_HEADER + "\n")
        for r in records:
            fh.write(
                f"{r.step},{r.t:.6f},{r.x_pdr.x:.6f},{r.x_pdr.y:.6f},"
                f"{r.x_fused.x:.6f},{r.x_fused.y:.6f},{int(r.update_applied)},"
                f"{r.accepted_beacon or ''},{r.t_threshold:.6f}\n"
            )


def load_trajectory(path: str | Path) -> list[FusedStepRecord]:
    """Read the trajectory CSV back into records (evaluation use)."""
    path = Path(path)
    records: list[FusedStepRecord] = []
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TRAJECTORY_HEADER:
            raise ValidationError(f"{path}:1: unexpected trajectory header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            tokens = line.split(",")
            if len(tokens) != 9:
                raise ValidationError(f"{path}:{lineno}: expected 9 fields")
            records.append(
                FusedStepRecord(
                    step=int(tokens[0]),
                    t=float(tokens[1]),
                    x_pdr=Position2D(float(tokens[2]), float(tokens[3])),
                    x_fused=Position2D(float(tokens[4]), float(tokens[5])),
                    update_applied=tokens[6] == "1",
                    accepted_beacon=tokens[7] or None,
                    t_threshold=float(tokens[8]),
                    psi=0.0,
                    length=0.0,
                    alpha=1,
                )
            )
    return records
