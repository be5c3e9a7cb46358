"""Synthetic walk generator: IMU streams, ground truth, beacon match lists.

The generator is built for verifiability rather than realism. Each stride
produces a raised-cosine magnitude bump whose peak-to-trough span is the
fourth power of (step length / gain), so the step-length model recovers
the generated lengths exactly in the noiseless case. Heading follows the
waypoint polyline with smooth turn ramps between steps; the gyro signal is
the exact per-interval mean rate of that profile, and the magnetometer
sees a fixed world field (plus configurable disturbance-zone offsets)
rotated into the body frame. Step-length model error, sensor noise and a
gyro bias provide the realistic drift sources.

Match lists place each beacon event's best hit at the event's beacon (or,
for gross events, at an alias landmark displaced by the event offset) and
pad the remaining ranks with far-away decoys, reproducing the perceptual
aliasing failure mode the fusion gate exists to reject.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .beacons import MatchCandidate, MatchList
from .deadreck import NoiseConfig
from .sensors import Beacon, BeaconDatabase, ImuSample, Position2D, Vec3
from .stride import GRAVITY_MPS2

DEFAULT_FIELD = Vec3(43.3, 0.0, -25.0)

# Turn ramps occupy this fraction of the inter-step gap, leaving the peak
# neighbourhood heading-stable (detection lag must stay below the start
# fraction times the step period).
_RAMP_START = 0.3
_RAMP_END = 0.7


class ScenarioError(ValueError):
    """Scenario is internally inconsistent or geometrically infeasible."""


class MagZone(NamedTuple):
    """Circular region where a fixed field offset (uT) is added."""

    center: Position2D
    radius: float
    offset: Vec3


class BeaconEvent(NamedTuple):
    """A scheduled place-recognition opportunity at a given step.

    ``offset`` displaces the top-ranked hit's implied position; non-zero
    offsets are served by an alias landmark placed there. ``gross`` marks
    events meant to be rejected by the error gate.
    """

    step: int
    beacon_id: str
    offset: tuple[float, float] = (0.0, 0.0)
    gross: bool = False


@dataclass(frozen=True)
class Scenario:
    """Deterministic walk description (fixed seed => identical bytes)."""

    waypoints: tuple[Position2D, ...]
    step_length_true: float = 0.7
    cadence: float = 2.0
    sample_rate: float = 100.0
    noise: NoiseConfig = field(
        default_factory=lambda: NoiseConfig(sigma_a=0.3, sigma_gy=0.01, sigma_m=0.3, sigma_l_rel=0.15)
    )
    mag_zones: tuple[MagZone, ...] = ()
    beacon_events: tuple[BeaconEvent, ...] = ()
    rng_seed: int = 0
    weinberg_k: float = 0.5
    gyro_bias: Vec3 = Vec3(0.0, 0.0, 0.0)
    reference_field: Vec3 = DEFAULT_FIELD
    lead_in: float = 1.0
    lead_out: float = 1.0
    decoy_count: int = 0
    decoy_lateral: float = 40.0
    decoy_min_sep: float = 30.0

    def __post_init__(self) -> None:
        if len(self.waypoints) < 2:
            raise ScenarioError("need at least two waypoints")
        if self.step_length_true <= 0 or self.cadence <= 0 or self.sample_rate <= 0:
            raise ScenarioError("step length, cadence and sample rate must be > 0")
        if self.sample_rate < 8.0 * self.cadence:
            raise ScenarioError(
                f"sample_rate {self.sample_rate} cannot resolve step peaks at "
                f"cadence {self.cadence} (need >= {8.0 * self.cadence})"
            )
        if self.weinberg_k <= 0:
            raise ScenarioError("weinberg_k must be > 0")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if a.distance_to(b) < self.step_length_true:
                raise ScenarioError(
                    f"waypoint segment {a} -> {b} is shorter than one step"
                )


class TrueStep(NamedTuple):
    step: int
    t_peak: float
    position: Position2D
    heading: float
    in_disturbance: bool


@dataclass(frozen=True)
class GroundTruth:
    """Per-step truth aligned with the generated stream."""

    start: Position2D
    steps: tuple[TrueStep, ...]
    events: tuple[BeaconEvent, ...]
    path_length: float


@dataclass(frozen=True)
class GeneratedWalk:
    stream: list[ImuSample]
    truth: GroundTruth
    matches: dict[int, MatchList]
    beacons: BeaconDatabase


def _wrap_angle(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def _plan_steps(
    scenario: Scenario, length_error: Optional[np.ndarray] = None
) -> tuple[list[Position2D], list[float]]:
    """Chain true step positions and headings along the waypoint polyline.

    ``length_error`` holds the per-step relative deviation of the true
    stride from the nominal length: the walker actually covers
    L*(1+eps) while the step-length model will report L, which is
    exactly how the relative model error enters dead reckoning.
    """
    length = scenario.step_length_true
    positions = [scenario.waypoints[0]]
    headings: list[float] = []
    k = 0
    for a, b in zip(scenario.waypoints, scenario.waypoints[1:]):
        seg = a.distance_to(b)
        bearing = math.atan2(b.y - a.y, b.x - a.x)
        n_steps = max(1, round(seg / length))
        for _ in range(n_steps):
            true_len = length if length_error is None else length * (1.0 + length_error[k])
            p = positions[-1]
            positions.append(
                Position2D(
                    p.x + true_len * math.cos(bearing), p.y + true_len * math.sin(bearing)
                )
            )
            headings.append(bearing)
            k += 1
    return positions, headings


def count_steps(scenario: Scenario) -> int:
    """Number of strides the scenario produces (independent of noise)."""
    return len(_plan_steps(scenario)[1])


def generate(scenario: Scenario) -> GeneratedWalk:
    """Produce (IMU stream, ground truth, match lists, beacon database)."""
    rng = np.random.default_rng(scenario.rng_seed)
    L = scenario.step_length_true
    tau = 1.0 / scenario.cadence
    dt = 1.0 / scenario.sample_rate

    n_steps = count_steps(scenario)
    _validate_events(scenario, n_steps)

    # True strides deviate from the nominal length by the relative model
    # error; the bump span is the nominal fourth power, so the detector
    # reports the nominal length and the deviation becomes drift.
    eps = rng.normal(0.0, scenario.noise.sigma_l_rel, size=n_steps)
    positions, headings = _plan_steps(scenario, eps)

    duration = scenario.lead_in + n_steps * tau + scenario.lead_out
    n_samples = int(round(duration * scenario.sample_rate)) + 1
    t = np.arange(n_samples) * dt
    peak_times = scenario.lead_in + (np.arange(1, n_steps + 1) - 0.5) * tau

    span = (L / scenario.weinberg_k) ** 4
    magnitude = np.full(n_samples, GRAVITY_MPS2)
    for k in range(n_steps):
        t_k = peak_times[k]
        i0 = max(0, int(math.ceil((t_k - 0.5 * tau) / dt)))
        i1 = min(n_samples - 1, int(math.floor((t_k + 0.5 * tau) / dt)))
        seg_t = t[i0 : i1 + 1]
        magnitude[i0 : i1 + 1] = GRAVITY_MPS2 + span * (
            0.5 + 0.5 * np.cos(2.0 * math.pi * (seg_t - t_k) / tau)
        )

    # Unwrapped heading profile with smooth turn ramps between steps.
    unwrapped = [headings[0]]
    for h_prev, h_next in zip(headings, headings[1:]):
        unwrapped.append(unwrapped[-1] + _wrap_angle(h_next - h_prev))
    psi = np.full(n_samples, unwrapped[0])
    for k in range(n_steps - 1):
        dpsi = unwrapped[k + 1] - unwrapped[k]
        if dpsi == 0.0:
            continue
        t0 = peak_times[k] + _RAMP_START * tau
        t1 = peak_times[k] + _RAMP_END * tau
        i0 = int(math.ceil(t0 / dt))
        i1 = int(math.floor(t1 / dt))
        u = (t[i0 : i1 + 1] - t0) / (t1 - t0)
        psi[i0 : i1 + 1] = unwrapped[k] + dpsi * 0.5 * (1.0 - np.cos(math.pi * u))
        psi[i1 + 1 :] = unwrapped[k + 1]

    # Continuous true position (for disturbance-zone membership).
    knot_t = np.concatenate(
        ([0.0], scenario.lead_in + np.arange(n_steps + 1) * tau, [duration])
    )
    px_knots = np.array([positions[0].x] + [p.x for p in positions] + [positions[-1].x])
    py_knots = np.array([positions[0].y] + [p.y for p in positions] + [positions[-1].y])
    px = np.interp(t, knot_t, px_knots)
    py = np.interp(t, knot_t, py_knots)

    ref = scenario.reference_field
    mx = np.full(n_samples, ref.x)
    my = np.full(n_samples, ref.y)
    mz = np.full(n_samples, ref.z)
    for zone in scenario.mag_zones:
        mask = (px - zone.center.x) ** 2 + (py - zone.center.y) ** 2 <= zone.radius**2
        mx[mask] += zone.offset.x
        my[mask] += zone.offset.y
        mz[mask] += zone.offset.z

    cos_p, sin_p = np.cos(psi), np.sin(psi)
    mag_bx = cos_p * mx + sin_p * my
    mag_by = -sin_p * mx + cos_p * my
    mag_bz = mz

    gyro_z = np.zeros(n_samples)
    gyro_z[1:] = np.diff(psi) / dt

    noise = scenario.noise
    accel_n = rng.normal(0.0, noise.sigma_a, size=(n_samples, 3))
    gyro_n = rng.normal(0.0, noise.sigma_gy, size=(n_samples, 3))
    mag_n = rng.normal(0.0, noise.sigma_m, size=(n_samples, 3))

    bias = scenario.gyro_bias
    columns = np.column_stack(
        [
            t,
            accel_n[:, 0],
            accel_n[:, 1],
            magnitude + accel_n[:, 2],
            bias.x + gyro_n[:, 0],
            bias.y + gyro_n[:, 1],
            gyro_z + bias.z + gyro_n[:, 2],
            mag_bx + mag_n[:, 0],
            mag_by + mag_n[:, 1],
            mag_bz + mag_n[:, 2],
        ]
    ).tolist()  # plain floats: the per-sample filter math stays fast
    stream = [
        ImuSample(
            t=row[0],
            accel=Vec3(row[1], row[2], row[3]),
            gyro=Vec3(row[4], row[5], row[6]),
            mag=Vec3(row[7], row[8], row[9]),
        )
        for row in columns
    ]

    def in_zone(p: Position2D) -> bool:
        return any(
            (p.x - z.center.x) ** 2 + (p.y - z.center.y) ** 2 <= z.radius**2
            for z in scenario.mag_zones
        )

    steps = tuple(
        TrueStep(
            step=k + 1,
            t_peak=float(peak_times[k]),
            position=positions[k + 1],
            heading=_wrap_angle(headings[k]),
            in_disturbance=in_zone(positions[k + 1]),
        )
        for k in range(n_steps)
    )
    path_length = sum(a.distance_to(b) for a, b in zip(positions, positions[1:]))
    db = _build_beacons(scenario, positions, headings)
    matches = _build_matches(scenario, positions, db)
    truth = GroundTruth(
        start=positions[0], steps=steps, events=scenario.beacon_events, path_length=path_length
    )
    return GeneratedWalk(stream=stream, truth=truth, matches=matches, beacons=db)


def _validate_events(scenario: Scenario, n_steps: int) -> None:
    seen: set[str] = set()
    for ev in scenario.beacon_events:
        if not 1 <= ev.step <= n_steps:
            raise ScenarioError(f"beacon event step {ev.step} outside 1..{n_steps}")
        if ev.beacon_id in seen:
            raise ScenarioError(f"duplicate beacon event id {ev.beacon_id!r}")
        seen.add(ev.beacon_id)


def _path_point(
    waypoints: Sequence[Position2D], fraction: float
) -> tuple[Position2D, float]:
    """Point on the polyline at the given arc-length fraction, plus bearing."""
    seg_lens = [a.distance_to(b) for a, b in zip(waypoints, waypoints[1:])]
    total = sum(seg_lens)
    target = fraction * total
    run = 0.0
    for a, b, seg in zip(waypoints, waypoints[1:], seg_lens):
        if run + seg >= target or (a, b) == (waypoints[-2], waypoints[-1]):
            u = (target - run) / seg if seg > 0 else 0.0
            u = min(1.0, max(0.0, u))
            bearing = math.atan2(b.y - a.y, b.x - a.x)
            return Position2D(a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)), bearing
        run += seg
    raise AssertionError("unreachable")


def _build_beacons(
    scenario: Scenario, positions: Sequence[Position2D], headings: Sequence[float]
) -> BeaconDatabase:
    """Event beacons sit on the walker's step positions; gross events get an
    alias landmark at the offset position; decoys flank the route to the
    left at ``decoy_lateral`` metres."""
    beacons: list[Beacon] = []
    for ev in scenario.beacon_events:
        beacons.append(Beacon(id=ev.beacon_id, position=positions[ev.step], label="event"))
    for ev in scenario.beacon_events:
        if ev.offset != (0.0, 0.0):
            p = positions[ev.step]
            beacons.append(
                Beacon(
                    id=f"X{ev.beacon_id}",
                    position=Position2D(p.x + ev.offset[0], p.y + ev.offset[1]),
                    label="alias",
                )
            )
    # Decoy candidates march along the path; keep only those at least
    # decoy_min_sep from every beacon accepted so far (corner laterals
    # from adjacent segments would otherwise nearly coincide).
    placed = 0
    n_cand = max(1, 3 * scenario.decoy_count)
    for j in range(n_cand):
        if placed >= scenario.decoy_count:
            break
        frac = (j + 0.5) / n_cand
        point, bearing = _path_point(scenario.waypoints, frac)
        nx, ny = -math.sin(bearing), math.cos(bearing)
        pos = Position2D(
            point.x + scenario.decoy_lateral * nx,
            point.y + scenario.decoy_lateral * ny,
        )
        if all(b.position.distance_to(pos) >= scenario.decoy_min_sep for b in beacons):
            placed += 1
            beacons.append(Beacon(id=f"D{placed:02d}", position=pos, label="decoy"))
    return BeaconDatabase(beacons)


def _build_matches(
    scenario: Scenario, positions: Sequence[Position2D], db: BeaconDatabase
) -> dict[int, MatchList]:
    """Rank-1 is the event beacon (or its alias); ranks 2..25 are the
    beacons farthest from the event, so they never survive a sane gate."""
    matches: dict[int, MatchList] = {}
    for ev in scenario.beacon_events:
        p_true = positions[ev.step]
        top_id = f"X{ev.beacon_id}" if ev.offset != (0.0, 0.0) else ev.beacon_id
        cands = [MatchCandidate(top_id, 0.98)]
        others = sorted(
            (b for b in db.beacons() if b.id != top_id),
            key=lambda b: -b.position.distance_to(p_true),
        )
        for rank, b in enumerate(others[:24]):
            cands.append(MatchCandidate(b.id, 0.9 - 0.02 * rank))
        matches[ev.step] = MatchList.from_candidates(ev.step, cands)
    return matches


def with_gross_events(scenario: Scenario, magnitude: float = 50.0) -> Scenario:
    """Variant where every beacon event is a gross mismatch displaced
    ``magnitude`` metres to the right of the walking direction."""
    positions, headings = _plan_steps(scenario)
    events = []
    for ev in scenario.beacon_events:
        bearing = headings[ev.step - 1]
        off = (magnitude * math.sin(bearing), -magnitude * math.cos(bearing))
        events.append(replace_event(ev, offset=off, gross=True))
    return replace(scenario, beacon_events=tuple(events))


def replace_event(ev: BeaconEvent, **kw) -> BeaconEvent:
    return BeaconEvent(
        step=kw.get("step", ev.step),
        beacon_id=kw.get("beacon_id", ev.beacon_id),
        offset=kw.get("offset", ev.offset),
        gross=kw.get("gross", ev.gross),
    )


def closed_loop_scenario(profile: str) -> Scenario:
    """Canonical rectangular closed-loop walks (~1.4 km, 2000 steps).

    ``sparse``: 11 beacon events of which 4 are gross mismatches.
    ``dense``: 12 beacon events of which 1 is a gross mismatch.
    Both carry two magnetic disturbance zones and a small gyro bias, so
    dead reckoning drifts realistically between beacon fixes.
    """
    loop = (
        Position2D(0.0, 0.0),
        Position2D(420.0, 0.0),
        Position2D(420.0, 280.0),
        Position2D(0.0, 280.0),
        Position2D(0.0, 0.0),
    )
    common = dict(
        waypoints=loop,
        step_length_true=0.7,
        cadence=2.0,
        sample_rate=100.0,
        noise=NoiseConfig(sigma_a=0.2, sigma_gy=0.01, sigma_m=0.3, sigma_l_rel=0.15),
        gyro_bias=Vec3(0.0, 0.0, 0.002),
        decoy_lateral=40.0,
    )
    zones = (
        MagZone(center=Position2D(420.0, 100.0), radius=35.0, offset=Vec3(0.0, 100.0, 0.0)),
        MagZone(center=Position2D(220.0, 280.0), radius=35.0, offset=Vec3(60.0, -60.0, 30.0)),
    )
    n_total = 2000  # loop perimeter 1400 m at 0.7 m per step

    def event_steps(count: int) -> list[int]:
        return [round((i - 0.5) / count * n_total) for i in range(1, count + 1)]

    positions, headings = _plan_steps(Scenario(waypoints=loop))

    def make_events(count: int, gross_indices: set[int]) -> tuple[BeaconEvent, ...]:
        events = []
        for i, step in enumerate(event_steps(count), start=1):
            if i in gross_indices:
                bearing = headings[step - 1]
                off = (50.0 * math.sin(bearing), -50.0 * math.cos(bearing))
                events.append(BeaconEvent(step, f"B{i:02d}", offset=off, gross=True))
            else:
                events.append(BeaconEvent(step, f"B{i:02d}"))
        return tuple(events)

    if profile == "sparse":
        return Scenario(
            beacon_events=make_events(11, {2, 5, 8, 10}),
            mag_zones=zones,
            rng_seed=101,
            decoy_count=18,
            **common,
        )
    if profile == "dense":
        return Scenario(
            beacon_events=make_events(12, {7}),
            mag_zones=zones,
            rng_seed=202,
            decoy_count=20,
            **common,
        )
    raise ScenarioError(f"unknown profile {profile!r} (expected 'sparse' or 'dense')")


# --- ground truth and scenario serialization -------------------------------

TRUTH_HEADER = "step,t,x,y,psi,disturbed"


def write_truth(truth: GroundTruth, path) -> None:
    from pathlib import Path

    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(TRUTH_HEADER + "\n")
        for s in truth.steps:
            fh.write(
                f"{s.step},{s.t_peak:.6f},{s.position.x:.6f},{s.position.y:.6f},"
                f"{s.heading:.6f},{int(s.in_disturbance)}\n"
            )


def load_truth(path) -> list[TrueStep]:
    from pathlib import Path

    from .sensors import ValidationError

    path = Path(path)
    steps: list[TrueStep] = []
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TRUTH_HEADER:
            raise ValidationError(f"{path}:1: unexpected truth header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            tok = line.split(",")
            steps.append(
                TrueStep(
                    step=int(tok[0]),
                    t_peak=float(tok[1]),
                    position=Position2D(float(tok[2]), float(tok[3])),
                    heading=float(tok[4]),
                    in_disturbance=tok[5] == "1",
                )
            )
    return steps


def scenario_to_toml(scenario: Scenario) -> str:
    """Serialize a scenario to TOML (inverse of :func:`scenario_from_toml`)."""

    def fmt(v: float) -> str:
        return repr(float(v))

    lines = ["[scenario]"]
    wp = ", ".join(f"[{fmt(p.x)}, {fmt(p.y)}]" for p in scenario.waypoints)
    lines.append(f"waypoints = [{wp}]")
    lines.append(f"step_length_true = {fmt(scenario.step_length_true)}")
    lines.append(f"cadence = {fmt(scenario.cadence)}")
    lines.append(f"sample_rate = {fmt(scenario.sample_rate)}")
    lines.append(f"rng_seed = {scenario.rng_seed}")
    lines.append(f"weinberg_k = {fmt(scenario.weinberg_k)}")
    lines.append(f"lead_in = {fmt(scenario.lead_in)}")
    lines.append(f"lead_out = {fmt(scenario.lead_out)}")
    lines.append(f"decoy_count = {scenario.decoy_count}")
    lines.append(f"decoy_lateral = {fmt(scenario.decoy_lateral)}")
    g = scenario.gyro_bias
    lines.append(f"gyro_bias = [{fmt(g.x)}, {fmt(g.y)}, {fmt(g.z)}]")
    f = scenario.reference_field
    lines.append(f"reference_field = [{fmt(f.x)}, {fmt(f.y)}, {fmt(f.z)}]")
    n = scenario.noise
    lines.append("")
    lines.append("[scenario.noise]")
    lines.append(f"sigma_a = {fmt(n.sigma_a)}")
    lines.append(f"sigma_gy = {fmt(n.sigma_gy)}")
    lines.append(f"sigma_m = {fmt(n.sigma_m)}")
    lines.append(f"sigma_l_rel = {fmt(n.sigma_l_rel)}")
    for z in scenario.mag_zones:
        lines.append("")
        lines.append("[[scenario.mag_zones]]")
        lines.append(f"center = [{fmt(z.center.x)}, {fmt(z.center.y)}]")
        lines.append(f"radius = {fmt(z.radius)}")
        lines.append(f"offset = [{fmt(z.offset.x)}, {fmt(z.offset.y)}, {fmt(z.offset.z)}]")
    for ev in scenario.beacon_events:
        lines.append("")
        lines.append("[[scenario.beacon_events]]")
        lines.append(f"step = {ev.step}")
        lines.append(f'beacon = "{ev.beacon_id}"')
        lines.append(f"offset = [{fmt(ev.offset[0])}, {fmt(ev.offset[1])}]")
        lines.append(f"gross = {'true' if ev.gross else 'false'}")
    return "\n".join(lines) + "\n"


def scenario_from_toml(text: str) -> Scenario:
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib

    data = tomllib.loads(text)
    if "scenario" not in data:
        raise ScenarioError("scenario file must contain a [scenario] table")
    s = data["scenario"]
    known = {
        "waypoints", "step_length_true", "cadence", "sample_rate", "rng_seed",
        "weinberg_k", "lead_in", "lead_out", "decoy_count", "decoy_lateral",
        "gyro_bias", "reference_field", "noise", "mag_zones", "beacon_events",
    }
    def check(table, allowed, where):
        unknown = set(table) - allowed
        if unknown:
            raise ScenarioError(f"unknown scenario keys in {where}: {sorted(unknown)}")

    check(s, known, "[scenario]")
    noise_kw = s.get("noise", {})
    check(noise_kw, {"sigma_a", "sigma_gy", "sigma_m", "sigma_l_rel"}, "[scenario.noise]")
    for z in s.get("mag_zones", []):
        check(z, {"center", "radius", "offset"}, "[[scenario.mag_zones]]")
    for e in s.get("beacon_events", []):
        check(e, {"step", "beacon", "offset", "gross"}, "[[scenario.beacon_events]]")
    zones = tuple(
        MagZone(
            center=Position2D(*z["center"]),
            radius=float(z["radius"]),
            offset=Vec3(*z["offset"]),
        )
        for z in s.get("mag_zones", [])
    )
    events = tuple(
        BeaconEvent(
            step=int(e["step"]),
            beacon_id=str(e["beacon"]),
            offset=tuple(e.get("offset", (0.0, 0.0))),
            gross=bool(e.get("gross", False)),
        )
        for e in s.get("beacon_events", [])
    )
    return Scenario(
        waypoints=tuple(Position2D(*p) for p in s["waypoints"]),
        step_length_true=float(s.get("step_length_true", 0.7)),
        cadence=float(s.get("cadence", 2.0)),
        sample_rate=float(s.get("sample_rate", 100.0)),
        noise=NoiseConfig(**noise_kw),
        mag_zones=zones,
        beacon_events=events,
        rng_seed=int(s.get("rng_seed", 0)),
        weinberg_k=float(s.get("weinberg_k", 0.5)),
        gyro_bias=Vec3(*s.get("gyro_bias", (0.0, 0.0, 0.0))),
        reference_field=Vec3(*s.get("reference_field", DEFAULT_FIELD)),
        lead_in=float(s.get("lead_in", 1.0)),
        lead_out=float(s.get("lead_out", 1.0)),
        decoy_count=int(s.get("decoy_count", 0)),
        decoy_lateral=float(s.get("decoy_lateral", 40.0)),
    )
