"""Sensor value types and validated file ingestion.

All positions are metres in a local planar East-North frame anchored at a
declared origin; geographic beacon files are converted at ingestion (see
:func:`geo_to_local`) so the downstream filter math stays planar-Euclidean.

IMU unit conventions are fixed by the CSV schema: accelerometer in m/s^2,
gyroscope in rad/s, magnetometer in microtesla, timestamps in decimal
seconds of monotonic stream time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence

EARTH_RADIUS_M = 6_371_000.0

IMU_HEADER = ("t", "ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz")


class ValidationError(ValueError):
    """Input violates a documented invariant (bad schema, bad values)."""


class ParseError(ValidationError):
    """Input file could not be parsed; message carries the line number."""


class Vec3(NamedTuple):
    x: float
    y: float
    z: float

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def scaled(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    def plus(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)


class Position2D(NamedTuple):
    """Planar position, metres East (x) / North (y) of the local origin."""

    x: float
    y: float

    def distance_to(self, other: "Position2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class ImuSample(NamedTuple):
    """One timestamped 9-axis reading (accel m/s^2, gyro rad/s, mag uT)."""

    t: float
    accel: Vec3
    gyro: Vec3
    mag: Vec3


class Quaternion(NamedTuple):
    """Unit quaternion (scalar-first) mapping body-frame to world-frame vectors.

    Public constructors and operations keep the norm within 1e-9 of unity;
    callers integrating raw rates must renormalize via :meth:`normalized`.
    """

    w: float
    x: float
    y: float
    z: float

    @staticmethod
    def identity() -> "Quaternion":
        return Quaternion(1.0, 0.0, 0.0, 0.0)

    def norm(self) -> float:
        return math.sqrt(
            self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
        )

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def multiply(self, o: "Quaternion") -> "Quaternion":
        w1, x1, y1, z1 = self
        w2, x2, y2, z2 = o
        return Quaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def rotate(self, v: Vec3) -> Vec3:
        """Rotate a body-frame vector into the world frame."""
        p = self.multiply(Quaternion(0.0, v.x, v.y, v.z)).multiply(self.conjugate())
        return Vec3(p.x, p.y, p.z)

    def rotate_inverse(self, v: Vec3) -> Vec3:
        """Rotate a world-frame vector into the body frame."""
        p = self.conjugate().multiply(Quaternion(0.0, v.x, v.y, v.z)).multiply(self)
        return Vec3(p.x, p.y, p.z)


@dataclass(frozen=True)
class Beacon:
    """A geo-referenced landmark the matcher can return."""

    id: str
    position: Position2D
    label: Optional[str] = None


class BeaconDatabase:
    """Beacon lookup table plus the nearest-neighbor spacing statistic.

    ``min_spacing`` is the smallest pairwise distance between distinct
    beacons; it feeds the adjacency margin default and is ``None`` for a
    database of fewer than two beacons (the margin must then come from
    configuration).
    """

    def __init__(self, beacons: Iterable[Beacon]):
        self._by_id: dict[str, Beacon] = {}
        for b in beacons:
            if b.id in self._by_id:
                raise ValidationError(f"duplicate beacon id {b.id!r}")
            if not (math.isfinite(b.position.x) and math.isfinite(b.position.y)):
                raise ValidationError(f"beacon {b.id!r} has non-finite position")
            self._by_id[b.id] = b
        self.min_spacing = self._min_spacing()

    def _min_spacing(self) -> Optional[float]:
        items = list(self._by_id.values())
        if len(items) < 2:
            return None
        best = math.inf
        for i, a in enumerate(items):
            for b in items[i + 1 :]:
                d = a.position.distance_to(b.position)
                if d < best:
                    best = d
        return best

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, beacon_id: str) -> bool:
        return beacon_id in self._by_id

    def __getitem__(self, beacon_id: str) -> Beacon:
        return self._by_id[beacon_id]

    def ids(self) -> list[str]:
        return list(self._by_id)

    def beacons(self) -> list[Beacon]:
        return list(self._by_id.values())


def geo_to_local(lat: float, lon: float, origin_lat: float, origin_lon: float) -> Position2D:
    """Equirectangular projection about the origin latitude (metres E/N)."""
    x = EARTH_RADIUS_M * math.radians(lon - origin_lon) * math.cos(math.radians(origin_lat))
    y = EARTH_RADIUS_M * math.radians(lat - origin_lat)
    return Position2D(x, y)


def _parse_float(token: str, path: Path, lineno: int, col: str) -> float:
    try:
        v = float(token)
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: column {col!r}: not a number: {token!r}") from exc
    if not math.isfinite(v):
        raise ValidationError(f"{path}:{lineno}: column {col!r}: non-finite value {token!r}")
    return v


def load_imu_stream(path: str | Path) -> list[ImuSample]:
    """Load an IMU CSV (header ``t,ax,ay,az,gx,gy,gz,mx,my,mz``).

    Returns samples in file order after validating finiteness and strict
    time monotonicity. Malformed rows raise :class:`ParseError` with the
    offending line number; a non-increasing timestamp raises
    :class:`ValidationError`.
    """
    path = Path(path)
    samples: list[ImuSample] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        header = fh.readline().strip()
        if tuple(header.split(",")) != IMU_HEADER:
            raise ParseError(
                f"{path}:1: expected header {','.join(IMU_HEADER)!r}, got {header!r}"
            )
        prev_t: Optional[float] = None
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            tokens = line.split(",")
            if len(tokens) != 10:
                raise ParseError(f"{path}:{lineno}: expected 10 fields, got {len(tokens)}")
            vals = [_parse_float(tok, path, lineno, col) for tok, col in zip(tokens, IMU_HEADER)]
            t = vals[0]
            if prev_t is not None and t <= prev_t:
                raise ValidationError(
                    f"{path}:{lineno}: timestamps must be strictly increasing "
                    f"({t!r} after {prev_t!r})"
                )
            prev_t = t
            samples.append(
                ImuSample(
                    t=t,
                    accel=Vec3(vals[1], vals[2], vals[3]),
                    gyro=Vec3(vals[4], vals[5], vals[6]),
                    mag=Vec3(vals[7], vals[8], vals[9]),
                )
            )
    return samples


def write_imu_stream(samples: Sequence[ImuSample], path: str | Path) -> None:
    """Write the IMU CSV schema with shortest round-trip float formatting.

    ``load_imu_stream(write_imu_stream(s)) == s`` bit-for-bit.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(IMU_HEADER) + "\n")
        for s in samples:
            vals = (s.t, *s.accel, *s.gyro, *s.mag)
            fh.write(",".join(repr(float(v)) for v in vals) + "\n")


def load_beacons(
    path: str | Path, origin: Optional[tuple[float, float]] = None
) -> BeaconDatabase:
    """Load a beacon CSV into a :class:`BeaconDatabase`.

    Two headers are accepted: ``id,x,y[,label]`` (already local metres) and
    ``id,lat,lon[,label]`` (geographic; requires ``origin=(lat, lon)`` for
    the equirectangular conversion).
    """
    path = Path(path)
    beacons: list[Beacon] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        header = [h.strip() for h in fh.readline().strip().split(",")]
        if header[:3] == ["id", "x", "y"]:
            geographic = False
        elif header[:3] == ["id", "lat", "lon"]:
            geographic = True
            if origin is None:
                raise ValidationError(
                    f"{path}: geographic beacon file requires an origin (lat, lon)"
                )
        else:
            raise ParseError(
                f"{path}:1: expected header 'id,x,y[,label]' or 'id,lat,lon[,label]', "
                f"got {','.join(header)!r}"
            )
        has_label = len(header) == 4 and header[3] == "label"
        if len(header) > 3 and not has_label:
            raise ParseError(f"{path}:1: unexpected extra columns {header[3:]!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            tokens = line.split(",")
            if len(tokens) not in (3, 4):
                raise ParseError(f"{path}:{lineno}: expected 3 or 4 fields, got {len(tokens)}")
            bid = tokens[0].strip()
            if not bid:
                raise ParseError(f"{path}:{lineno}: empty beacon id")
            a = _parse_float(tokens[1], path, lineno, header[1])
            b = _parse_float(tokens[2], path, lineno, header[2])
            label = tokens[3].strip() if len(tokens) == 4 else None
            if geographic:
                assert origin is not None
                pos = geo_to_local(a, b, origin[0], origin[1])
            else:
                pos = Position2D(a, b)
            beacons.append(Beacon(id=bid, position=pos, label=label))
    return BeaconDatabase(beacons)


def write_beacons(db_or_beacons, path: str | Path) -> None:
    """Write beacons as the local-frame ``id,x,y,label`` CSV."""
    beacons = db_or_beacons.beacons() if isinstance(db_or_beacons, BeaconDatabase) else list(db_or_beacons)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("id,x,y,label\n")
        for b in beacons:
            fh.write(
                f"{b.id},{repr(float(b.position.x))},{repr(float(b.position.y))},{b.label or ''}\n"
            )
