"""Gradient-descent quaternion attitude with magnetic disturbance rejection.

The estimator integrates gyro rates and, while the magnetic field looks
clean, nudges the quaternion down the gradient of a combined gravity /
magnetic-field alignment objective (the classic gradient-descent IMU+mag
formulation). A windowed field-magnitude and inclination test gates the
corrective term: in a disturbed field the attitude coasts on the gyro
alone, so magnetic anomalies cannot bend the heading.

Conventions: quaternions map body-frame vectors to world-frame vectors;
Euler angles are Z-Y-X (yaw, pitch, roll); the world x-axis is aligned
with the horizontal component of the undisturbed magnetic field, so yaw
is the walking bearing in the local planar frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .sensors import ImuSample, Quaternion, Vec3

_DOWN = Vec3(0.0, 0.0, -1.0)


@dataclass(frozen=True)
class MdrConfig:
    """Filter gain and disturbance-detector parameters.

    beta        corrective gain, 1/s (0 disables correction entirely)
    t_m         field-magnitude gate, uT
    t_i         inclination gate, radians (angle between mean field and g_e)
    window_nm   detector window length, samples
    g_e         unit gravity direction in body coordinates when level
    deviation_mode  gate on |value - reference| instead of absolute value
    m_ref, i_ref    calibrated references for deviation mode
    """

    beta: float = 0.1
    t_m: float = 70.0
    t_i: float = 1.4
    window_nm: int = 25
    g_e: Vec3 = _DOWN
    deviation_mode: bool = False
    m_ref: Optional[float] = None
    i_ref: Optional[float] = None

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.window_nm < 1:
            raise ValueError(f"window_nm must be >= 1, got {self.window_nm}")
        if abs(self.g_e.norm() - 1.0) > 1e-9:
            raise ValueError("g_e must be a unit vector")
        if self.deviation_mode and (self.m_ref is None or self.i_ref is None):
            raise ValueError("deviation_mode requires m_ref and i_ref")


@dataclass(frozen=True)
class OrientationState:
    """Attitude estimate plus detector memory (a value, never shared)."""

    q: Quaternion
    mag_window: tuple[Vec3, ...] = ()
    alpha_last: int = 1


def mean_field(mag_window: Sequence[Vec3]) -> Vec3:
    n = len(mag_window)
    if n == 0:
        raise ValueError("mag window is empty")
    sx = sy = sz = 0.0
    for m in mag_window:
        sx += m.x
        sy += m.y
        sz += m.z
    return Vec3(sx / n, sy / n, sz / n)


def inclination(mean_mag: Vec3, g_e: Vec3) -> float:
    """Angle between the mean field and the gravity direction, radians."""
    n = mean_mag.norm()
    if n == 0.0:
        raise ValueError("mean field has zero magnitude")
    c = mean_mag.dot(g_e) / n
    return math.acos(min(1.0, max(-1.0, c)))


def disturbance_detector(mag_window: Sequence[Vec3], cfg: MdrConfig) -> int:
    """1 for a clean field, 0 for a disturbed one.

    Clean means the windowed mean magnitude and the inclination both sit
    strictly inside their gates. A zero-magnitude mean is disturbed (the
    inclination is undefined there).
    """
    m_bar = mean_field(mag_window)
    mnorm = m_bar.norm()
    if mnorm == 0.0:
        return 0
    incl = inclination(m_bar, cfg.g_e)
    if cfg.deviation_mode:
        mag_ok = abs(mnorm - cfg.m_ref) < cfg.t_m
        inc_ok = abs(incl - cfg.i_ref) < cfg.t_i
    else:
        mag_ok = mnorm < cfg.t_m
        inc_ok = incl < cfg.t_i
    return 1 if (mag_ok and inc_ok) else 0


def _objective(
    q: Quaternion, a: Vec3, m: Vec3, bx: float, bz: float
) -> tuple[float, float, float, float, float, float]:
    """Alignment residual of gravity and field references against unit
    measurements (a, m), with the field reference (bx, 0, bz) held fixed."""
    w, x, y, z = q
    return (
        2.0 * (x * z - w * y) - a.x,
        2.0 * (w * x + y * z) - a.y,
        2.0 * (0.5 - x * x - y * y) - a.z,
        2.0 * bx * (0.5 - y * y - z * z) + 2.0 * bz * (x * z - w * y) - m.x,
        2.0 * bx * (x * y - w * z) + 2.0 * bz * (w * x + y * z) - m.y,
        2.0 * bx * (w * y + x * z) + 2.0 * bz * (0.5 - x * x - y * y) - m.z,
    )


def _gradient(
    q: Quaternion, a: Vec3, m: Vec3, bx: float, bz: float
) -> tuple[float, float, float, float]:
    """Unnormalized gradient (J^T f) of 0.5*||objective||^2 at q."""
    w, x, y, z = q
    f1, f2, f3, f4, f5, f6 = _objective(q, a, m, bx, bz)
    gw = (
        -2.0 * y * f1
        + 2.0 * x * f2
        - 2.0 * bz * y * f4
        + (-2.0 * bx * z + 2.0 * bz * x) * f5
        + 2.0 * bx * y * f6
    )
    gx = (
        2.0 * z * f1
        + 2.0 * w * f2
        - 4.0 * x * f3
        + 2.0 * bz * z * f4
        + (2.0 * bx * y + 2.0 * bz * w) * f5
        + (2.0 * bx * z - 4.0 * bz * x) * f6
    )
    gy = (
        -2.0 * w * f1
        + 2.0 * z * f2
        - 4.0 * y * f3
        + (-4.0 * bx * y - 2.0 * bz * w) * f4
        + (2.0 * bx * x + 2.0 * bz * z) * f5
        + (2.0 * bx * w - 4.0 * bz * y) * f6
    )
    gz = (
        2.0 * x * f1
        + 2.0 * y * f2
        + (-4.0 * bx * z + 2.0 * bz * x) * f4
        + (-2.0 * bx * w + 2.0 * bz * y) * f5
        + 2.0 * bx * x * f6
    )
    return (gw, gx, gy, gz)


def field_reference(q: Quaternion, m_unit: Vec3) -> tuple[float, float]:
    """World-frame field reference (bx, bz) inferred from the current
    attitude: the horizontal component is folded onto the world x-axis."""
    h = q.rotate(m_unit)
    return (math.hypot(h.x, h.y), h.z)


def gradient_step(q: Quaternion, accel: Vec3, mag: Vec3) -> tuple[float, float, float, float]:
    """Unit-normalized corrective direction for one update.

    Inputs are normalized first, so scaling accel or mag leaves the result
    unchanged. Returns the zero vector when the objective is already at
    its minimum.
    """
    an = accel.norm()
    mn = mag.norm()
    if an == 0.0 or mn == 0.0:
        raise ValueError("gradient_step requires non-zero accel and mag")
    a = Vec3(accel.x / an, accel.y / an, accel.z / an)
    m = Vec3(mag.x / mn, mag.y / mn, mag.z / mn)
    bx, bz = field_reference(q, m)
    gw, gx, gy, gz = _gradient(q, a, m, bx, bz)
    gn = math.sqrt(gw * gw + gx * gx + gy * gy + gz * gz)
    if gn < 1e-12:
        return (0.0, 0.0, 0.0, 0.0)
    return (gw / gn, gx / gn, gy / gn, gz / gn)


def update(
    state: OrientationState,
    gyro: Vec3,
    accel: Vec3,
    mag: Vec3,
    dt: float,
    cfg: MdrConfig,
    alpha_override: Optional[int] = None,
) -> OrientationState:
    """Advance the attitude by one sample interval.

    The magnetometer sample always enters the detector window; the
    corrective term is applied only when the detector (or the override)
    says the field is clean. With the correction off the result is exactly
    the gyro integration, bit for bit.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if len(state.mag_window) >= cfg.window_nm:
        window = state.mag_window[len(state.mag_window) - cfg.window_nm + 1 :] + (mag,)
    else:
        window = state.mag_window + (mag,)

    if alpha_override is not None:
        alpha = alpha_override
    else:
        alpha = disturbance_detector(window, cfg)

    w, x, y, z = state.q
    gx_, gy_, gz_ = gyro
    dqw = 0.5 * (-x * gx_ - y * gy_ - z * gz_)
    dqx = 0.5 * (w * gx_ + y * gz_ - z * gy_)
    dqy = 0.5 * (w * gy_ - x * gz_ + z * gx_)
    dqz = 0.5 * (w * gz_ + x * gy_ - y * gx_)

    if alpha == 1 and cfg.beta > 0.0 and accel.norm() > 0.0 and mag.norm() > 0.0:
        sw, sx, sy, sz = gradient_step(state.q, accel, mag)
        dqw -= cfg.beta * sw
        dqx -= cfg.beta * sx
        dqy -= cfg.beta * sy
        dqz -= cfg.beta * sz

    q = Quaternion(w + dqw * dt, x + dqx * dt, y + dqy * dt, z + dqz * dt).normalized()
    return OrientationState(q=q, mag_window=window, alpha_last=alpha)


def to_euler(q: Quaternion) -> tuple[float, float, float]:
    """Quaternion to (roll, pitch, yaw), Z-Y-X convention, yaw in (-pi, pi].

    At gimbal lock (|pitch| = pi/2) roll is fixed to zero and yaw absorbs
    the remaining rotation.
    """
    w, x, y, z = q
    sinp = 2.0 * (w * y - x * z)
    if sinp >= 1.0 - 1e-12:
        pitch = 0.5 * math.pi
        roll = 0.0
        yaw = math.atan2(-2.0 * (x * y - w * z), 1.0 - 2.0 * (x * x + z * z))
    elif sinp <= -1.0 + 1e-12:
        pitch = -0.5 * math.pi
        roll = 0.0
        yaw = math.atan2(-2.0 * (x * y - w * z), 1.0 - 2.0 * (x * x + z * z))
    else:
        pitch = math.asin(sinp)
        roll = math.atan2(2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y))
        yaw = math.atan2(2.0 * (x * y + w * z), 1.0 - 2.0 * (y * y + z * z))
    if yaw <= -math.pi:
        yaw = math.pi
    return (roll, pitch, yaw)


def from_euler(roll: float, pitch: float, yaw: float) -> Quaternion:
    """Z-Y-X Euler angles to a unit quaternion."""
    cr, sr = math.cos(roll * 0.5), math.sin(roll * 0.5)
    cp, sp = math.cos(pitch * 0.5), math.sin(pitch * 0.5)
    cy, sy = math.cos(yaw * 0.5), math.sin(yaw * 0.5)
    return Quaternion(
        cy * cp * cr + sy * sp * sr,
        cy * cp * sr - sy * sp * cr,
        cy * sp * cr + sy * cp * sr,
        sy * cp * cr - cy * sp * sr,
    ).normalized()


def initial_orientation(samples: Sequence[ImuSample], cfg: MdrConfig) -> OrientationState:
    """Attitude from the first detector window: accelerometer levelling
    plus tilt-compensated magnetometer yaw."""
    if not samples:
        raise ValueError("need at least one sample to initialize")
    head = samples[: cfg.window_nm]
    n = len(head)
    ax = sum(s.accel.x for s in head) / n
    ay = sum(s.accel.y for s in head) / n
    az = sum(s.accel.z for s in head) / n
    mags = tuple(s.mag for s in head)
    m_bar = mean_field(mags)

    pitch = math.atan2(-ax, math.hypot(ay, az))
    roll = math.atan2(ay, az)

    # De-tilt the mean field into the yaw frame: Ry(pitch) @ Rx(roll) @ m.
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    m1y = cr * m_bar.y - sr * m_bar.z
    m1z = sr * m_bar.y + cr * m_bar.z
    m1x = cp * m_bar.x + sp * m1z
    yaw = math.atan2(-m1y, m1x) if (m1x != 0.0 or m1y != 0.0) else 0.0

    q = from_euler(roll, pitch, yaw)
    alpha = disturbance_detector(mags, cfg)
    return OrientationState(q=q, mag_window=mags, alpha_last=alpha)
