"""Step-wise position propagation and the drift-variance model.

The drift model tracks how much the dead-reckoned position can plausibly
have wandered since the last absolute fix: a heading-variance recursion
fed by gyro noise (plus the corrective-term noise while field corrections
are active) and a position-magnitude variance recursion fed by the
step-length error and the heading variance. Its square root plus the
beacon-adjacency margin is the gate that separates believable beacon
fixes from gross mismatches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .sensors import Position2D


@dataclass(frozen=True)
class NoiseConfig:
    """Error-model inputs for the drift recursions.

    sigma_gy is the gyro noise std in rad/s. sigma_a and sigma_m are the
    accelerometer and magnetometer noise stds expressed as unit-normalized
    residuals (the corrective term operates on unit-normalized vectors, so
    dimensionless values of roughly physical-noise / field-magnitude are
    the consistent choice). sigma_l_rel is the relative step-length error.
    """

    sigma_a: float = 0.03
    sigma_gy: float = 0.02
    sigma_m: float = 0.03
    sigma_l_rel: float = 0.15

    def __post_init__(self) -> None:
        for name in ("sigma_a", "sigma_gy", "sigma_m", "sigma_l_rel"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class DriftModel:
    """Accumulated heading / position variance and the adjacency margin.

    sigma2_psi  heading variance, rad^2 (never reset by position fixes:
                position observations do not observe heading)
    sigma2_p    position-magnitude variance since the last accepted fix, m^2
    gamma       beacon-adjacency margin, metres
    sigma2_p_history_sum  running sum of the per-step cumulative variances,
                kept for the literal summed-threshold variant
    """

    gamma: float
    sigma2_psi: float = 0.0
    sigma2_p: float = 0.0
    steps_since_reset: int = 0
    sigma2_p_history_sum: float = 0.0

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.sigma2_psi < 0 or self.sigma2_p < 0:
            raise ValueError("variances must be >= 0")


def propagate(p: Position2D, length: float, psi: float) -> Position2D:
    """Advance one step of the given length along heading psi."""
    if length < 0:
        raise ValueError(f"step length must be >= 0, got {length}")
    return Position2D(p.x + length * math.cos(psi), p.y + length * math.sin(psi))


def accumulate_heading_variance(
    model: DriftModel, alpha: int, dt_step: float, cfg: NoiseConfig, beta: float
) -> DriftModel:
    """Grow the heading variance by one step interval.

    Adds the integrated gyro-noise term for the interval and, when the
    field correction was active (alpha = 1), the corrective-term noise
    contribution beta^2 (sigma_a^2 + sigma_m^2).
    """
    if dt_step <= 0:
        raise ValueError(f"dt_step must be > 0, got {dt_step}")
    inc = 0.25 * cfg.sigma_gy**2 * dt_step**2
    if alpha:
        inc += beta**2 * (cfg.sigma_a**2 + cfg.sigma_m**2)
    return replace(model, sigma2_psi=model.sigma2_psi + inc)


def accumulate_position_variance(model: DriftModel, length: float, cfg: NoiseConfig) -> DriftModel:
    """Grow the position-magnitude variance by one step.

    Per-step contribution is the step-length error variance plus the
    heading-induced cross-track term sigma2_psi * L^2; the recursion is
    cumulative until :func:`reset_after_update`.
    """
    if length < 0:
        raise ValueError(f"step length must be >= 0, got {length}")
    sigma2_p = model.sigma2_p + (cfg.sigma_l_rel * length) ** 2 + model.sigma2_psi * length**2
    return replace(
        model,
        sigma2_p=sigma2_p,
        steps_since_reset=model.steps_since_reset + 1,
        sigma2_p_history_sum=model.sigma2_p_history_sum + sigma2_p,
    )


def ges_threshold(model: DriftModel, literal_sum: bool = False) -> float:
    """Gross-error gate: accumulated drift std plus the adjacency margin.

    The default reads the cumulative recursion as the accumulated drift
    variance, T = sqrt(sigma2_p) + gamma. ``literal_sum`` instead sums the
    per-step cumulative values before the square root (a strictly larger,
    double-counting variant kept for comparison).
    """
    if literal_sum:
        return math.sqrt(model.sigma2_p_history_sum) + model.gamma
    return math.sqrt(model.sigma2_p) + model.gamma


def reset_after_update(model: DriftModel, observation_variance: float) -> DriftModel:
    """Collapse the position variance onto an accepted fix.

    The new floor is the accepted observation's variance (trace(R)/2 for a
    2x2 measurement covariance). Heading variance is retained: a position
    fix says nothing about heading.
    """
    if observation_variance < 0:
        raise ValueError("observation variance must be >= 0")
    return replace(
        model,
        sigma2_p=observation_variance,
        steps_since_reset=0,
        sigma2_p_history_sum=observation_variance,
    )
