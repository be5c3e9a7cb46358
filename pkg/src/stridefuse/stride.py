"""Step detection from acceleration magnitude and Weinberg step length.

The detector works on the smoothed magnitude of the raw accelerometer
vector, so it is independent of device orientation. A sample is a step
peak when it is a local maximum of the smoothed signal, exceeds the
walking threshold, and arrives more than the minimum inter-step interval
after the previously accepted peak. Step length uses the fourth-root
span model over the gravity-removed magnitude between accepted peaks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sensors import ImuSample

GRAVITY_MPS2 = 9.81


@dataclass(frozen=True)
class StrideConfig:
    """Detector and step-length parameters.

    window_n   sliding-mean width, samples
    t_peak     minimum smoothed magnitude of a step peak, m/s^2
    t_time     minimum spacing between accepted peaks, seconds
    k          step-length gain (dimensionless, per-user calibration knob)
    """

    window_n: int = 15
    t_peak: float = 10.8
    t_time: float = 0.3
    k: float = 0.5

    def __post_init__(self) -> None:
        if self.window_n < 1:
            raise ValueError(f"window_n must be >= 1, got {self.window_n}")
        if self.t_time <= 0:
            raise ValueError(f"t_time must be > 0, got {self.t_time}")
        if self.k <= 0:
            raise ValueError(f"k must be > 0, got {self.k}")


@dataclass(frozen=True)
class StepEvent:
    """One accepted stride: peak time, estimated length, magnitude span.

    ``index`` is the sample index of the accepted peak in the source
    stream (used downstream to sample heading at the step instant).
    """

    t_peak: float
    length: float
    acc_max: float
    acc_min: float
    index: int

    def __post_init__(self) -> None:
        if self.acc_max < self.acc_min:
            raise ValueError("acc_max must be >= acc_min")
        if self.length < 0:
            raise ValueError("step length must be >= 0")


def accel_magnitude(sample: ImuSample) -> float:
    """Euclidean norm of the accelerometer vector, m/s^2."""
    a = sample.accel
    return float(np.sqrt(a.x * a.x + a.y * a.y + a.z * a.z))


def sliding_mean(signal: Sequence[float] | np.ndarray, window_n: int) -> np.ndarray:
    """Causal sliding mean: out[k] = mean of the last min(k+1, N) inputs.

    During startup the mean runs over however many samples exist, so the
    output has the same length as the input. Empty input yields empty
    output.
    """
    if window_n < 1:
        raise ValueError(f"window_n must be >= 1, got {window_n}")
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if x.size == 0 or window_n == 1:
        return x.copy()
    out = np.empty_like(x)
    head = min(window_n - 1, x.size)
    for k in range(head):
        out[k] = x[: k + 1].mean()
    if x.size >= window_n:
        windows = np.lib.stride_tricks.sliding_window_view(x, window_n)
        out[window_n - 1 :] = windows.mean(axis=1)
    return out


def step_length(acc_max: float, acc_min: float, k: float) -> float:
    """Fourth-root span model: k * (acc_max - acc_min)**0.25, metres."""
    if acc_max < acc_min:
        raise ValueError(f"acc_max ({acc_max}) < acc_min ({acc_min})")
    return k * (acc_max - acc_min) ** 0.25


def _local_maxima(filtered: np.ndarray) -> list[int]:
    """Indices of local maxima, plateaus resolved to their earliest sample.

    A maximum must rise from the previous sample and eventually fall to a
    lower one; boundary samples are never maxima.
    """
    n = filtered.size
    peaks: list[int] = []
    k = 1
    while k < n - 1:
        if filtered[k] > filtered[k - 1]:
            j = k
            while j + 1 < n and filtered[j + 1] == filtered[k]:
                j += 1
            if j + 1 < n and filtered[j + 1] < filtered[k]:
                peaks.append(k)
            k = j + 1
        else:
            k += 1
    return peaks


def detect_steps(stream: Sequence[ImuSample], cfg: StrideConfig) -> list[StepEvent]:
    """Detect strides in an IMU stream.

    Returns one :class:`StepEvent` per accepted peak; quiescent streams
    yield an empty list. The magnitude span for the length model is taken
    over the gravity-removed raw magnitude between consecutive accepted
    peaks (stream start for the first step).
    """
    if not stream:
        return []
    mags = np.fromiter(
        (s.accel.x * s.accel.x + s.accel.y * s.accel.y + s.accel.z * s.accel.z for s in stream),
        dtype=float,
        count=len(stream),
    )
    np.sqrt(mags, out=mags)
    filtered = sliding_mean(mags, cfg.window_n)
    vertical = mags - GRAVITY_MPS2

    events: list[StepEvent] = []
    last_t: float | None = None
    last_idx = -1
    for idx in _local_maxima(filtered):
        if filtered[idx] <= cfg.t_peak:
            continue
        t = stream[idx].t
        if last_t is not None and t - last_t <= cfg.t_time:
            continue
        window = vertical[last_idx + 1 : idx + 1]
        acc_max = float(window.max())
        acc_min = float(window.min())
        events.append(
            StepEvent(
                t_peak=t,
                length=step_length(acc_max, acc_min, cfg.k),
                acc_max=acc_max,
                acc_min=acc_min,
                index=idx,
            )
        )
        last_t = t
        last_idx = idx
    return events
