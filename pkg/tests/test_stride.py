import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stridefuse.sensors import ImuSample, Vec3
from stridefuse.stride import (
    StrideConfig,
    accel_magnitude,
    detect_steps,
    sliding_mean,
    step_length,
)


def make_stream(mags, dt=0.01):
    return [
        ImuSample(t=k * dt, accel=Vec3(0.0, 0.0, m), gyro=Vec3(0, 0, 0), mag=Vec3(43.3, 0, -25))
        for k, m in enumerate(mags)
    ]


def brute_force_steps(stream, cfg):
    """Literal scan: filtered local maxima above the threshold, accepted
    only when more than t_time after the previous accepted peak."""
    mags = [accel_magnitude(s) for s in stream]
    filt = sliding_mean(mags, cfg.window_n)
    accepted = []
    last_t = None
    for k in range(1, len(filt) - 1):
        if not (filt[k] > filt[k - 1] and filt[k] > filt[k + 1]):
            continue
        if not filt[k] > cfg.t_peak:
            continue
        if last_t is not None and not stream[k].t - last_t > cfg.t_time:
            continue
        accepted.append(k)
        last_t = stream[k].t
    return accepted


class TestAccelMagnitude:
    def test_single_axis(self):
        s = make_stream([9.81])[0]
        assert accel_magnitude(s) == pytest.approx(9.81)

    def test_pythagorean(self):
        s = ImuSample(0.0, Vec3(3.0, 4.0, 0.0), Vec3(0, 0, 0), Vec3(1, 0, 0))
        assert accel_magnitude(s) == pytest.approx(5.0)

    def test_quadruple(self):
        s = ImuSample(0.0, Vec3(1.0, 2.0, 2.0), Vec3(0, 0, 0), Vec3(1, 0, 0))
        assert accel_magnitude(s) == pytest.approx(3.0)


class TestSlidingMean:
    def test_constant_signal(self):
        out = sliding_mean([2.5] * 20, 7)
        assert np.allclose(out, 2.5, rtol=1e-14)

    def test_window_one_is_identity(self):
        x = np.array([1.0, -2.0, 3.5, 0.0])
        assert np.array_equal(sliding_mean(x, 1), x)

    def test_startup_mean(self):
        out = sliding_mean([1.0, 2.0, 3.0], 3)
        assert out[0] == 1.0
        assert out[1] == 1.5
        assert out[2] == pytest.approx(2.0)

    def test_empty_input(self):
        assert sliding_mean([], 5).size == 0


class TestDetectSteps:
    def test_flat_gravity_no_steps(self):
        stream = make_stream([9.81] * 500)
        assert detect_steps(stream, StrideConfig()) == []

    def test_sinusoid_ten_steps(self):
        # 9.81 + 3 sin(2*pi*2t) for 5 s: analytic peaks at 0.125 + 0.5k,
        # ten of them, with 0.5 s spacing above the 0.3 s gate.
        t = np.arange(0, 5.0, 0.01)
        mags = 9.81 + 3.0 * np.sin(2 * math.pi * 2.0 * t)
        stream = make_stream(mags)
        cfg = StrideConfig(t_peak=10.8, t_time=0.3)
        events = detect_steps(stream, cfg)
        assert len(events) == 10
        spacings = np.diff([e.t_peak for e in events])
        assert np.allclose(spacings, 0.5, atol=0.02)

    def test_time_gate_drops_close_peak(self):
        # Two sharp super-threshold bumps 0.1 s apart with t_time 0.3.
        mags = np.full(200, 9.81)
        for center in (50, 60):
            for j in range(-5, 6):
                mags[center + j] = max(mags[center + j], 12.0 - 0.3 * abs(j))
        events = detect_steps(make_stream(mags), StrideConfig(window_n=3, t_time=0.3))
        assert len(events) == 1

    def test_matches_brute_force_scan(self):
        rng = np.random.default_rng(42)
        for trial in range(5):
            mags = 9.81 + rng.normal(0.0, 1.5, size=3000) + 2.5 * np.sin(
                2 * math.pi * 1.9 * np.arange(3000) * 0.01
            )
            stream = make_stream(mags)
            cfg = StrideConfig(window_n=9, t_peak=10.5, t_time=0.25)
            got = [e.index for e in detect_steps(stream, cfg)]
            assert got == brute_force_steps(stream, cfg)

    def test_accepted_peak_spacing_invariant(self):
        rng = np.random.default_rng(7)
        mags = 9.81 + rng.normal(0.0, 2.0, size=5000)
        cfg = StrideConfig(window_n=5, t_peak=10.0, t_time=0.4)
        events = detect_steps(make_stream(mags), cfg)
        times = [e.t_peak for e in events]
        assert all(b - a > cfg.t_time for a, b in zip(times, times[1:]))

    def test_raising_threshold_never_adds_steps(self):
        rng = np.random.default_rng(3)
        mags = 9.81 + rng.normal(0.0, 2.0, size=4000)
        stream = make_stream(mags)
        counts = [
            len(detect_steps(stream, StrideConfig(window_n=5, t_peak=tp, t_time=0.3)))
            for tp in (9.5, 10.0, 10.5, 11.0, 12.0)
        ]
        assert counts == sorted(counts, reverse=True)

    def test_event_fields_consistent(self):
        t = np.arange(0, 5.0, 0.01)
        mags = 9.81 + 3.0 * np.sin(2 * math.pi * 2.0 * t)
        events = detect_steps(make_stream(mags), StrideConfig())
        for e in events:
            assert e.acc_max >= e.acc_min
            assert e.length == pytest.approx(0.5 * (e.acc_max - e.acc_min) ** 0.25)


class TestStepLength:
    def test_zero_span(self):
        assert step_length(5.0, 5.0, 0.5) == 0.0

    def test_sixteen_span(self):
        assert step_length(16.0, 0.0, 0.5) == pytest.approx(1.0)

    def test_unit_span(self):
        assert step_length(1.0, 0.0, 0.4) == pytest.approx(0.4)

    def test_contract_violation(self):
        with pytest.raises(ValueError):
            step_length(1.0, 2.0, 0.5)

    @given(
        span_a=st.floats(0.0, 50.0),
        span_b=st.floats(0.0, 50.0),
        k=st.floats(0.01, 5.0),
    )
    def test_monotone_in_span_linear_in_k(self, span_a, span_b, k):
        lo, hi = sorted((span_a, span_b))
        assert step_length(hi, 0.0, k) >= step_length(lo, 0.0, k)
        assert step_length(hi, 0.0, 2.0 * k) == pytest.approx(
            2.0 * step_length(hi, 0.0, k), rel=1e-12
        )
