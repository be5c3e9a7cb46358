import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stridefuse.evalkit import (
    RecognitionStats,
    cdf_export,
    heading_error,
    horizontal_error,
    load_cdf,
    metrics_summary,
    percentile,
    recognition_stats,
)
from stridefuse.fusion import FusedStepRecord
from stridefuse.sensors import Position2D
from stridefuse.synth import BeaconEvent


def record(step, updated=False, psi=0.0):
    return FusedStepRecord(
        step=step,
        t=0.5 * step,
        x_pdr=Position2D(0, 0),
        x_fused=Position2D(0, 0),
        update_applied=updated,
        accepted_beacon="b" if updated else None,
        t_threshold=5.0,
        psi=psi,
        length=0.7,
        alpha=1,
    )


class TestHorizontalError:
    def test_identical_zero(self):
        pts = [Position2D(float(i), 0.0) for i in range(5)]
        assert np.all(horizontal_error(pts, pts) == 0.0)

    def test_constant_offset(self):
        a = [Position2D(float(i), 0.0) for i in range(5)]
        b = [Position2D(float(i) + 3.0, 4.0) for i in range(5)]
        assert np.allclose(horizontal_error(a, b), 5.0)

    def test_single_step(self):
        out = horizontal_error([Position2D(1, 1)], [Position2D(1, 2)])
        assert out.shape == (1,)
        assert out[0] == pytest.approx(1.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            horizontal_error([Position2D(0, 0)], [])

    def test_translation_invariance(self):
        rng = np.random.default_rng(0)
        a = [Position2D(*rng.normal(0, 10, 2)) for _ in range(20)]
        b = [Position2D(*rng.normal(0, 10, 2)) for _ in range(20)]
        shift = Position2D(123.0, -45.0)
        a2 = [Position2D(p.x + shift.x, p.y + shift.y) for p in a]
        b2 = [Position2D(p.x + shift.x, p.y + shift.y) for p in b]
        assert np.allclose(horizontal_error(a, b), horizontal_error(a2, b2))


class TestPercentile:
    def test_linear_interpolation(self):
        series = list(range(1, 101))
        assert percentile(series, 75) == pytest.approx(75.25)

    def test_constant_series(self):
        assert percentile([3.5] * 9, 20) == 3.5
        assert percentile([3.5] * 9, 99) == 3.5

    def test_median(self):
        assert percentile([1.0, 2.0, 3.0], 50) == 2.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            percentile([], 50)

    @given(
        data=st.lists(st.floats(0, 1000), min_size=1, max_size=50),
        q1=st.floats(1, 99),
        q2=st.floats(1, 99),
    )
    @settings(max_examples=200)
    def test_monotone_in_q(self, data, q1, q2):
        lo, hi = sorted((q1, q2))
        assert percentile(data, lo) <= percentile(data, hi) + 1e-12


class TestCdfExport:
    def test_rows_and_final_fraction(self, tmp_path):
        p = tmp_path / "cdf.csv"
        cdf_export([3.0, 1.0, 2.0], p)
        errors, fractions = load_cdf(p)
        assert len(errors) == 3
        assert fractions[-1] == 1.0
        assert np.all(np.diff(errors) >= 0)
        assert np.all(np.diff(fractions) >= 0)

    def test_all_equal_values_ramp(self, tmp_path):
        p = tmp_path / "cdf.csv"
        cdf_export([2.0, 2.0, 2.0, 2.0], p)
        errors, fractions = load_cdf(p)
        assert np.all(errors == 2.0)
        assert fractions[0] == 0.25
        assert fractions[-1] == 1.0

    def test_shared_schema_for_overlay(self, tmp_path):
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        cdf_export([1.0, 2.0], pa)
        cdf_export([5.0], pb)
        assert pa.read_text().splitlines()[0] == pb.read_text().splitlines()[0] == "error_m,fraction"


class TestRecognition:
    def test_eleven_of_twelve(self):
        events = [BeaconEvent(step=100 * i, beacon_id=f"B{i}") for i in range(1, 13)]
        records = [record(100 * i, updated=(i != 7)) for i in range(1, 13)]
        stats = recognition_stats(records, events)
        assert (stats.recognized, stats.total) == (11, 12)
        assert stats.accuracy == pytest.approx(0.917, abs=5e-4)

    def test_seven_of_eleven(self):
        events = [BeaconEvent(step=10 * i, beacon_id=f"B{i}") for i in range(1, 12)]
        records = [record(10 * i, updated=(i <= 7)) for i in range(1, 12)]
        stats = recognition_stats(records, events)
        assert (stats.recognized, stats.total) == (7, 11)
        assert stats.accuracy == pytest.approx(0.636, abs=5e-4)

    def test_no_events_accuracy_absent(self):
        stats = recognition_stats([record(1)], [])
        assert stats == RecognitionStats(0, 0, None)


def test_heading_error_wraps():
    import math

    from stridefuse.synth import TrueStep

    records = [record(1, psi=math.pi - 0.05)]
    truth = [TrueStep(1, 0.5, Position2D(0, 0), -math.pi + 0.05, False)]
    assert heading_error(records, truth)[0] == pytest.approx(0.1, abs=1e-12)


def test_metrics_summary_schema():
    m = metrics_summary(np.array([1.0, 2.0, 3.0]), RecognitionStats(3, 4, 0.75))
    assert set(m) == {"p50", "p75", "p95", "mean", "recognized", "total"}
    assert m["mean"] == pytest.approx(2.0)
    empty = metrics_summary(None)
    assert empty["p75"] is None and empty["recognized"] is None
