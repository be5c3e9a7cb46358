import math

import pytest

from stridefuse.deadreck import (
    DriftModel,
    NoiseConfig,
    accumulate_heading_variance,
    accumulate_position_variance,
    ges_threshold,
    propagate,
    reset_after_update,
)
from stridefuse.sensors import Position2D


class TestPropagate:
    def test_east(self):
        assert propagate(Position2D(0, 0), 1.0, 0.0) == Position2D(1.0, 0.0)

    def test_north(self):
        p = propagate(Position2D(0, 0), 1.0, math.pi / 2)
        assert p.x == pytest.approx(0.0, abs=1e-15)
        assert p.y == pytest.approx(1.0)

    def test_zero_length(self):
        assert propagate(Position2D(3, 4), 0.0, 1.0) == Position2D(3, 4)


class TestHeadingVariance:
    def test_zero_noise_unchanged(self):
        model = DriftModel(gamma=1.0, sigma2_psi=0.5)
        cfg = NoiseConfig(sigma_a=0, sigma_gy=0, sigma_m=0, sigma_l_rel=0)
        out = accumulate_heading_variance(model, 1, 0.5, cfg, beta=0.1)
        assert out.sigma2_psi == 0.5

    def test_gyro_term_arithmetic(self):
        model = DriftModel(gamma=0.0)
        cfg = NoiseConfig(sigma_a=0.1, sigma_gy=0.02, sigma_m=0.1, sigma_l_rel=0)
        out = accumulate_heading_variance(model, 0, 0.5, cfg, beta=0.1)
        assert out.sigma2_psi == pytest.approx(2.5e-5, rel=1e-12)

    def test_alpha_adds_correction_noise(self):
        model = DriftModel(gamma=0.0)
        cfg = NoiseConfig(sigma_a=0.03, sigma_gy=0.02, sigma_m=0.04, sigma_l_rel=0)
        beta = 0.1
        off = accumulate_heading_variance(model, 0, 0.5, cfg, beta)
        on = accumulate_heading_variance(model, 1, 0.5, cfg, beta)
        assert on.sigma2_psi - off.sigma2_psi == pytest.approx(
            beta**2 * (cfg.sigma_a**2 + cfg.sigma_m**2), rel=1e-12
        )


class TestPositionVariance:
    def test_zero_length_unchanged(self):
        model = DriftModel(gamma=0.0, sigma2_p=0.75)
        out = accumulate_position_variance(model, 0.0, NoiseConfig())
        assert out.sigma2_p == 0.75
        assert out.steps_since_reset == 1

    def test_arithmetic(self):
        model = DriftModel(gamma=0.0, sigma2_psi=0.01)
        cfg = NoiseConfig(sigma_l_rel=0.15)
        out = accumulate_position_variance(model, 1.0, cfg)
        assert out.sigma2_p == pytest.approx(0.0325, rel=1e-12)

    def test_relative_length_scaling(self):
        # With zero heading variance the per-step increment is quadratic in
        # the step length: doubling L quadruples it.
        cfg = NoiseConfig(sigma_l_rel=0.15)
        base = DriftModel(gamma=0.0)
        inc1 = accumulate_position_variance(base, 1.0, cfg).sigma2_p
        inc2 = accumulate_position_variance(base, 2.0, cfg).sigma2_p
        assert inc2 == pytest.approx(4.0 * inc1, rel=1e-12)

    def test_std_after_n_unit_steps(self):
        cfg = NoiseConfig(sigma_a=0, sigma_gy=0, sigma_m=0, sigma_l_rel=0.15)
        model = DriftModel(gamma=0.0)
        n = 100
        for _ in range(n):
            model = accumulate_position_variance(model, 1.0, cfg)
        assert abs(math.sqrt(model.sigma2_p) - 0.15 * math.sqrt(n)) < 1e-12


class TestThreshold:
    def test_zero_variance_gives_gamma(self):
        assert ges_threshold(DriftModel(gamma=12.5)) == 12.5

    def test_sqrt_plus_gamma(self):
        assert ges_threshold(DriftModel(gamma=1.0, sigma2_p=4.0)) == pytest.approx(3.0)

    def test_literal_sum_is_larger(self):
        cfg = NoiseConfig(sigma_l_rel=0.15)
        model = DriftModel(gamma=1.0)
        for _ in range(10):
            model = accumulate_position_variance(model, 1.0, cfg)
        assert ges_threshold(model, literal_sum=True) > ges_threshold(model)

    def test_monotone_between_resets(self):
        cfg = NoiseConfig()
        model = DriftModel(gamma=2.0)
        last = ges_threshold(model)
        for _ in range(50):
            model = accumulate_heading_variance(model, 1, 0.5, cfg, beta=0.1)
            model = accumulate_position_variance(model, 0.7, cfg)
            t = ges_threshold(model)
            assert t >= last
            last = t


class TestReset:
    def test_reset_to_observation_variance(self):
        model = DriftModel(gamma=1.0, sigma2_psi=0.2, sigma2_p=9.0, steps_since_reset=30)
        out = reset_after_update(model, 0.0)
        assert out.sigma2_p == 0.0
        assert out.sigma2_psi == 0.2
        assert out.steps_since_reset == 0

    def test_replay_matches_fresh_recursion(self):
        cfg = NoiseConfig()
        model = DriftModel(gamma=1.0)
        for _ in range(10):
            model = accumulate_heading_variance(model, 1, 0.5, cfg, beta=0.1)
            model = accumulate_position_variance(model, 0.7, cfg)
        obs_var = 2.0
        after_reset = reset_after_update(model, obs_var)
        for _ in range(10):
            after_reset = accumulate_heading_variance(after_reset, 1, 0.5, cfg, beta=0.1)
            after_reset = accumulate_position_variance(after_reset, 0.7, cfg)

        fresh = DriftModel(
            gamma=1.0,
            sigma2_psi=reset_after_update(model, obs_var).sigma2_psi,
            sigma2_p=obs_var,
        )
        for _ in range(10):
            fresh = accumulate_heading_variance(fresh, 1, 0.5, cfg, beta=0.1)
            fresh = accumulate_position_variance(fresh, 0.7, cfg)
        assert after_reset.sigma2_p == pytest.approx(fresh.sigma2_p, rel=1e-12)
