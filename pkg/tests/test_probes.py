"""Probe battery: targeted examples per probe plus battery-level checks."""

import json

import numpy as np
import pytest

from phasemin.core import phase_vec
from phasemin.probes import (
    consistent_with_bound,
    probe_norm_concentration,
    probe_order_statistic,
    probe_phase_perturbation,
    probe_phase_perturbation_l1,
    probe_projection_direction,
    probe_small_ball,
    probe_unit_perturbation,
    run_all_probes,
)


class TestScalarPhaseBound:
    def test_antipodal_extreme(self):
        # x=1, y=-2: the phase flips, difference exactly 2, bound min(4,2)=2
        lhs = abs(phase_vec(np.array([-1.0 + 0j]))[0] - phase_vec(np.array([1.0 + 0j]))[0])
        assert lhs == pytest.approx(2.0)
        assert lhs <= min(2.0 * 2.0, 2.0)

    def test_zero_perturbation(self):
        x = np.array([0.3 + 0.4j])
        assert abs(phase_vec(x)[0] - phase_vec(x + 0.0)[0]) == 0.0

    def test_probe_passes(self, rng):
        res = probe_phase_perturbation(200_000, rng)
        assert res.passed and res.violations == 0
        assert res.details["max_excess"] <= 0.0


class TestUnitVectorBound:
    def test_direction_flip(self):
        v = np.array([1.0 + 0j, 2.0j])
        u = -2.0 * v
        s = u + v
        lhs = np.linalg.norm(s / np.linalg.norm(s) - v / np.linalg.norm(v))
        assert lhs == pytest.approx(2.0)

    def test_probe_passes(self, rng):
        res = probe_unit_perturbation(30_000, rng=rng)
        assert res.passed and res.violations == 0


class TestSmallBall:
    def test_exact_rayleigh_values(self, rng):
        # Pr(|x| <= r) = 1 - exp(-r^2): 0.2212 at r=0.5, 0.632 at r=1
        x = np.abs(
            (rng.standard_normal(400_000) + 1j * rng.standard_normal(400_000))
            * np.sqrt(0.5)
        )
        for r, exact in ((0.5, 1 - np.exp(-0.25)), (1.0, 1 - np.exp(-1.0))):
            rate = float(np.mean(x <= r))
            assert rate == pytest.approx(exact, abs=0.005)
            assert exact < r * r

    def test_probe_passes(self, rng):
        res = probe_small_ball(400_000, rng=rng)
        assert res.passed
        assert res.empirical_rate < 1.0  # strictly below the r^2 bound


class TestProjectionDirection:
    def test_vector_inside_subspace(self, rng):
        from phasemin.sensing import make_instance

        inst = make_instance(3, 8, 64)
        coords = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        x = inst.basis.columns @ (coords / np.linalg.norm(coords))
        a = np.linalg.norm(inst.basis.columns.conj().T @ x)
        assert a == pytest.approx(1.0, abs=1e-12)

    def test_probe_passes(self, rng):
        res = probe_projection_direction(500, rng=rng)
        assert res.passed and res.violations == 0
        assert res.details["max_deviation"] <= 1e-10


class TestNormConcentration:
    def test_probe_passes(self, rng):
        res = probe_norm_concentration(8_000, rng=rng)
        assert res.passed
        assert res.details["monotone_in_m"]

    def test_trivial_threshold(self, rng):
        # at t=0 the exceedance is certain
        g = rng.standard_normal((100, 2 * 64))
        stat = np.abs(0.5 * np.sum(g * g, axis=1) / 64 - 1.0)
        assert np.mean(stat > 0.0) == 1.0


class TestOrderStatistic:
    def test_expected_count_scale(self, rng):
        # E #{|x_i| <= r} = (1 - exp(-r^2)) m ~ 40 at r=0.2, m=1024,
        # well under the tested threshold 2 r^2 m ~ 82
        m, r = 1024, 0.2
        g = rng.standard_normal((200, 2 * m))
        mod_sq = 0.5 * (g[:, :m] ** 2 + g[:, m:] ** 2)
        counts = np.sum(mod_sq <= r * r, axis=1)
        assert counts.mean() == pytest.approx((1 - np.exp(-r * r)) * m, rel=0.1)
        assert counts.mean() < 2 * r * r * m

    def test_probe_passes(self, rng):
        res = probe_order_statistic(5_000, rng=rng)
        assert res.passed


class TestL1Smoke:
    def test_probe_passes(self, rng):
        res = probe_phase_perturbation_l1(50, rng=rng)
        assert res.passed
        assert 0.0 < res.empirical_rate <= 1.0


class TestBattery:
    def test_consistency_helper(self):
        assert consistent_with_bound(0, 1000, 0.01)
        assert consistent_with_bound(12, 1000, 0.01)
        assert not consistent_with_bound(40, 1000, 0.01)
        assert consistent_with_bound(999, 1000, 1.0)

    def test_scaled_battery_reproducible_and_serializable(self):
        a = run_all_probes(99, trials_scale=0.02)
        b = run_all_probes(99, trials_scale=0.02)
        assert [r.to_dict() for r in a] == [r.to_dict() for r in b]
        json.dumps([r.to_dict() for r in a])
        assert len({r.probe for r in a}) == len(a)
