"""Estimators against synthetic oracles and exact closed forms."""

import math

import numpy as np
import pytest

from fa1f import ModelParams
from fa1f.estimators import (EmpiricalPatternMeasure, VarianceSeries, clt_check,
                             covariance_lag, drift_bound_constants,
                             gap_violation_rows, s2_direct, tail_fit,
                             tv_distance, tv_sampling_error, variance_series,
                             velocity_estimate, zero_density)


def measure_from_freqs(width, freqs, n=10_000):
    counts = np.zeros(1 << (width + 1), dtype=int)
    for code, f in freqs.items():
        counts[code] = int(round(f * n))
    m = EmpiricalPatternMeasure(width=width, counts=counts, n_samples=n)
    assert counts.sum() == n
    return m


class TestPatternMeasure:
    def test_from_patterns_counts(self):
        rows = np.array([[0, 1, 1], [0, 1, 1], [0, 0, 1]], dtype=np.uint8)
        m = EmpiricalPatternMeasure.from_patterns(rows)
        assert m.width == 2
        assert m.n_samples == 3
        assert m.counts[0b110] == 2
        assert m.counts[0b100] == 1

    def test_front_bit_must_be_empty(self):
        with pytest.raises(ValueError):
            EmpiricalPatternMeasure.from_patterns(np.array([[1, 0]], dtype=np.uint8))

    def test_zero_density_at_front_is_one(self):
        rows = np.array([[0, 1], [0, 0], [0, 1]], dtype=np.uint8)
        m = EmpiricalPatternMeasure.from_patterns(rows)
        assert zero_density(m, 0) == 1.0
        assert zero_density(m, 1) == pytest.approx(1 / 3)


class TestTvDistance:
    def test_identical_measures(self):
        m = measure_from_freqs(1, {0b00: 0.5, 0b10: 0.5})
        assert tv_distance(m, m) == 0.0

    def test_disjoint_supports(self):
        m1 = measure_from_freqs(1, {0b00: 1.0})
        m2 = measure_from_freqs(1, {0b10: 1.0})
        assert tv_distance(m1, m2) == 1.0

    def test_bernoulli_half_vs_three_quarters(self):
        # exact value 0.5 * (|0.50-0.25| + |0.50-0.75|) = 0.25
        m1 = measure_from_freqs(1, {0b00: 0.5, 0b10: 0.5})
        m2 = measure_from_freqs(1, {0b00: 0.25, 0b10: 0.75})
        assert tv_distance(m1, m2) == pytest.approx(0.25, abs=1e-12)

    def test_width_mismatch(self):
        m1 = measure_from_freqs(1, {0b00: 1.0})
        m2 = measure_from_freqs(2, {0b000: 1.0})
        with pytest.raises(ValueError):
            tv_distance(m1, m2)

    def test_metric_properties_on_sampled_triples(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            ms = []
            for _ in range(3):
                rows = np.zeros((200, 4), dtype=np.uint8)
                rows[:, 1:] = rng.integers(0, 2, size=(200, 3))
                ms.append(EmpiricalPatternMeasure.from_patterns(rows))
            a, b, c = ms
            assert tv_distance(a, b) == pytest.approx(tv_distance(b, a))
            assert tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-12
            assert 0.0 <= tv_distance(a, b) <= 1.0

    def test_sampling_error_scale(self):
        rng = np.random.default_rng(5)
        rows = np.zeros((4000, 2), dtype=np.uint8)
        rows[:, 1] = rng.integers(0, 2, size=4000)
        m1 = EmpiricalPatternMeasure.from_patterns(rows[:2000])
        m2 = EmpiricalPatternMeasure.from_patterns(rows[2000:])
        err = tv_sampling_error(m1, m2)
        # one effective binomial cell: sigma = 0.5 * sqrt(2/pi) * 2 sqrt(...)
        assert 0.005 < err < 0.05
        assert tv_distance(m1, m2) < 4 * err


class TestVelocity:
    def test_poisson_calibration(self):
        rng = np.random.default_rng(3)
        t = 100.0
        xs = -rng.poisson(t, size=2000)
        v, se = velocity_estimate(xs, t)
        assert abs(v + 1.0) < 3 * se
        assert se == pytest.approx(xs.std(ddof=1) / t / math.sqrt(2000))

    def test_single_path_rejected(self):
        with pytest.raises(ValueError):
            velocity_estimate([5.0], 1.0)


class TestCltCheck:
    def test_normal_samples_pass(self):
        rng = np.random.default_rng(4)
        t = 400.0
        xs = -0.5 * t + rng.normal(0, math.sqrt(2.0 * t), size=500)
        stat, p = clt_check(xs, t, -0.5, 2.0)
        assert p > 0.01

    def test_constant_samples_fail_hard(self):
        stat, p = clt_check(np.zeros(200), 100.0, 0.0, 1.0)
        assert stat >= 0.5
        assert p < 1e-6

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(ValueError):
            clt_check(np.arange(10.0), 10.0, 0.0, 0.0)


class TestIncrements:
    def test_independent_increments_have_null_covariance(self):
        rng = np.random.default_rng(6)
        inc = rng.normal(size=(400, 60))
        cov, se = covariance_lag(inc, 10, 20)
        assert abs(cov) < 3 * se
        var, _ = covariance_lag(inc, 10, 0)
        assert var > 0

    def test_insufficient_paths(self):
        with pytest.raises(ValueError):
            covariance_lag(np.zeros((1, 10)), 1, 1)
        with pytest.raises(ValueError):
            covariance_lag(np.zeros((5, 10)), 1, 99)

    def test_variance_series_recovers_ma1_limit(self):
        # xi_j = eps_j + 0.5 eps_{j-1}: Var = 1.25, lag-1 Cov = 0.5,
        # s^2 = Var + 2 Cov = 2.25
        rng = np.random.default_rng(7)
        eps = rng.normal(size=(600, 201))
        inc = eps[:, 1:] + 0.5 * eps[:, :-1]
        series = variance_series(inc, burn_in_index=10)
        assert isinstance(series, VarianceSeries)
        assert series.variance == pytest.approx(1.25, rel=0.05)
        assert series.covariances[0] == pytest.approx(0.5, rel=0.15)
        assert series.s2 == pytest.approx(2.25, rel=0.1)

    def test_s2_direct_on_poisson(self):
        rng = np.random.default_rng(8)
        t = 200.0
        xs = -rng.poisson(t, size=3000)
        s2, se = s2_direct(xs, t)
        assert abs(s2 - 1.0) < 3 * max(se, 0.03)


class TestTailFit:
    def test_exponential_rate_recovered(self):
        rng = np.random.default_rng(9)
        fit = tail_fit(rng.exponential(0.5, size=500))
        assert fit.rate == pytest.approx(2.0, rel=0.15)
        assert fit.r_squared >= 0.95

    def test_constant_samples_rejected(self):
        with pytest.raises(ValueError):
            tail_fit(np.ones(100))

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError):
            tail_fit(np.arange(10.0))

    def test_geometric_samples_fit(self):
        rng = np.random.default_rng(10)
        fit = tail_fit(rng.geometric(0.6, size=400).astype(float))
        assert fit.rate > 0
        assert fit.r_squared > 0.9


class TestGapRows:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        rows = np.zeros((100, 30), dtype=np.uint8)
        rows[:, 1:] = (rng.random((100, 29)) < 0.7).astype(np.uint8)
        a, b, l = 3, 25, 4
        got = gap_violation_rows(rows, a, b, l)
        for i in range(100):
            has_run = any(all(rows[i, y + j] == 1 for j in range(l))
                          for y in range(a, b - l + 2))
            assert got[i] == has_run

    def test_box_must_fit(self):
        with pytest.raises(ValueError):
            gap_violation_rows(np.zeros((2, 5), dtype=np.uint8), 0, 10, 2)


class TestDriftConstants:
    def test_formula_values(self):
        lam, asym = drift_bound_constants(1.2, 0.9)
        assert lam == pytest.approx((1.2**2 - 1) / 1.2 * (0.9 - 1.2 / 2.2), abs=1e-15)
        assert lam == pytest.approx(0.13, abs=1e-12)
        assert asym == pytest.approx(0.9 / (0.9 * 2.2 - 1.2), abs=1e-15)
        assert asym == pytest.approx(1.1538, abs=1e-3)

    def test_parameter_domain(self):
        with pytest.raises(ValueError):
            drift_bound_constants(1.0, 0.9)
        with pytest.raises(ValueError):
            drift_bound_constants(1.2, 0.5)
