"""Density estimation, HPD sets, error measures, odds, rate transforms."""

import math

import numpy as np
import pytest

from ybbp.summaries import (
    PointMass,
    bayes_factor_zero,
    hpd,
    kde,
    point_estimate,
    rate_posteriors,
    rmse,
    rmse_zero,
    spike_probability,
)


def test_kde_point_mass():
    est = kde(np.full(100, 2.5))
    assert isinstance(est, PointMass)
    assert est.location == 2.5


def test_kde_normal_density_value(rng):
    x = rng.standard_normal(100_000)
    est = kde(x)
    at_zero = float(np.interp(0.0, est.grid, est.density))
    assert abs(at_zero - 0.3989) < 0.02


def test_kde_normalization(rng):
    for sample in (rng.standard_normal(500), rng.exponential(2.0, 5000), rng.random(50)):
        est = kde(sample)
        integral = np.trapezoid(est.density, est.grid)
        assert abs(integral - 1.0) < 1e-3
        assert np.all(est.density >= 0.0)


def test_hpd_uniform_width(rng):
    x = rng.random(100_000)
    s = hpd(x, 0.95)
    assert abs(s.total_width - 0.95) < 0.02


def test_hpd_mass_matches_level(rng):
    for sample, level in (
        (rng.standard_normal(100_000), 0.95),
        (rng.exponential(1.0, 100_000), 0.9),
        (rng.random(100_000), 0.95),
        (np.concatenate([rng.normal(-1.5, 0.6, 50_000), rng.normal(1.5, 0.6, 50_000)]), 0.95),
    ):
        s = hpd(sample, level)
        inside = np.zeros(len(sample), dtype=bool)
        for lo, hi in s.intervals:
            inside |= (sample >= lo) & (sample <= hi)
        assert abs(inside.mean() - level) < 0.01


def test_hpd_bimodal_gives_two_intervals(rng):
    x = np.concatenate([rng.normal(-4, 0.3, 20_000), rng.normal(4, 0.3, 20_000)])
    s = hpd(x, 0.9)
    assert len(s.intervals) == 2


def test_hpd_symmetric_about_mode(rng):
    x = rng.standard_normal(200_000)
    s = hpd(x, 0.95)
    assert len(s.intervals) == 1
    lo, hi = s.intervals[0]
    assert abs((lo + hi) / 2) < 0.05


def test_hpd_degenerate():
    s = hpd(np.full(10, 3.0), 0.95)
    assert s.intervals == ((3.0, 3.0),)
    assert s.contains(3.0)


def test_point_estimate():
    assert point_estimate([2.0, 2.0, 2.0]) == 2.0
    assert point_estimate([0.0, 1.0]) == 0.5


def test_rmse_values():
    assert rmse(np.full(10, 3.3), 3.3) == 0.0
    assert rmse(np.array([6.6]), 3.3) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        rmse(np.array([1.0]), 0.0)


def test_rmse_permutation_and_duplication_invariance(rng):
    x = rng.random(101) * 3
    assert rmse(x, 0.7) == rmse(x[::-1], 0.7)
    assert rmse(np.concatenate([x, x]), 0.7) == pytest.approx(rmse(x, 0.7))


def test_rmse_zero_surrogate():
    all_zero = rmse_zero(np.zeros(5))
    assert all_zero.surrogate == 0.0 and all_zero.mean_square == 0.0
    single = rmse_zero(np.array([4.0]))
    assert single.surrogate == pytest.approx(0.25)  # (c/(c+c))^2
    assert single.mean_square == pytest.approx(16.0)
    assert single.label == "surrogate"


def test_spike_probability():
    assert spike_probability(np.array([0.5, 0.1])) == 0.0
    assert spike_probability(np.zeros(7)) == 1.0
    assert spike_probability(np.array([0.0, 0.0, 1.0, 2.0])) == 0.5


def test_bayes_factor_values():
    assert bayes_factor_zero(0.504) == pytest.approx(0.504 / 0.496)
    assert bayes_factor_zero(0.152) == pytest.approx(0.152 / 0.848)
    assert bayes_factor_zero(0.5) == 1.0
    assert bayes_factor_zero(0.0) == 0.0
    assert bayes_factor_zero(1.0) == math.inf


def test_bayes_factor_reciprocal_identity(rng):
    for p in rng.random(50) * 0.98 + 0.01:
        assert bayes_factor_zero(p) * bayes_factor_zero(1.0 - p) == pytest.approx(1.0)


def test_rate_posteriors_values():
    rate_R, rate_r = rate_posteriors([0.46], [0.005], [3.2], [4.0])
    assert rate_R[0] == pytest.approx(1.46464)
    assert rate_r[0] == pytest.approx(1.84)
    # with no mutation and a sterile r line both rates coincide
    rate_R, rate_r = rate_posteriors([0.3], [0.0], [5.0], [0.0])
    assert rate_R[0] == rate_r[0] == pytest.approx(1.5)


def test_rate_posteriors_scaling_and_filtering(rng):
    a = rng.random(200) * 0.8 + 0.1
    b = rng.random(200) * 0.5
    mR = rng.random(200) * 8
    mr = rng.random(200) * 8
    r1, r2 = rate_posteriors(a, b, mR, mr)
    s1, s2 = rate_posteriors(a, b, 3 * mR, 3 * mr)
    assert np.allclose(s1, 3 * r1) and np.allclose(s2, 3 * r2)
    keep = a < 0.5
    f1, f2 = rate_posteriors(a[keep], b[keep], mR[keep], mr[keep])
    assert np.array_equal(f1, r1[keep]) and np.array_equal(f2, r2[keep])
