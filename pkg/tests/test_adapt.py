import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given
from hypothesis import strategies as st

from slp.adapt import (
    LepskiConfig,
    _bin_means,
    beta_at_level,
    beta_loglik,
    beta_mle,
    lepski_beta,
    lepski_select,
    lepski_tau_range,
    plugin_fit,
    split_halves,
)
from slp.densities import BetaDensity
from slp.errors import EmptyBinError, NumericalError
from slp.estimators import EstimatorConfig, Sample
from slp.special import digamma


def stats(xs):
    xs = np.asarray(xs)
    return float(np.log(xs).sum()), float(np.log1p(-xs).sum()), xs.size


def test_mle_closed_form_fixed_a2():
    xs = [math.exp(-1), math.exp(-1)]
    a1, a2 = beta_mle(xs, a2=1.0)
    assert a1 == pytest.approx(1.0, abs=1e-9) and a2 == 1.0


@given(st.lists(st.floats(0.01, 0.99), min_size=2, max_size=30))
def test_mle_fixed_a2_matches_closed_form(xs):
    est = -len(xs) / np.log(xs).sum()
    a1, _ = beta_mle(xs, bounds=(0.01, 1e3), a2=1.0)
    assert a1 == pytest.approx(min(max(est, 0.01), 1e3), rel=1e-8)


def test_mle_consistency():
    xs = BetaDensity(4, 1).sample(10**5, np.random.default_rng(5))
    a1, a2 = beta_mle(xs)
    assert abs(a1 - 4) < 0.1 and abs(a2 - 1) < 0.1


def test_mle_clamped_to_box():
    xs = BetaDensity(12, 1).sample(5000, np.random.default_rng(6))
    a1, _ = beta_mle(xs)
    assert a1 == 10.0


@pytest.mark.parametrize("shapes", [(2.5, 4.0), (0.8, 1.7), (6.0, 2.0)])
def test_mle_stationarity_and_scipy(shapes):
    xs = BetaDensity(*shapes).sample(4000, np.random.default_rng(8))
    a1, a2 = beta_mle(xs)
    s1, s2, m = stats(xs)
    assert s1 / m - (digamma(a1) - digamma(a1 + a2)) == pytest.approx(0.0, abs=1e-8)
    assert s2 / m - (digamma(a2) - digamma(a1 + a2)) == pytest.approx(0.0, abs=1e-8)
    ref = scipy.stats.beta.fit(xs, floc=0, fscale=1)
    assert (a1, a2) == pytest.approx(ref[:2], rel=1e-4)


@pytest.mark.parametrize("shapes", [(2.5, 4.0), (0.3, 0.3), (15.0, 1.0), (1.0, 20.0)])
def test_mle_beats_random_points(shapes):
    rng = np.random.default_rng(9)
    xs = BetaDensity(*shapes).sample(500, rng)
    xs = xs[(xs > 0) & (xs < 1)]
    s1, s2, m = stats(xs)
    best = beta_loglik(*beta_mle(xs), s1, s2, m)
    for a1, a2 in rng.uniform(0.5, 10.0, size=(100, 2)):
        assert best >= beta_loglik(a1, a2, s1, s2, m) - 1e-9


def test_mle_errors():
    with pytest.raises(ValueError):
        beta_mle([0.5])
    with pytest.raises(ValueError):
        beta_mle([0.0, 1.0, 0.5])
    with pytest.raises(NumericalError):
        beta_mle([0.3, 0.3, 0.3])
    with pytest.raises(ValueError):
        beta_mle([0.2, 0.4], bounds=(1.0, 0.5))


def test_tau_range_examples():
    assert lepski_tau_range(1024, LepskiConfig(0.5, 2.0)) == (6, 2)


@given(st.integers(4, 10**7), st.floats(0.1, 2.0), st.floats(0.01, 3.0))
def test_tau_range_ordering(m, lo, gap):
    tau_star, tau_low = lepski_tau_range(m, LepskiConfig(lo, lo + gap))
    assert tau_low <= tau_star
    assert 2 ** (tau_star - 1) <= m ** (1 / (2 * lo + 1)) * (1 + 1e-9)
    assert 2 ** tau_star > m ** (1 / (2 * lo + 1))


def test_beta_at_level_inverts_bin_width():
    for n, tau in [(1000, 3), (10**5, 7)]:
        b = beta_at_level(tau, n)
        assert 2.0**-tau == pytest.approx(n ** (-1 / (2 * b + 1)), rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        LepskiConfig(1.0, 0.5)
    with pytest.raises(ValueError):
        LepskiConfig(0.3, 1.0, c_sel=4.0)
    with pytest.raises(ValueError):
        LepskiConfig(0.3, 1.0, c_shrink=1.0)
    with pytest.raises(ValueError):
        LepskiConfig(0.3, 1.0, trim=0.5)
    cfg = LepskiConfig(0.5, 1.0, kappa=2.0)
    assert cfg.c_sel == pytest.approx(8.1) and cfg.c_shrink == pytest.approx(9.1)


def test_constant_data_selects_lowest_level(rng):
    n = 2000
    s = Sample.from_arrays(rng.uniform(size=n), np.zeros(n))
    cfg = LepskiConfig(0.3, 1.0)
    res = lepski_select(s, cfg)
    assert res.tau_hat == res.tau_low >= 1
    raw = beta_at_level(res.tau_low, n) - cfg.c_shrink * math.log(math.log(n)) / math.log(n)
    assert res.beta_hat == min(max(min(raw, cfg.beta_hi), cfg.beta_lo), cfg.beta_hi)


def test_single_point_bin():
    x = np.array([0.06, 0.5, 0.9])
    means = _bin_means(x, np.array([7.0, 1.0, 2.0]), 1, 0.05)
    assert means[0] == 7.0 and means[1] == 1.5


def test_empty_bin_error_names_level():
    s = Sample.from_arrays(np.linspace(0.06, 0.2, 300), np.zeros(300))
    with pytest.raises(EmptyBinError) as info:
        lepski_beta(s, LepskiConfig(0.3, 1.0))
    assert "tau=" in str(info.value) and "bin index" in str(info.value)


def test_noiseless_coarse_window():
    rng = np.random.default_rng(3)
    x = rng.uniform(size=10**5)
    s = Sample.from_arrays(x, 0.2 * np.abs(x - 0.5) ** 0.5)
    assert 0.2 <= lepski_beta(s, LepskiConfig(0.2, 0.9)) <= 0.9


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 2.0))
def test_clamped_and_deterministic(seed, noise):
    rng = np.random.default_rng(seed)
    x = (np.arange(3000) + rng.uniform(size=3000)) / 3000
    s = Sample.from_arrays(x, np.sin(6 * x) + noise * rng.normal(size=x.size))
    cfg = LepskiConfig(0.3, 1.0)
    a = lepski_select(s, cfg)
    assert cfg.beta_lo <= a.beta_hat <= cfg.beta_hi
    assert lepski_select(s, cfg) == a


def test_population_choice(rng):
    xs, xt = rng.uniform(size=400), rng.uniform(size=600)
    s = Sample.from_arrays(xs, np.zeros(400), xt, np.ones(600))
    assert lepski_select(s, LepskiConfig(0.3, 1.0)).n == 600
    s = Sample.from_arrays(xt, np.zeros(600), xs, np.ones(400))
    assert lepski_select(s, LepskiConfig(0.3, 1.0)).n == 600


@pytest.mark.parametrize("n,n_T,first,second", [(5, 3, (2, 1), (3, 2)), (0, 4, (0, 2), (0, 2))])
def test_split_halves(n, n_T, first, second):
    s = Sample.from_arrays(np.linspace(0, 1, n), np.arange(n), np.linspace(0, 1, n_T), -np.arange(n_T))
    a, b = split_halves(s)
    assert (a.n, a.n_T) == first and (b.n, b.n_T) == second
    again = split_halves(s)
    np.testing.assert_array_equal(again[0].y, a.y)
    np.testing.assert_array_equal(again[1].y, b.y)
    np.testing.assert_array_equal(np.sort(np.concatenate([a.y, b.y])), np.sort(s.y))


def test_plugin_fit_recovers_shapes():
    rng = np.random.default_rng(21)
    xs = BetaDensity(4, 1).sample(20000, rng)
    xt = rng.uniform(size=2000)
    s = Sample.from_arrays(xs, 0.2 * xs**0.5, xt, 0.2 * xt**0.5)
    fit = plugin_fit(np.linspace(0, 1, 21), s, EstimatorConfig(beta=0.5))
    assert fit.source.a1 == pytest.approx(4, abs=0.3) and fit.source.a2 == pytest.approx(1, abs=0.1)
    assert fit.target.a1 == pytest.approx(1, abs=0.15) and fit.target.a2 == pytest.approx(1, abs=0.15)
    assert (fit.n, fit.n_T) == (10000, 1000)
    assert np.all(np.abs(fit.curve) < 2.2)


def test_plugin_fit_without_target(rng):
    xs = BetaDensity(4, 1).sample(1000, rng)
    s = Sample.from_arrays(xs, np.zeros(1000))
    fit = plugin_fit(np.linspace(0, 1, 5), s, EstimatorConfig(beta=0.5))
    assert fit.target == BetaDensity(1.0, 1.0)
    np.testing.assert_array_equal(fit.curve, 0.0)
