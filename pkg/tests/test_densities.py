import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slp.densities import (
    UNIFORM,
    BetaDensity,
    Piece,
    SingularityDensitySpec,
    beta_cdf,
    beta_pdf,
    interval_mass,
    sample,
    two_tsp_example,
    validate_pair,
    validate_spec,
)
from slp.special import adaptive_simpson


@pytest.mark.parametrize("x,a1,a2,expected", [(0.5, 1, 1, 1.0), (0.5, 2, 2, 1.5), (0.25, 2, 1, 0.5)])
def test_beta_pdf_examples(x, a1, a2, expected):
    assert beta_pdf(x, BetaDensity(a1, a2)) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("x,a1,a2,expected", [(0.5, 2, 1, 0.25), (0.5, 2, 2, 0.5)])
def test_beta_cdf_examples(x, a1, a2, expected):
    assert beta_cdf(x, BetaDensity(a1, a2)) == pytest.approx(expected, abs=1e-15)


def test_beta_cdf_against_quadrature():
    d = BetaDensity(2.5, 4.0)
    oracle = adaptive_simpson(lambda t: d.pdf(t), 0.0, 0.3, tol=1e-12)
    assert d.cdf(0.3) == pytest.approx(oracle, abs=1e-8)


def test_beta_cdf_random_triples_against_quadrature(rng):
    for _ in range(100):
        x = rng.uniform(0.01, 0.99)
        a1, a2 = rng.uniform(1.0, 8.0, size=2)
        d = BetaDensity(a1, a2)
        oracle = adaptive_simpson(lambda t: d.pdf(t), 0.0, x, tol=1e-11)
        assert abs(d.cdf(x) - oracle) <= 1e-8


@given(st.floats(0.3, 9.0), st.floats(0.0, 1.0))
def test_beta_a2_one_cdf_is_power(a, x):
    assert BetaDensity(a, 1.0).cdf(x) == x**a


@pytest.mark.parametrize("bad", [-0.1, 1.2, float("nan")])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        beta_pdf(bad, UNIFORM)
    with pytest.raises(ValueError):
        beta_cdf(bad, UNIFORM)


@pytest.mark.parametrize("shapes", [(0.0, 1.0), (1.0, -2.0), (math.inf, 1.0)])
def test_invalid_shapes(shapes):
    with pytest.raises(ValueError):
        BetaDensity(*shapes)


@pytest.mark.parametrize("d", [UNIFORM, BetaDensity(4, 1), BetaDensity(2.5, 4.0), BetaDensity(1.0, 3.0)])
def test_pdf_integrates_to_one(d):
    assert adaptive_simpson(lambda t: d.pdf(t), 0.0, 1.0, tol=1e-11) == pytest.approx(1.0, abs=1e-8)


def test_interval_mass_examples():
    assert interval_mass(UNIFORM, 0.2, 0.7) == pytest.approx(0.5, abs=1e-15)
    assert interval_mass(BetaDensity(4, 1), -0.1, 0.2) == pytest.approx(0.0016, rel=1e-13)
    assert interval_mass(BetaDensity(2, 3), 0.5, 0.5) == 0.0
    assert interval_mass(BetaDensity(2, 3), 0.7, 0.2) == 0.0
    assert interval_mass(BetaDensity(2, 3), -3.0, 4.0) == pytest.approx(1.0, abs=1e-15)


@given(st.floats(-0.5, 1.5), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_interval_mass_additive(lo, f1, f2):
    d = BetaDensity(2.5, 1.7)
    hi = lo + f1
    mid = lo + f1 * f2
    total = interval_mass(d, lo, hi)
    assert interval_mass(d, lo, mid) + interval_mass(d, mid, hi) == pytest.approx(total, abs=1e-12)
    assert 0.0 <= total <= 1.0


def test_sample_empty_and_deterministic():
    assert sample(UNIFORM, 0, np.random.default_rng(1)).size == 0
    d = BetaDensity(2.0, 3.0)
    a = sample(d, 50, np.random.default_rng(7))
    b = sample(d, 50, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)
    assert np.all((a >= 0) & (a <= 1))


def test_sample_beta_a1_empirical_cdf():
    m = 10**5
    xs = sample(BetaDensity(4, 1), m, np.random.default_rng(2024))
    p = 0.5**4
    assert abs(np.mean(xs <= 0.5) - p) <= 3 * math.sqrt(p * (1 - p) / m)


@pytest.mark.parametrize("d", [BetaDensity(2.5, 4.0), BetaDensity(0.7, 0.6)])
def test_sample_general_beta_mean(d):
    m = 10**5
    xs = sample(d, m, np.random.default_rng(11))
    mean = d.a1 / (d.a1 + d.a2)
    var = d.a1 * d.a2 / ((d.a1 + d.a2) ** 2 * (d.a1 + d.a2 + 1))
    assert abs(xs.mean() - mean) <= 4 * math.sqrt(var / m)


def test_reference_normalizers():
    src = Piece(0.0, 0.5, 1.0, 4.5, 2.0).raw_mass + Piece(0.5, 1.0, 1.0, 5.5, 1.0).raw_mass
    tgt = Piece(0.0, 0.5, 1.0, 1.5, 2.0).raw_mass + Piece(0.5, 1.0, 1.0, 2.0, 1.0).raw_mass
    assert src == pytest.approx(0.005, abs=5e-4)
    assert tgt == pytest.approx(0.172, abs=5e-4)
    quad = adaptive_simpson(lambda x: x**3.5 * (0.5 - x), 0, 0.5, 1e-13) + adaptive_simpson(
        lambda x: (x - 0.5) ** 4.5, 0.5, 1.0, 1e-13
    )
    assert quad == pytest.approx(src, rel=1e-8)


@pytest.mark.parametrize("case", [1, 2])
def test_two_tsp_pair_validates(case):
    source, target = two_tsp_example(case)
    rep = validate_pair(source, target)
    assert rep.ok, str(rep)
    for spec in (source, target):
        assert spec.total_mass() == pytest.approx(1.0, abs=1e-6)
        assert spec.cdf(1.0) == pytest.approx(1.0, abs=1e-12)


def test_inferred_singular_points():
    source, target = two_tsp_example(1)
    s0, s1 = source.singular_points
    assert (s0.location, s0.left_order, s0.right_order) == (0.0, None, 4.5)
    assert (s1.location, s1.left_order, s1.right_order) == (0.5, 2.0, 5.5)
    t0, t1 = target.singular_points
    assert (t0.right_order, t1.left_order, t1.right_order) == (1.5, 2.0, 2.0)


def test_singular_sampling_mass():
    _, target = two_tsp_example(1)
    m = 10**5
    xs = target.sample(m, np.random.default_rng(99))
    exact = target.mass(0.5, 1.0)
    assert exact == pytest.approx(0.125 / 0.172, abs=2e-3)
    assert abs(np.mean(xs >= 0.5) - exact) <= 3 * math.sqrt(exact * (1 - exact) / m)


def test_singular_cdf_against_quadrature():
    source, _ = two_tsp_example(2)
    for x in (0.1, 0.37, 0.5, 0.81):
        oracle = sum(
            adaptive_simpson(lambda t: source.pdf(t), lo, hi, 1e-13)
            for lo, hi in ((0.0, min(x, 0.5)), (0.5, max(x, 0.5)))
        )
        assert source.cdf(x) == pytest.approx(oracle, abs=1e-9)


def test_validate_flags_overlap_and_low_order():
    close = SingularityDensitySpec.from_pieces(
        [Piece(0.0, 0.5, 1.0, 3.0, 2.0), Piece(0.5, 0.6, 1.0, 2.0, 2.0), Piece(0.6, 1.0, 1.0, 2.0, 1.0)], delta=0.1
    )
    assert validate_spec(close).first_failure == "disjointness"
    low = SingularityDensitySpec.from_pieces([Piece(0.0, 1.0, 1.0, 0.5, 1.0)], delta=0.1)
    assert validate_spec(low, role="target").first_failure == "order>=1"


def test_validate_source_must_vanish():
    flat = SingularityDensitySpec.from_pieces([Piece(0.0, 1.0, 1.0, 1.0, 1.0)])
    assert validate_spec(flat, role="target").ok
    bumped = SingularityDensitySpec.from_pieces([Piece(0.0, 1.0, 1.0, 2.0, 1.0)])
    assert validate_spec(bumped, role="source").ok
    bad = SingularityDensitySpec(bumped.pieces, bumped.singular_points, 0.1, 0.0, 0.5, bumped._norm)
    assert validate_spec(bad).first_failure == "upper-envelope"
