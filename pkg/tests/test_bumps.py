import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slp.bumps import bump, bump_scale, holder_split, worst_case_function
from slp.special import adaptive_simpson


def test_bump_shape():
    assert bump(0.5) == pytest.approx(np.exp(-1.0), rel=1e-15)
    assert bump(0.0) == 0.0 and bump(1.0) == 0.0 and bump(-0.3) == 0.0
    u = np.linspace(0, 1, 101)
    np.testing.assert_allclose(bump(u), bump(1 - u), atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_bump_derivatives_match_finite_differences(k):
    u = np.linspace(0.05, 0.95, 37)
    h = 1e-5
    fd = (bump(u + h, k - 1) - bump(u - h, k - 1)) / (2 * h)
    np.testing.assert_allclose(bump(u, k), fd, rtol=1e-5, atol=1e-6 * 10**k)


@pytest.mark.parametrize("beta,expected", [(0.5, (0, 0.5)), (1.0, (0, 1.0)), (1.5, (1, 0.5)), (2.0, (1, 1.0))])
def test_holder_split(beta, expected):
    l, gamma = holder_split(beta)
    assert l == expected[0] and gamma == pytest.approx(expected[1])


def test_single_bump_support_and_sup():
    f = worst_case_function(8, 1, [1], 0.5, 0.7)
    x = np.linspace(0, 1, 4001)
    vals = f(x)
    assert np.all(vals[x > 1 / 8] == 0.0)
    assert np.max(np.abs(vals)) <= 0.7
    assert f.support(1) == (0.0, 0.125)


@pytest.mark.parametrize("beta", [0.5, 0.9, 1.5, 2.0])
def test_squared_integral(beta):
    m, J = 6, 4
    f = worst_case_function(m, J, [1, -1, -1, 1], beta, 1.0)
    expected = J * m ** -(2 * beta + 1) * f.psi_sq_integral()
    assert f.sq_distance() == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("beta", [0.5, 1.5])
def test_one_flip_distance(beta):
    m = 5
    f1 = worst_case_function(m, 5, [1, 1, -1, 1, -1], beta, 1.0)
    f2 = worst_case_function(m, 5, [1, 1, 1, 1, -1], beta, 1.0)
    expected = 4 * m ** -(2 * beta + 1) * f1.psi_sq_integral()
    assert f1.sq_distance(f2) == pytest.approx(expected, rel=1e-9)


def test_psi_sq_integral_quadrature():
    f = worst_case_function(3, 2, [1, 1], 0.5, 1.0)
    raw = adaptive_simpson(lambda u: bump(u) ** 2, 0.0, 1.0, 1e-14)
    assert f.psi_sq_integral() == pytest.approx(f.scale**2 * raw, rel=1e-10)


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.9, 1.0])
def test_holder_condition_low_smoothness(beta, rng):
    kappa = 0.8
    f = worst_case_function(7, 7, list(rng.choice([-1, 1], size=7)), beta, kappa)
    x, y = rng.uniform(size=(2, 10**4))
    assert np.all(np.abs(f(x) - f(y)) <= kappa * np.abs(x - y) ** beta * (1 + 1e-12))
    assert np.max(np.abs(f(np.linspace(0, 1, 5001)))) <= kappa


def finite_difference(f, x, order, h=1e-4):
    if order == 1:
        return (f(x + h) - f(x - h)) / (2 * h)
    if order == 2:
        return (f(x + h) - 2 * f(x) + f(x - h)) / h**2
    raise ValueError(order)


@pytest.mark.parametrize("beta", [1.5, 1.8, 2.5])
def test_holder_condition_high_smoothness(beta, rng):
    kappa = 1.0
    l = int(np.floor(beta))
    f = worst_case_function(4, 4, [1, -1, 1, 1], beta, kappa)
    x, y = rng.uniform(0.001, 0.999, size=(2, 10**4))
    dx, dy = finite_difference(f, x, l), finite_difference(f, y, l)
    bound = kappa * np.abs(x - y) ** (beta - l)
    assert np.all(np.abs(dx - dy) <= 1.05 * bound + 1e-6)
    np.testing.assert_allclose(dx, f.derivative(x, l), atol=1e-4 * np.max(np.abs(dx)))


@given(st.integers(1, 30), st.data())
def test_support_of_each_term(m, data):
    J = data.draw(st.integers(1, m))
    signs = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=J, max_size=J))
    f = worst_case_function(m, J, signs, 0.5, 1.0)
    mids = (np.arange(J) + 0.5) / m
    np.testing.assert_array_equal(np.sign(f(mids)), signs)
    if J < m:
        assert np.all(f(np.linspace(J / m, 1, 50)) == 0.0)


@pytest.mark.parametrize(
    "args",
    [(3, 0, [], 0.5, 1.0), (3, 4, [1, 1, 1, 1], 0.5, 1.0), (3, 2, [1, 0], 0.5, 1.0), (3, 1, [1], -1.0, 1.0)],
)
def test_invalid_arguments(args):
    with pytest.raises(ValueError):
        worst_case_function(*args)


def test_scale_is_cached_and_positive():
    assert bump_scale(0.5, 1.0) == bump_scale(0.5, 1.0) > 0
    assert bump_scale(0.5, 2.0) == pytest.approx(2 * bump_scale(0.5, 1.0))
