import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aplab.grid_core import Grid1D, GridFunction, ParameterError, Window
from aplab.maximal_ops import (
    SizeError,
    TruncationLevel,
    local_maximal,
    local_maximal_oracle,
    maximal,
    maximal_at,
    maximal_oracle,
    maximal_r,
    sharp,
    sharp_delta,
    truncate_fN,
)
from conftest import gf

RTOL = 1e-9
nonneg = st.lists(st.floats(0, 50, allow_nan=False), min_size=1, max_size=40)
signed = st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=40)
lams = st.floats(0.01, 0.99)


def brute_maximal(v):
    """Independent oracle: explicit loops over every window."""
    a = np.abs(np.asarray(v, dtype=float))
    n = a.size
    out = np.zeros(n)
    for lo in range(n):
        for hi in range(lo, n):
            out[lo:hi + 1] = np.maximum(out[lo:hi + 1], a[lo:hi + 1].mean())
    return out


# --- M ------------------------------------------------------------------------

def test_maximal_constant():
    np.testing.assert_array_equal(maximal(gf([-3.0] * 7)).values, 3.0)


def test_maximal_two_sided_example():
    # the middle cell sees [0, 2] with average 20/3, more than any one-sided window
    assert maximal(gf([10, 0, 10])).values[1] == pytest.approx(20 / 3, rel=RTOL)
    assert maximal_oracle(gf([10, 0, 10])).values[1] == pytest.approx(20 / 3, rel=1e-15)


@pytest.mark.parametrize("i", [0, 5, 11])
def test_maximal_of_unit_cell(i):
    v = np.zeros(12)
    v[i] = 1.0
    expected = 1.0 / (np.abs(np.arange(12) - i) + 1)
    np.testing.assert_allclose(maximal(gf(v)).values, expected, rtol=RTOL)
    np.testing.assert_allclose(maximal_oracle(gf(v)).values, expected, rtol=1e-15)


def test_maximal_zero():
    np.testing.assert_array_equal(maximal(gf([0.0] * 5)).values, 0.0)
    np.testing.assert_array_equal(maximal_oracle(gf([0.0] * 5)).values, 0.0)


@given(signed)
def test_maximal_agrees_with_brute_force(v):
    ref = brute_maximal(v)
    np.testing.assert_allclose(maximal(gf(v)).values, ref, rtol=RTOL, atol=0)
    np.testing.assert_allclose(maximal_oracle(gf(v)).values, ref, rtol=1e-13, atol=0)


@given(signed)
def test_maximal_dominates_f_and_max(v):
    M = maximal(gf(v)).values
    a = np.abs(np.asarray(v))
    assert np.all(M >= a)
    assert np.all(M <= a.max())


@given(nonneg, st.data())
def test_maximal_sublinear(v, data):
    u = data.draw(st.lists(st.floats(0, 50), min_size=len(v), max_size=len(v)))
    f, g = gf(v), gf(u)
    lhs = maximal(f.with_values(f.values + g.values)).values
    rhs = maximal(f).values + maximal(g).values
    assert np.all(lhs <= rhs * (1 + 3 * RTOL) + 1e-300)


def test_maximal_at_matches_full():
    f = gf(np.random.default_rng(3).random(40))
    M = maximal(f).values
    for x in (0, 17, 39):
        assert maximal_at(f, x) == pytest.approx(M[x], rel=RTOL)


def test_oracle_cap():
    with pytest.raises(SizeError):
        maximal_oracle(gf(np.ones(300)))
    with pytest.raises(SizeError):
        local_maximal_oracle(gf(np.ones(300)), 0.5)


# --- M_r ----------------------------------------------------------------------

def test_maximal_r_one_is_maximal():
    f = gf(np.random.default_rng(4).random(30))
    np.testing.assert_array_equal(maximal_r(f, 1.0).values, maximal(f).values)


def test_maximal_r_unit_cell():
    v = np.zeros(9)
    v[4] = 1.0
    expected = (1.0 / (np.abs(np.arange(9) - 4) + 1)) ** 0.5
    np.testing.assert_allclose(maximal_r(gf(v), 2.0).values, expected, rtol=RTOL)


@pytest.mark.parametrize("r", [0.3, 0.5, 2.0, 3.0])
def test_maximal_r_indicator(r):
    v = np.zeros(20)
    v[5:9] = 1.0
    np.testing.assert_allclose(maximal_r(gf(v), r).values, maximal(gf(v)).values ** (1 / r), rtol=RTOL)


def test_maximal_r_rejects_nonpositive():
    with pytest.raises(ParameterError):
        maximal_r(gf([1.0]), 0.0)


# --- m_lambda -------------------------------------------------------------------

def test_local_maximal_constant():
    np.testing.assert_array_equal(local_maximal(gf([2.0] * 9), 0.4).values, 2.0)


def test_local_maximal_example():
    f = gf([3, 1, 2])
    assert local_maximal_oracle(f, 0.5).values[0] == 3.0
    assert local_maximal(f, 0.5).values[0] == 3.0


@given(signed, lams)
def test_local_maximal_matches_oracle_bitwise(v, lam):
    f = gf(v)
    np.testing.assert_array_equal(local_maximal(f, lam).values, local_maximal_oracle(f, lam).values)


@given(signed, lams)
def test_local_maximal_at_least_f(v, lam):
    assert np.all(local_maximal(gf(v), lam).values >= np.abs(v))


@given(signed, lams, st.floats(0.0, 0.5))
def test_local_maximal_non_increasing_in_lambda(v, lam, d):
    f = gf(v)
    lam2 = min(lam + d, 0.99)
    assert np.all(local_maximal(f, lam2).values <= local_maximal(f, lam).values)


@given(nonneg, lams, st.floats(0.2, 3.0))
def test_local_maximal_bounded_by_power_maximal(v, lam, delta):
    f = gf(v)
    lhs = local_maximal(f, lam).values
    rhs = lam ** (-1 / delta) * maximal_r(f, delta).values
    assert np.all(lhs <= rhs * (1 + 1e-8))


def test_local_maximal_rejects_lambda():
    with pytest.raises(ParameterError):
        local_maximal(gf([1.0, 2.0]), 1.0)


# --- sharp ------------------------------------------------------------------------

def test_sharp_examples():
    np.testing.assert_array_equal(sharp(gf([4.0] * 6)).values, 0.0)
    np.testing.assert_array_equal(sharp(gf([0.0, 1.0])).values, [0.5, 0.5])
    np.testing.assert_array_equal(sharp_delta(gf([0.0, 1.0]), 0.5).values, [0.25, 0.25])


def brute_sharp(v):
    v = np.asarray(v, dtype=float)
    n = v.size
    out = np.zeros(n)
    for lo in range(n):
        for hi in range(lo, n):
            w = v[lo:hi + 1]
            out[lo:hi + 1] = np.maximum(out[lo:hi + 1], np.abs(w - w.mean()).mean())
    return out


@given(signed)
def test_sharp_matches_brute_force(v):
    np.testing.assert_allclose(sharp(gf(v)).values, brute_sharp(v), rtol=1e-12, atol=1e-12)


@given(signed, st.floats(-20, 20))
def test_sharp_translation_invariant(v, c):
    f = gf(v)
    a = sharp(f).values
    b = sharp(f.with_values(f.values + c)).values
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9 * (1 + abs(c)))


@given(signed)
def test_sharp_at_most_twice_maximal(v):
    f = gf(v)
    assert np.all(sharp(f).values <= 2 * maximal_oracle(f).values * (1 + 1e-12))


def test_sharp_delta_one_is_sharp_of_abs():
    f = gf(np.random.default_rng(5).standard_normal(25))
    np.testing.assert_array_equal(sharp_delta(f, 1.0).values, sharp(f.abs()).values)


def test_sharp_delta_rejects_delta():
    with pytest.raises(ParameterError):
        sharp_delta(gf([1.0]), 0.0)
    with pytest.raises(ParameterError):
        sharp_delta(gf([1.0]), 1.5)


def test_sharp_delta_constant_two_fails_for_an_isolated_spike():
    # distance-3 spike, delta = 1/2: the window [0, 3] gives f#_delta / M_delta f = (6/4)^2
    v = np.zeros(4)
    v[3] = 1.0
    f = gf(v)
    ratio = sharp_delta(f, 0.5).values[0] / maximal_r(f, 0.5).values[0]
    assert ratio == pytest.approx(2.25, rel=1e-9)


@given(nonneg, st.floats(0.1, 1.0))
def test_sharp_delta_triangle_constant(v, delta):
    # what the triangle inequality guarantees: f#_delta <= 2^(1/delta) M_delta f
    f = gf(v)
    lhs = sharp_delta(f, delta).values
    rhs = 2 ** (1 / delta) * maximal_r(f, delta).values
    assert np.all(lhs <= rhs * (1 + 1e-8) + 1e-300)


# --- truncation -------------------------------------------------------------------

def test_truncation_examples():
    g = Grid1D.symmetric(3.0, 12)
    f = GridFunction(g, np.linspace(-2, 2, 12))
    np.testing.assert_array_equal(truncate_fN(f, 10.0).values, np.abs(f.values))
    np.testing.assert_array_equal(truncate_fN(f, 1e-9).values, 0.0)
    with pytest.raises(ParameterError):
        TruncationLevel(0.0)


@given(st.floats(0.01, 5), st.floats(0.01, 5))
def test_truncation_monotone(a, b):
    g = Grid1D.symmetric(4.0, 32)
    f = GridFunction(g, np.random.default_rng(6).exponential(size=32))
    lo, hi = sorted((a, b))
    assert np.all(truncate_fN(f, lo).values <= truncate_fN(f, hi).values)


def test_maximal_of_truncations_increases_to_maximal():
    g = Grid1D.symmetric(8.0, 128)
    f = GridFunction(g, np.random.default_rng(7).pareto(1.5, size=128))
    prev = np.zeros(128)
    for N in [0.25 * 2 ** j for j in range(10)]:
        cur = maximal(truncate_fN(f, N)).values
        assert np.all(cur >= prev * (1 - 2e-9))
        prev = cur
    np.testing.assert_allclose(prev, maximal(f).values, rtol=RTOL)
