import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aplab.grid_core import Grid1D, GridFunction, ParameterError, Window, write_csv
from aplab.maximal_ops import maximal_oracle
from aplab.weight_lab import (
    WeightSpec,
    ainfty_estimate,
    ainfty_ladder,
    ainfty_ratio,
    am_functional,
    am_window,
    ap_constant,
    ap_window,
    cp_estimate,
    cp_ladder,
    cp_ratio,
    doubling_constant,
    doubling_window,
    dual_weight,
    dual_weight_function,
    make_weight,
    mchi_closed_form,
    np_integral,
    perturb_weight,
    window_family,
)
from conftest import gf

positive = st.lists(st.floats(0.01, 100), min_size=1, max_size=24)
ps = st.sampled_from([1.5, 2.0, 3.0, 4.5])


def brute_ap(v, p):
    v = np.asarray(v, dtype=float)
    best = 0.0
    for lo in range(v.size):
        for hi in range(lo, v.size):
            w = v[lo:hi + 1]
            best = max(best, w.mean() * np.mean(w ** (-1 / (p - 1))) ** (p - 1))
    return best


def brute_subset(v, delta, denominators):
    """max over windows and every subset E (not just the heaviest)."""
    v = np.asarray(v, dtype=float)
    best = 0.0
    for lo in range(v.size):
        for hi in range(lo, v.size):
            m = hi - lo + 1
            den = denominators(lo, hi)
            if den <= 0:
                continue
            for k in range(1, m + 1):
                for E in itertools.combinations(range(lo, hi + 1), k):
                    best = max(best, v[list(E)].sum() * (m / k) ** delta / den)
    return best


# --- gallery --------------------------------------------------------------------

def test_make_weight_examples():
    g = Grid1D.symmetric(2.0, 16)
    np.testing.assert_array_equal(make_weight(WeightSpec("constant", c=1.0), g).values, 1.0)
    np.testing.assert_array_equal(make_weight(WeightSpec("power", a=0.0), g).values, 1.0)
    w = make_weight(WeightSpec("vanishing"), g).values
    x = g.centers()
    np.testing.assert_array_equal(w, (np.abs(x) >= 1).astype(float))
    assert np.all(w[np.abs(x) < 1] == 0)


def test_complement_weight():
    g = Grid1D.symmetric(2.0, 8)
    w = make_weight(WeightSpec("complement", s=-0.5, t=1.0), g).values
    np.testing.assert_array_equal(w, [1, 1, 1, 0, 0, 0, 1, 1])


def test_custom_weight(tmp_path):
    g = Grid1D.unit(4)
    p = tmp_path / "w.csv"
    write_csv(GridFunction(g, [1, 2, 3, 4]), p)
    np.testing.assert_array_equal(make_weight(WeightSpec("custom", path=str(p)), g).values, [1, 2, 3, 4])
    write_csv(GridFunction(g, [1, -2, 3, 4]), p)
    with pytest.raises(ParameterError):
        make_weight(WeightSpec("custom", path=str(p)), g)


def test_weight_spec_validation():
    with pytest.raises(ParameterError):
        WeightSpec("triangle")
    with pytest.raises(ParameterError):
        WeightSpec("constant", c=-1.0)
    with pytest.raises(ParameterError):
        WeightSpec("complement", s=1.0, t=0.0)


def test_dual_weight_examples():
    np.testing.assert_array_equal(dual_weight(gf([1, 4]), 2.0), [1.0, 0.25])
    np.testing.assert_array_equal(dual_weight(gf([1, 1, 1]), 3.0), 1.0)
    assert np.isinf(dual_weight(gf([0, 1]), 2.0)[0])
    with pytest.raises(ParameterError):
        dual_weight_function(gf([0, 1]), 2.0)
    with pytest.raises(ParameterError):
        dual_weight(gf([1.0]), 1.0)


# --- A_p ------------------------------------------------------------------------

@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_ap_constant_weight(p):
    assert ap_constant(gf([1.0] * 64), p).value == 1.0
    # other constants pick up prefix-sum rounding
    assert ap_constant(gf([2.5] * 20), p).value == pytest.approx(1.0, rel=1e-12)


def test_ap_two_cell_example():
    e = ap_constant(gf([1, 4]), 2.0)
    assert e.value == pytest.approx(1.5625, abs=1e-12)
    assert e.witness == Window(0, 1)
    assert ap_window(gf([1, 4]), 2.0, e.witness) == e.value


def test_ap_infinite_with_zero_cell():
    w = make_weight(WeightSpec("vanishing"), Grid1D.symmetric(4.0, 64))
    e = ap_constant(w, 2.0)
    assert e.infinite
    assert np.any(w.values[e.witness.lo:e.witness.hi + 1] == 0)
    assert ap_window(w, 2.0, e.witness) == math.inf


@given(positive, ps)
def test_ap_matches_brute_force(v, p):
    assert ap_constant(gf(v), p).value == pytest.approx(brute_ap(v, p), rel=1e-12)


@given(positive, ps)
def test_ap_at_least_one_and_witness_reproduces(v, p):
    e = ap_constant(gf(v), p)
    assert e.value >= 1.0 - 1e-12
    assert ap_window(gf(v), p, e.witness) == e.value


@given(positive, ps, st.floats(0.01, 100))
def test_ap_scale_invariant(v, p, c):
    a = ap_constant(gf(v), p).value
    b = ap_constant(gf(np.asarray(v) * c), p).value
    assert b == pytest.approx(a, rel=1e-12)


@given(positive, ps)
def test_ap_duality(v, p):
    w = gf(v)
    q = p / (p - 1)
    s = dual_weight_function(w, p)
    assert ap_constant(s, q).value == pytest.approx(ap_constant(w, p).value ** (q - 1), rel=1e-9)


def test_dyadic_family_is_a_subfamily():
    w = make_weight(WeightSpec("power", a=1.5), Grid1D.symmetric(4.0, 100))
    assert ap_constant(w, 2.0, "dyadic").value <= ap_constant(w, 2.0, "all").value
    lo, hi = window_family(100, "dyadic")
    assert set(np.unique(hi - lo + 1)) == {1, 2, 4, 8, 16, 32, 64}
    with pytest.raises(ParameterError):
        window_family(10, "random")


# --- (am) functional ----------------------------------------------------------------

def test_am_examples():
    assert am_functional(gf([1.0] * 9), 2.0).value == 1.0
    assert am_functional(gf([1, 4]), 2.0).value == pytest.approx(1.25, abs=1e-12)


@given(positive, ps)
def test_am_is_ap_root_window_by_window(v, p):
    w = gf(v)
    for lo, hi in zip(*window_family(len(v))):
        Q = Window(int(lo), int(hi))
        assert am_window(w, p, Q) == pytest.approx(ap_window(w, p, Q) ** (1 / p), rel=1e-12)


@given(positive, ps, st.floats(0.01, 100))
def test_am_scale_invariant(v, p, c):
    a = am_functional(gf(v), p).value
    assert am_functional(gf(np.asarray(v) * c), p).value == pytest.approx(a, rel=1e-12)


# --- A_infty and C_p -----------------------------------------------------------------

def test_ainfty_examples():
    assert ainfty_estimate(gf([1.0] * 12), 1.0).value == pytest.approx(1.0, rel=1e-15)
    assert ainfty_ratio(gf([4, 1, 1, 1]), Window(0, 3), 1, 1.0) == pytest.approx(16 / 7, rel=1e-15)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=7), st.sampled_from([0.3, 0.5, 1.0]))
def test_ainfty_matches_subset_enumeration(v, delta):
    ref = brute_subset(v, delta, lambda lo, hi: float(np.sum(v[lo:hi + 1])))
    assert ainfty_estimate(gf(v), delta).value == pytest.approx(ref, rel=1e-12)


def test_ainfty_non_decreasing_in_delta():
    w = make_weight(WeightSpec("power", a=2.0), Grid1D.symmetric(4.0, 64))
    vals = [e.value for e in ainfty_ladder(w)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_ladder_matches_single_delta():
    w = gf(np.random.default_rng(2).random(40))
    for e in cp_ladder(w, 2.0, [0.2, 0.7]):
        assert e == cp_estimate(w, 2.0, e.params["delta"])


@pytest.mark.parametrize("n,Q", [(12, Window(0, 0)), (12, Window(3, 6)), (20, Window(15, 19))])
def test_mchi_closed_form_matches_maximal(n, Q):
    chi = GridFunction.indicator(Grid1D.unit(n), Q)
    np.testing.assert_allclose(mchi_closed_form(n, Q), maximal_oracle(chi).values, rtol=1e-15)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=6), st.sampled_from([0.5, 1.0]))
def test_cp_matches_subset_enumeration(v, delta):
    n = len(v)
    w = np.asarray(v)

    def den(lo, hi):
        return float(np.sum(mchi_closed_form(n, Window(lo, hi)) ** 2 * w))

    assert cp_estimate(gf(v), 2.0, delta).value == pytest.approx(brute_subset(v, delta, den), rel=1e-12)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=24), st.sampled_from([0.1, 0.5, 1.0]), ps)
def test_cp_below_ainfty(v, delta, p):
    w = gf(v)
    assert cp_estimate(w, p, delta).value <= ainfty_estimate(w, delta).value * (1 + 1e-12)


def test_cp_constant_weight_at_most_one():
    for e in cp_ladder(gf([3.0] * 40), 2.0):
        assert e.value <= 1.0 + 1e-12


def test_cp_witness_reproduces():
    w = make_weight(WeightSpec("power", a=0.5), Grid1D.symmetric(8.0, 128))
    for e in cp_ladder(w, 2.0, [0.3, 1.0]):
        k = len(e.witness_set)
        assert cp_ratio(w, 2.0, e.witness, k, e.params["delta"]) == e.value


def test_cp_finite_for_vanishing_weight_where_ap_is_infinite():
    w = make_weight(WeightSpec("vanishing"), Grid1D.symmetric(8.0, 512))
    e = cp_estimate(w, 2.0, 0.5)
    assert math.isfinite(e.value) and e.witness is not None
    assert ap_constant(w, 2.0).infinite


def test_cp_rejects_parameters():
    with pytest.raises(ParameterError):
        cp_estimate(gf([1.0]), 1.0, 0.5)
    with pytest.raises(ParameterError):
        ainfty_estimate(gf([1.0]), 0.0)


# --- doubling ------------------------------------------------------------------------

def test_doubling_constant_weight():
    w = gf([1.0] * 30)
    e = doubling_constant(w)
    assert e.value == 2.0
    assert doubling_window(w, Window(10, 12)) == 2.0


def test_doubling_vanishing_weight_infinite_with_witness():
    g = Grid1D.symmetric(4.0, 128)
    w = make_weight(WeightSpec("vanishing"), g)
    Q = g.window_from_interval(-1.0, -0.5)
    assert doubling_window(w, Q) == math.inf
    e = doubling_constant(w)
    assert e.infinite
    assert doubling_window(w, e.witness) == math.inf


def test_doubling_power_weight_stable_under_refinement():
    vals = [doubling_constant(make_weight(WeightSpec("power", a=2.0), Grid1D.symmetric(8.0, N))).value
            for N in (128, 256, 512)]
    assert all(abs(b / a - 1) < 0.10 for a, b in zip(vals, vals[1:]))


def test_ap_finite_implies_doubling_finite():
    g = Grid1D.symmetric(8.0, 256)
    for spec in (WeightSpec("constant"), WeightSpec("power", a=0.5), WeightSpec("power", a=2.0),
                 WeightSpec("vanishing"), WeightSpec("complement", s=-1.0, t=1.0)):
        w = make_weight(spec, g)
        if math.isfinite(ap_constant(w, 2.0).value):
            assert math.isfinite(doubling_constant(w).value)


# --- N_p and perturbation --------------------------------------------------------------

def test_np_integral_examples():
    g = Grid1D.symmetric(10.0, 20000)
    assert np_integral(GridFunction(g, np.zeros(g.n)), 2.0) == 0.0
    assert np_integral(GridFunction(g, np.ones(g.n)), 2.0) == pytest.approx(20 / 11, rel=0.01)


def test_np_integral_grows_for_square_weight():
    spec = WeightSpec("power", a=2.0)
    a = np_integral(make_weight(spec, Grid1D.symmetric(8.0, 512)), 2.0)
    b = np_integral(make_weight(spec, Grid1D.symmetric(16.0, 1024)), 2.0)
    assert b / a >= 1.8


def test_perturb_weight():
    w = make_weight(WeightSpec("vanishing"), Grid1D.symmetric(4.0, 64))
    assert perturb_weight(w, 0.0) is w
    assert math.isfinite(ap_constant(perturb_weight(w, 0.1), 2.0).value)
    with pytest.raises(ParameterError):
        perturb_weight(w, -1.0)


def test_perturbation_limit_is_monotone():
    w = make_weight(WeightSpec("vanishing"), Grid1D.symmetric(4.0, 64))
    vals = [ap_constant(perturb_weight(w, 10.0 ** -j), 2.0).value for j in range(1, 7)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    # [w + eps]_{A_2} ~ 1/eps on a window meeting the zero set
    assert vals[-1] > 1e4


def test_estimate_serialization_round_trip():
    from aplab.weight_lab import ConstantEstimate

    w = gf(np.random.default_rng(9).random(16))
    for e in [ap_constant(w, 2.0), cp_estimate(w, 2.0, 0.5), doubling_constant(w)]:
        assert ConstantEstimate.from_dict(e.to_dict()) == e
