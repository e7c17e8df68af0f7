import math

import numpy as np
import pytest

from aplab.grid_core import Grid1D, GridFunction, ParameterError, Window
from aplab.inequality_suite import pointwise as pw
from aplab.inequality_suite.families import refinement_family_spec
from aplab.inequality_suite.reports import FAIL, INCONCLUSIVE, PASS
from aplab.weight_lab import WeightSpec, make_weight
from conftest import gf


def unit(n, i):
    v = np.zeros(n)
    v[i] = 1.0
    return gf(v)


# --- Chebyshev -----------------------------------------------------------------

def test_chebyshev_constant():
    assert pw.check_chebyshev(gf([3.0] * 10), Window(2, 7), 0.4, 2.0).status == PASS


def test_chebyshev_three_cell_example():
    rep = pw.check_chebyshev(gf([3, 1, 2]), Window(0, 2), 0.5, 1.0)
    assert rep.status == PASS
    assert rep.witness["lhs"] == 2.0
    assert rep.witness["rhs"] == pytest.approx(4.0, rel=1e-15)


def test_chebyshev_parameter_checks():
    with pytest.raises(ParameterError):
        pw.check_chebyshev(gf([1.0]), Window(0, 0), 1.0, 2.0)
    with pytest.raises(ParameterError):
        pw.check_chebyshev(gf([1.0]), Window(0, 0), 0.5, 0.5)


# --- splitting and (mla) --------------------------------------------------------

@pytest.mark.parametrize("r,lam", [(2.0, 0.5), (1.5, 0.1), (3.0, 0.9)])
def test_splitting_constant_and_unit_cell(r, lam):
    assert pw.check_prop_splitting(gf([2.0] * 16), r, lam).status == PASS
    rep = pw.check_prop_splitting(unit(33, 16), r, lam)
    assert rep.status == PASS


def test_splitting_unit_cell_closed_form():
    # Mf = 1/(d+1), M_2 f = (1/(d+1))^(1/2): the right side dominates by the first term alone
    n, i = 33, 16
    d = np.abs(np.arange(n) - i)
    rhs_first = 2 * 0.5 ** 0.5 * (1 / (d + 1)) ** 0.5
    assert np.all(1 / (d + 1) <= rhs_first)
    assert pw.check_prop_splitting(unit(n, i), 2.0, 0.5).status == PASS


def test_mla_examples():
    assert pw.check_mla(gf([5.0] * 12), 0.3, 0.7).status == PASS
    rep = pw.check_mla(unit(40, 3), 0.5, 1.0)
    assert rep.status == PASS


# --- f#_delta ---------------------------------------------------------------------

def test_sharp_delta_bound_examples():
    assert pw.sharp_delta_bound_check(gf([2.0] * 8), 0.5).status == PASS
    rep = pw.sharp_delta_bound_check(gf([0.0, 1.0]), 0.5)
    assert rep.status == PASS
    assert rep.witness["lhs"] == 0.25


def test_sharp_delta_bound_spike_counterexample():
    f = unit(4, 3)
    assert pw.sharp_delta_bound_check(f, 0.5, constant=2.0).status == FAIL
    assert pw.sharp_delta_bound_check(f, 0.5, constant=2 ** (1 / 0.5)).status == PASS


def test_sharp_delta_sweep_sparse_needs_triangle_constant():
    assert pw.sweep_sharp_delta(count=40, n=64, kind="sparse").status == FAIL


# --- Coifman-Rochberg, local of maximal, C-F ---------------------------------------------

def test_local_of_maximal_constant():
    rep = pw.check_local_of_maximal(gf([3.0] * 20), 0.5)
    assert rep.status == PASS
    assert rep.witness["C_obs"] == 1.0


def test_local_of_maximal_unit_cell():
    rep = pw.check_local_of_maximal(unit(64, 20), 0.5)
    assert rep.status == PASS
    assert rep.witness["C_obs"] <= 4 * rep.witness["C_CR"]


def test_zero_inputs_are_inconclusive():
    z = gf(np.zeros(10))
    assert pw.check_local_of_maximal(z, 0.5).status == INCONCLUSIVE
    assert pw.coifman_rochberg_ratio(z).status == INCONCLUSIVE
    assert pw.cf_pointwise_check(z).status == INCONCLUSIVE


def test_coifman_rochberg_examples():
    assert pw.coifman_rochberg_ratio(gf([2.0] * 10), 0.5).value == pytest.approx(1.0, rel=1e-9)
    v = pw.coifman_rochberg_ratio(unit(64, 30), 0.5).value
    assert 1.0 <= v < math.inf
    with pytest.raises(ParameterError):
        pw.coifman_rochberg_ratio(unit(8, 1), 1.0)


def test_cf_pointwise_examples():
    for f in (unit(64, 10), gf([1.0] * 32)):
        rep = pw.cf_pointwise_check(f, 0.5)
        assert rep.mode == "record" and math.isfinite(rep.value)
    with pytest.raises(ParameterError):
        pw.cf_pointwise_check(unit(8, 1), 1.5)


def test_stability_studies_on_refinement_family():
    spec = refinement_family_spec(0)
    reps = pw.coifman_rochberg_stability(spec, (64, 128, 256), L=8.0, lam=0.5)
    assert [r.status for r in reps] == [PASS, PASS, PASS]
    assert all(g < 1.10 for g in reps[0].witness["growth"])
    rep = pw.cf_stability(spec, (64, 128, 256), L=8.0)
    assert rep.status == PASS


# --- decay --------------------------------------------------------------------------------

def test_decay_compact_support_reaches_zero():
    g = Grid1D.symmetric(8.0, 256)
    f = GridFunction.indicator(g, g.window_from_interval(-0.5, 0.5))
    rep = pw.decay_check(None, 2.0, f, g.cell_of(0.0), [0.25, 0.5, 1.0, 2.0])
    assert rep.status == PASS
    assert rep.witness["sequence"][-2:] == [0.0, 0.0]


def test_decay_decaying_profile_strictly_decreases():
    g = Grid1D.symmetric(8.0, 256)
    x = g.centers()
    f = GridFunction(g, 1 / (1 + np.abs(x)) ** 2)
    rep = pw.decay_check(None, 2.0, f, g.cell_of(0.0), [1.0, 2.0, 4.0, 6.0])
    assert rep.status == PASS
    seq = rep.witness["sequence"]
    assert all(a > b for a, b in zip(seq, seq[1:]))


def test_decay_escaping_norms_stay_positive_for_compact_weight():
    g = Grid1D.symmetric(8.0, 256)
    w = make_weight(WeightSpec("complement", s=-6.0, t=6.0), g)
    w = w.with_values(1.0 - w.values)  # chi_[-6, 6]
    f = GridFunction(g, 1 / (1 + np.abs(g.centers())) ** 2)
    rep = pw.decay_check(w, 2.0, f, g.cell_of(0.0), [1.0, 2.0, 4.0])
    assert rep.status == PASS
    assert len(rep.witness["escaping_norms"]) == 3
    assert min(rep.witness["escaping_norms"]) > 0


def test_decay_rejects_unsorted_radii():
    f = unit(16, 3)
    with pytest.raises(ParameterError):
        pw.decay_check(None, 2.0, f, 3, [2.0, 1.0])


# --- sweeps ---------------------------------------------------------------------------------

@pytest.mark.parametrize("sweep", [pw.sweep_chebyshev, pw.sweep_splitting, pw.sweep_mla,
                                   pw.sweep_sharp_delta, pw.sweep_local_of_maximal,
                                   pw.hilbert_inequality_sweep])
def test_small_sweeps_pass_and_are_deterministic(sweep):
    a = sweep(count=20, n=64, seed=3)
    assert a.status == PASS
    assert a == sweep(count=20, n=64, seed=3)
