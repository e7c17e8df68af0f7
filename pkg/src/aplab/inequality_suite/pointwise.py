"""Pointwise inequalities between the maximal-type operators.

Each check compares two grid functions cell by cell and reports the worst
relative excess of the left side over the right side.
"""

from __future__ import annotations

import math

import numpy as np

from ..grid_core import (
    Grid1D,
    GridFunction,
    ParameterError,
    Window,
    _check_lambda,
    lp_w_norm,
    rearrangement_value,
)
from ..maximal_ops import local_maximal, maximal, maximal_at, maximal_r, sharp_delta
from ..singular_ops import hilbert, hilbert_truncated_max
from .families import FamilySpec, make_test_family
from .reports import (
    TOL_ANALYTIC,
    TOL_BISECTION,
    CheckReport,
    assert_report,
    growth_factors,
    inconclusive,
    merge_sweep,
    record_report,
    relative_margin,
)

A_CHEBYSHEV = "(f chi_Q)*(tau|Q|) <= tau^(-1/r) (avg_Q |f|^r)^(1/r)"
A_SPLITTING = "Mf <= r/(r-1) lambda^((r-1)/r) M_r f + m_lambda f"
A_MLA = "m_lambda f <= lambda^(-1/delta) M_delta f"
A_LOCAL_OF_MAXIMAL = "m_lambda(Mf) <= C_lambda Mf, C_lambda <= lambda^-2 C_CR(1/2)"
A_CR = "M_delta(Mf) <= C_delta Mf, delta in (0,1)"
A_CF = "M_r(Hf) <= C_r (H*f + Mf), r in (0,1)"
A_SHARP_DELTA = "f#_delta <= 2 M_delta f"
A_DECAY = "M(f chi_{|x|>R})(x) -> 0 as R -> infinity"


def _params(f: GridFunction, **kw):
    d = {"N": f.grid.n, "L": f.grid.radius}
    d.update(kw)
    return d


def _nonzero(f: GridFunction) -> bool:
    return bool(np.any(f.values != 0))


def check_chebyshev(f: GridFunction, Q: Window, tau: float, r: float, label: str = "") -> CheckReport:
    if not (0 < tau < 1):
        raise ParameterError(f"tau must lie in (0, 1), got {tau}")
    if r < 1:
        raise ParameterError(f"r must be >= 1, got {r}")
    lhs = rearrangement_value(f, Q, tau)
    seg = np.abs(f.values[Q.lo:Q.hi + 1])
    rhs = tau ** (-1.0 / r) * (np.mean(seg ** r)) ** (1.0 / r)
    margin = relative_margin(lhs, rhs)
    return assert_report("chebyshev", A_CHEBYSHEV, margin, TOL_ANALYTIC,
                         {"f": label, "window": Q.as_list(), "lhs": lhs, "rhs": rhs},
                         _params(f, tau=tau, r=r))


def check_prop_splitting(f: GridFunction, r: float, lam: float, label: str = "") -> CheckReport:
    if not r > 1:
        raise ParameterError(f"r must exceed 1, got {r}")
    _check_lambda(lam)
    Mf = maximal(f).values
    rhs = r / (r - 1) * lam ** ((r - 1) / r) * maximal_r(f, r).values + local_maximal(f, lam).values
    margin = relative_margin(Mf, rhs)
    i = int(np.argmax(margin))
    return assert_report("splitting", A_SPLITTING, margin, TOL_BISECTION,
                         {"f": label, "point": i, "lhs": Mf[i], "rhs": rhs[i]},
                         _params(f, r=r, **{"lambda": lam}))


def check_mla(f: GridFunction, lam: float, delta: float, label: str = "") -> CheckReport:
    _check_lambda(lam)
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    lhs = local_maximal(f, lam).values
    rhs = lam ** (-1.0 / delta) * maximal_r(f, delta).values
    margin = relative_margin(lhs, rhs)
    i = int(np.argmax(margin))
    return assert_report("mla", A_MLA, margin, TOL_BISECTION,
                         {"f": label, "point": i, "lhs": lhs[i], "rhs": rhs[i]},
                         _params(f, delta=delta, **{"lambda": lam}))


def _ratio_max(num: np.ndarray, den: np.ndarray):
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.where(num > 0, np.inf, 0.0))
    i = int(np.argmax(q))
    return float(q[i]), i


def coifman_rochberg_value(f: GridFunction, delta: float = 0.5) -> tuple[float, int]:
    """sup_x M_delta(Mf)(x) / Mf(x) and the maximizing cell."""
    Mf = maximal(f)
    return _ratio_max(maximal_r(Mf, delta).values, Mf.values)


def coifman_rochberg_ratio(f: GridFunction, delta: float = 0.5, label: str = "") -> CheckReport:
    if not (0 < delta < 1):
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if not _nonzero(f):
        return inconclusive("coifman_rochberg", A_CR, 0.0, {"f": label}, _params(f, delta=delta),
                            notes="f is identically zero")
    v, i = coifman_rochberg_value(f, delta)
    return record_report("coifman_rochberg", A_CR, v, {"f": label, "point": i}, _params(f, delta=delta))


def check_local_of_maximal(f: GridFunction, lam: float, label: str = "") -> CheckReport:
    """Observed m_lambda(Mf)/Mf against lambda^-2 times the recorded C-R ratio at delta = 1/2."""
    _check_lambda(lam)
    if not _nonzero(f):
        return inconclusive("local_of_maximal", A_LOCAL_OF_MAXIMAL, TOL_BISECTION, {"f": label},
                            _params(f, **{"lambda": lam}), notes="f is identically zero")
    Mf = maximal(f)
    c_obs, i = _ratio_max(local_maximal(Mf, lam).values, Mf.values)
    c_cr, _ = _ratio_max(maximal_r(Mf, 0.5).values, Mf.values)
    bound = lam ** -2 * c_cr
    margin = relative_margin(c_obs, bound)
    return assert_report("local_of_maximal", A_LOCAL_OF_MAXIMAL, margin, TOL_BISECTION,
                         {"f": label, "point": i, "C_obs": c_obs, "C_CR": c_cr, "bound": bound},
                         _params(f, **{"lambda": lam}), value=c_obs)


def sharp_delta_bound_check(f: GridFunction, delta: float, constant: float = 2.0,
                            label: str = "") -> CheckReport:
    """f#_delta <= constant * M_delta f pointwise.

    The triangle inequality only guarantees the constant 2^(1/delta); the
    constant 2 can fail for sparse f (an isolated spike, delta = 1/2).
    """
    lhs = sharp_delta(f, delta).values
    rhs = constant * maximal_r(f, delta).values
    margin = relative_margin(lhs, rhs)
    i = int(np.argmax(margin))
    return assert_report("sharp_delta_bound", A_SHARP_DELTA, margin, TOL_BISECTION,
                         {"f": label, "point": i, "lhs": lhs[i], "rhs": rhs[i], "constant": constant},
                         _params(f, delta=delta))


def cf_pointwise_value(f: GridFunction, r: float = 0.5) -> tuple[float, int]:
    """max_x M_r(Hf)(x) / (H*f(x) + Mf(x))."""
    Hf = hilbert(f)
    num = maximal_r(Hf, r).values
    den = hilbert_truncated_max(f).values + maximal(f).values
    return _ratio_max(num, den)


def cf_pointwise_check(f: GridFunction, r: float = 0.5, label: str = "") -> CheckReport:
    if not (0 < r < 1):
        raise ParameterError(f"r must lie in (0, 1), got {r}")
    if not _nonzero(f):
        return inconclusive("cf_pointwise", A_CF, 0.0, {"f": label}, _params(f, r=r),
                            notes="degenerate denominator")
    v, i = cf_pointwise_value(f, r)
    return record_report("cf_pointwise", A_CF, v, {"f": label, "point": i}, _params(f, r=r))


# ---------------------------------------------------------------------------
# refinement stability of recorded constants
# ---------------------------------------------------------------------------


def _stability_report(name, anchor, ladder, values, max_growth, witness, params):
    g = growth_factors(values)
    margins = [x - (1.0 + max_growth) for x in g]
    wit = {"N": list(ladder), "values": list(values), "growth": g}
    wit.update(witness)
    rep = assert_report(name, anchor, margins, 0.0, wit, params, value=values[-1])
    rep.notes = f"growth per doubling must stay below {max_growth:.0%}"
    return rep


def refinement_constants(spec: FamilySpec, ladder, L: float, fn) -> list[tuple[float, str]]:
    """For each N in ``ladder``: max over the family of fn(member), with the maximizer's label."""
    out = []
    for N in ladder:
        fam = make_test_family(spec, Grid1D.symmetric(L, N))
        best, lab = -math.inf, ""
        for label, f in fam:
            v = fn(f)
            if v > best:
                best, lab = v, label
        out.append((best, lab))
    return out


def coifman_rochberg_stability(spec: FamilySpec, ladder=(128, 256, 512), L: float = 8.0,
                               lam: float = 0.5, max_growth: float = 0.10) -> list[CheckReport]:
    """Refinement study for sup M_{1/2}(Mf)/Mf and sup m_lambda(Mf)/Mf.

    Returns three reports: the two growth assertions and the per-trial
    bound m_lambda(Mf)/Mf <= lambda^-2 C_CR.
    """
    cr_vals, loc_vals, trials = [], [], []
    for N in ladder:
        fam = make_test_family(spec, Grid1D.symmetric(L, N))
        cr_best = loc_best = 0.0
        for label, f in fam:
            rep = check_local_of_maximal(f, lam, label)
            trials.append(rep)
            cr_best = max(cr_best, rep.witness["C_CR"])
            loc_best = max(loc_best, rep.witness["C_obs"])
        cr_vals.append(cr_best)
        loc_vals.append(loc_best)
    params = {"delta": 0.5, "lambda": lam, "L": L, "N": ladder[-1]}
    return [
        _stability_report("coifman_rochberg_stability", A_CR, ladder, cr_vals, max_growth, {}, params),
        _stability_report("local_of_maximal_stability", A_LOCAL_OF_MAXIMAL, ladder, loc_vals,
                          max_growth, {}, params),
        merge_sweep("local_of_maximal", A_LOCAL_OF_MAXIMAL, trials, params),
    ]


def cf_stability(spec: FamilySpec, ladder=(128, 256, 512), L: float = 8.0, r: float = 0.5,
                 max_growth: float = 0.10) -> CheckReport:
    res = refinement_constants(spec, ladder, L, lambda f: cf_pointwise_value(f, r)[0])
    vals = [v for v, _ in res]
    return _stability_report("cf_pointwise_stability", A_CF, ladder, vals, max_growth,
                             {"maximizers": [lab for _, lab in res]}, {"r": r, "L": L, "N": ladder[-1]})


# ---------------------------------------------------------------------------
# decay at infinity and the escaping-mass witness
# ---------------------------------------------------------------------------


def decay_check(w: GridFunction | None, p: float, f: GridFunction, x: int, R_list,
                label: str = "") -> CheckReport:
    """M(f chi_{|.|>R})(x) along increasing R.

    Asserts the sequence is non-increasing and, for compactly supported f,
    exactly 0 once R is past the support.  When ``w`` is compactly
    supported it also evaluates ||M chi_{|.|>=j}||_{L^p(w)} for j in
    R_list: the inputs decrease to 0 while these norms stay positive.
    """
    R = np.asarray(list(R_list), dtype=np.float64)
    if R.size == 0 or np.any(np.diff(R) <= 0):
        raise ParameterError("R_list must be non-empty and strictly increasing")
    xs = f.grid.centers()
    seq = []
    for Rv in R:
        g = f.with_values(np.where(np.abs(xs) > Rv, f.values, 0.0))
        seq.append(maximal_at(g, x))
    seq = np.array(seq)
    margins = list(relative_margin(seq[1:], seq[:-1]))
    nz = np.nonzero(f.values)[0]
    support = float(np.max(np.abs(xs[nz]))) if nz.size else 0.0
    compact = nz.size > 0 and nz.min() > 0 and nz.max() < f.grid.n - 1
    if compact:
        past = R >= support
        margins += [math.inf if v != 0.0 else 0.0 for v in seq[past]]
    wit = {"f": label, "x": int(x), "R": R.tolist(), "sequence": seq.tolist(), "support_radius": support}
    if w is not None:
        wnz = np.nonzero(w.values)[0]
        if wnz.size and wnz.min() > 0 and wnz.max() < w.grid.n - 1:
            norms = []
            for j in R:
                fj = f.with_values((np.abs(xs) >= j).astype(float))
                if not np.any(fj.values):
                    continue
                norms.append(lp_w_norm(maximal(fj), w, p))
            wit["escaping_norms"] = norms
            # positive lower bound while the inputs shrink to 0
            margins += [math.inf if v <= 0 else 0.0 for v in norms]
    return assert_report("decay", A_DECAY, margins, TOL_BISECTION, wit, _params(f, p=p))


# ---------------------------------------------------------------------------
# seeded sweeps
# ---------------------------------------------------------------------------


def random_function(rng, grid: Grid1D, kind: str | None = None) -> GridFunction:
    """Nonnegative random grid function: uniform, sparse, heavy-tailed or smooth."""
    n = grid.n
    kind = kind or ("uniform", "sparse", "heavy", "smooth")[int(rng.integers(0, 4))]
    if kind == "uniform":
        v = rng.random(n) * rng.uniform(0.1, 10.0)
    elif kind == "sparse":
        v = np.zeros(n)
        k = int(rng.integers(1, max(2, n // 16)))
        v[rng.choice(n, size=k, replace=False)] = rng.exponential(size=k)
    elif kind == "heavy":
        v = rng.pareto(1.5, size=n)
    elif kind == "smooth":
        x = np.linspace(-1, 1, n)
        v = np.abs(np.sin(rng.uniform(1, 20) * x + rng.uniform(0, 6))) ** rng.uniform(0.5, 3)
    else:
        raise ParameterError(f"unknown random kind {kind!r}")
    if not np.any(v > 0):
        v[int(rng.integers(0, n))] = 1.0
    return GridFunction(grid, v)


def _random_window(rng, n):
    m = int(rng.integers(1, n + 1))
    lo = int(rng.integers(0, n - m + 1))
    return Window(lo, lo + m - 1)


def sweep_chebyshev(count=500, n=256, seed=0) -> CheckReport:
    rng = np.random.default_rng([seed, 1])
    grid = Grid1D.unit(n)
    reps = []
    for t in range(count):
        f = random_function(rng, grid)
        reps.append(check_chebyshev(f, _random_window(rng, n), float(rng.uniform(0.001, 0.999)),
                                    float(rng.uniform(1.0, 4.0)), f"config#{t}"))
    return merge_sweep("chebyshev", A_CHEBYSHEV, reps, {"N": n, "seed": seed})


def sweep_splitting(count=200, n=256, seed=0) -> CheckReport:
    rng = np.random.default_rng([seed, 2])
    grid = Grid1D.unit(n)
    reps = []
    for t in range(count):
        f = random_function(rng, grid)
        reps.append(check_prop_splitting(f, float(rng.uniform(1.05, 4.0)),
                                         float(rng.uniform(0.01, 0.99)), f"config#{t}"))
    return merge_sweep("splitting", A_SPLITTING, reps, {"N": n, "seed": seed})


def sweep_mla(count=200, n=256, seed=0) -> CheckReport:
    rng = np.random.default_rng([seed, 3])
    grid = Grid1D.unit(n)
    reps = []
    for t in range(count):
        f = random_function(rng, grid)
        reps.append(check_mla(f, float(rng.uniform(0.01, 0.99)), float(rng.uniform(0.1, 2.0)),
                              f"config#{t}"))
    return merge_sweep("mla", A_MLA, reps, {"N": n, "seed": seed})


def sweep_sharp_delta(count=200, n=256, seed=0, kind: str | None = "uniform") -> CheckReport:
    """Uniform random f by default; sparse inputs violate the constant 2 (see the check)."""
    rng = np.random.default_rng([seed, 4])
    grid = Grid1D.unit(n)
    reps = []
    for t in range(count):
        f = random_function(rng, grid, kind)
        reps.append(sharp_delta_bound_check(f, float(rng.uniform(0.05, 1.0)), label=f"config#{t}"))
    return merge_sweep("sharp_delta_bound", A_SHARP_DELTA, reps, {"N": n, "seed": seed})


def sweep_local_of_maximal(count=100, n=256, seed=0) -> CheckReport:
    rng = np.random.default_rng([seed, 5])
    grid = Grid1D.unit(n)
    reps = []
    for t in range(count):
        f = random_function(rng, grid)
        reps.append(check_local_of_maximal(f, float(rng.uniform(0.05, 0.95)), f"config#{t}"))
    return merge_sweep("local_of_maximal", A_LOCAL_OF_MAXIMAL, reps, {"N": n, "seed": seed})


def hilbert_inequality_sweep(count=200, n=256, seed=0) -> CheckReport:
    """||Hf||_2 <= pi ||f||_2 on random signed inputs."""
    rng = np.random.default_rng([seed, 6])
    grid = Grid1D.unit(n)
    margins = []
    for _ in range(count):
        f = GridFunction(grid, rng.standard_normal(n))
        lhs = float(np.linalg.norm(hilbert(f).values))
        rhs = math.pi * float(np.linalg.norm(f.values))
        margins.append(float(relative_margin(lhs, rhs)))
    return assert_report("hilbert_l2", "||Hf||_2 <= pi ||f||_2", margins, TOL_ANALYTIC,
                         None, {"N": n, "seed": seed})

