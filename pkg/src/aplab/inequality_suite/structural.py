"""Experiments built from the operators: the lambda_0 search, the W_p ratio,
localization of m_lambda on indicators, the doubling step and the
weight-class coherence table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..grid_core import Grid1D, GridFunction, ParameterError, Window, _check_lambda, lp_w_norm, scale_window
from ..maximal_ops import local_maximal, maximal, sharp_delta
from ..weight_lab import (
    WeightSpec,
    ap_constant,
    cp_estimate,
    doubling_constant,
    make_weight,
    np_integral,
    window_family,
)
from .families import FamilySpec, TestFamily, default_family_spec, make_test_family
from .reports import (
    PASS,
    TOL_ANALYTIC,
    TOL_EXACT,
    CheckReport,
    assert_report,
    inconclusive,
    record_report,
    relative_spread,
)

LAMBDA_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))

A_LAMBDA0 = "||Mf||_X <= 2 ||m_lambda0 f||_X"
A_WP = "||M(Mf)||_{L^p(w)} <= C ||Mf||_{L^p(w)}"
A_LOCALIZATION = "eps^n < lambda0 (1/4 - eps/2)^n => m_lambda0(chi_{eps Q}) <= chi_{Q/2}"
A_SUPPORT_RQ = "((r-1)/2)^n = 1/lambda0 => m_lambda0(chi_Q) <= chi_{rQ}"
A_DOUBLING_STEP = "w(Q) <= (2/eps^n)^p w(Q/2)"
A_FS = "||Mf||_{L^p(w)} <= C ||f#_delta||_{L^p(w)}"
A_COHERENCE = "A_p = W_p intersect C_p (grid-scale implication table)"


@dataclass
class LambdaSearchResult:
    lambdas: list[float]
    worst: list[float]
    witness: list[str]
    lambda0: float | None
    factor: float = 2.0
    params: dict[str, Any] = field(default_factory=dict)
    zero_denominator: list[list[str]] = field(default_factory=list)

    def ratio_at(self, lam: float) -> float:
        return self.worst[self.lambdas.index(lam)]

    @property
    def monotone(self) -> bool:
        """Worst ratio is non-decreasing in lambda, compared exactly."""
        return all(a <= b for a, b in zip(self.worst, self.worst[1:]))

    def to_report(self) -> CheckReport:
        wit = {"lambdas": self.lambdas, "worst": self.worst, "witness": self.witness,
               "lambda0": self.lambda0, "monotone": self.monotone,
               "zero_denominator": self.zero_denominator}
        return record_report("search_lambda0", A_LAMBDA0, self.lambda0, wit, self.params,
                             notes="no lambda0 found" if self.lambda0 is None else f"lambda0 = {self.lambda0}")


def _ratio(num: float, den: float) -> float | None:
    if den > 0:
        return num / den
    if num > 0:
        return math.inf
    return None  # 0/0: member carries no information


def search_lambda0(w: GridFunction, p: float, F: TestFamily, lambdas: Sequence[float] = LAMBDA_GRID,
                   factor: float = 2.0) -> LambdaSearchResult:
    """Worst ||Mf||/||m_lambda f|| in L^p(w) over F for each lambda.

    Returns the smallest lambda whose worst ratio is <= ``factor``, or None.
    The per-lambda worst ratio is also the smallest factor achievable at
    that lambda on this family.
    """
    if len(F) == 0:
        raise ParameterError("empty test family")
    lambdas = [float(l) for l in lambdas]
    for l in lambdas:
        _check_lambda(l)
    Mnorm = [lp_w_norm(maximal(f), w, p) for f in F.members]
    worst, wit, zero = [], [], []
    for lam in lambdas:
        best, lab, z = 0.0, "", []
        for label, f, num in zip(F.labels, F.members, Mnorm):
            r = _ratio(num, lp_w_norm(local_maximal(f, lam), w, p))
            if r is None:
                continue
            if math.isinf(r):
                z.append(label)
            if r > best or not lab:
                best, lab = r, label
        worst.append(best)
        wit.append(lab)
        zero.append(z)
    found = next((l for l, r in zip(lambdas, worst) if r <= factor), None)
    params = {"p": p, "N": w.grid.n, "L": w.grid.radius}
    return LambdaSearchResult(lambdas, worst, wit, found, factor, params, zero)


def wp_ratio(w: GridFunction, p: float, F: TestFamily) -> CheckReport:
    """sup over F of ||M(Mf)||/||Mf|| in L^p(w)."""
    if len(F) == 0:
        raise ParameterError("empty test family")
    best, lab = 0.0, ""
    for label, f in F:
        Mf = maximal(f)
        r = _ratio(lp_w_norm(maximal(Mf), w, p), lp_w_norm(Mf, w, p))
        if r is not None and (r > best or not lab):
            best, lab = r, label
    return record_report("wp_ratio", A_WP, best, {"f": lab},
                         {"p": p, "N": w.grid.n, "L": w.grid.radius})


def localization_condition(lam0: float, eps: float, n_dim: int = 1) -> bool:
    return eps ** n_dim < lam0 * (0.25 - eps / 2) ** n_dim


def default_epsilon(lam0: float, bits: int = 10) -> float:
    """Largest multiple of 2^-bits strictly inside eps < lam0 (1/4 - eps/2)."""
    _check_lambda(lam0)
    bound = lam0 / (4.0 + 2.0 * lam0)
    j = math.ceil(bound * 2 ** bits) - 1
    eps = j / 2 ** bits
    while eps > 0 and not localization_condition(lam0, eps):
        j -= 1
        eps = j / 2 ** bits
    if eps <= 0:
        raise ParameterError(f"no admissible epsilon at resolution 2^-{bits} for lambda0 = {lam0}")
    return eps


def _outside_values(vals: np.ndarray, W: Window) -> np.ndarray:
    mask = np.ones(vals.size, dtype=bool)
    mask[W.lo:W.hi + 1] = False
    return vals[mask]


def _gap_condition(lam0: float, small: Window, big: Window) -> bool:
    # every window through a cell outside `big` that meets `small` in j cells
    # has at least g + j cells, and lam0 (g + j) >= j whenever lam0 g >= (1 - lam0)|small|
    g = min(small.lo - big.lo + 1, big.hi + 1 - small.hi)
    return lam0 * g >= (1.0 - lam0) * small.m


def localization_check(lam0: float, eps: float, Q: Window, grid: Grid1D) -> CheckReport:
    """m_lam0(chi_{eps Q}) vanishes outside Q/2 when eps < lam0 (1/4 - eps/2).

    If the condition fails the values outside Q/2 are only recorded.  If it
    holds but Q has too few cells for the rounded windows to keep the
    margin, the result is inconclusive rather than a failure.
    """
    _check_lambda(lam0)
    n = grid.n
    if not Q.within(n):
        raise ParameterError("Q must lie inside the grid")
    Qe = scale_window(Q, eps, n)
    Qh = scale_window(Q, 0.5, n)
    vals = local_maximal(GridFunction.indicator(grid, Qe), lam0).values
    out = _outside_values(vals, Qh)
    worst = float(out.max()) if out.size else 0.0
    wit = {"Q": Q.as_list(), "epsQ": Qe.as_list(), "halfQ": Qh.as_list(), "max_outside": worst,
           "inside_epsQ": float(vals[Qe.lo:Qe.hi + 1].min())}
    params = {"lambda": lam0, "eps": eps, "N": n, "L": grid.radius}
    if not localization_condition(lam0, eps):
        return record_report("localization", A_LOCALIZATION, worst, wit, params,
                             notes="condition on eps fails; report only")
    if not _gap_condition(lam0, Qe, Qh):
        return inconclusive("localization", A_LOCALIZATION, TOL_EXACT, wit, params,
                            notes="window too coarse for the rounded geometry")
    return assert_report("localization", A_LOCALIZATION, [worst], TOL_EXACT, wit, params, value=worst)


def support_check_rq(lam0: float, Q: Window, grid: Grid1D) -> CheckReport:
    """m_lam0(chi_Q) vanishes outside rQ for r = 1 + 2/lam0."""
    _check_lambda(lam0)
    n = grid.n
    r = 1.0 + 2.0 / lam0
    rQ = scale_window(Q, r, n)
    params = {"lambda": lam0, "r": r, "N": n, "L": grid.radius}
    wit = {"Q": Q.as_list(), "rQ": rQ.as_list(), "clamped": rQ.clamped}
    if rQ.clamped:
        return inconclusive("support_rq", A_SUPPORT_RQ, TOL_EXACT, wit, params, notes="rQ leaves the grid")
    vals = local_maximal(GridFunction.indicator(grid, Q), lam0).values
    out = _outside_values(vals, rQ)
    worst = float(out.max()) if out.size else 0.0
    wit["max_outside"] = worst
    wit["inside_Q"] = float(vals[Q.lo:Q.hi + 1].min())
    return assert_report("support_rq", A_SUPPORT_RQ, [worst], TOL_EXACT, wit, params, value=worst)


def doubling_step_check(w: GridFunction, p: float, lam0: float, eps: float,
                        family: str = "all") -> CheckReport:
    """w(Q) <= (2/eps)^p w(Q/2) on every window of the family."""
    if not localization_condition(lam0, eps):
        raise ParameterError(f"eps = {eps} violates eps < lam0 (1/4 - eps/2) for lam0 = {lam0}")
    n = w.grid.n
    los, his = window_family(n, family)
    m = his - los + 1
    mh = np.ceil(m / 2).astype(np.int64)
    lo2 = (los + his + 1 - mh) // 2
    hi2 = lo2 + mh - 1
    P = np.concatenate([[0.0], np.cumsum(w.values)])
    wQ = P[his + 1] - P[los]
    wH = P[hi2 + 1] - P[lo2]
    bound = (2.0 / eps) ** p
    rhs = bound * wH
    diff = wQ - rhs
    scale = np.maximum(np.abs(wQ), np.abs(rhs))
    margins = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), 0.0)
    i = int(np.argmax(margins))
    wit = {"Q": [int(los[i]), int(his[i])], "halfQ": [int(lo2[i]), int(hi2[i])],
           "wQ": w.grid.h * float(wQ[i]), "wHalfQ": w.grid.h * float(wH[i]), "bound": bound}
    return assert_report("doubling_step", A_DOUBLING_STEP, [float(margins[i])], TOL_ANALYTIC, wit,
                         {"p": p, "lambda": lam0, "eps": eps, "N": n, "L": w.grid.radius})


def fs_inequality_ratio(w: GridFunction, p: float, delta: float, F: TestFamily) -> CheckReport:
    """sup over F of ||Mf|| / ||f#_delta|| in L^p(w); report only.

    Members not supported in the inner half of the domain, or with
    ||f#_delta|| = 0, are skipped and listed in the witness.
    """
    x = w.grid.centers()
    inner = w.grid.measure / 4
    mid = w.grid.origin + w.grid.measure / 2
    best, lab, skipped = 0.0, "", []
    for label, f in F:
        if np.any((f.values != 0) & (np.abs(x - mid) > inner)):
            skipped.append(label)
            continue
        den = lp_w_norm(sharp_delta(f, delta), w, p)
        if den == 0:
            skipped.append(label)
            continue
        r = lp_w_norm(maximal(f), w, p) / den
        if r > best or not lab:
            best, lab = r, label
    params = {"p": p, "delta": delta, "N": w.grid.n, "L": w.grid.radius}
    if not lab:
        return inconclusive("fs_ratio", A_FS, 0.0, {"skipped": skipped}, params, notes="no usable member")
    return record_report("fs_ratio", A_FS, best, {"f": lab, "skipped": skipped}, params)


# ---------------------------------------------------------------------------
# coherence table
# ---------------------------------------------------------------------------

GALLERY = (
    WeightSpec("constant", c=1.0),
    WeightSpec("power", a=0.5),
    WeightSpec("power", a=2.0),
    WeightSpec("vanishing"),
)

AP_STABLE_SPREAD = 0.05
CP_STABLE_SPREAD = 0.10
NP_BOUNDED_GROWTH = 1.5


@dataclass
class CoherenceRow:
    weight: str
    ap: list[float]
    ap_witness: list[list[int] | None]
    cp: list[float]
    np_values: tuple[float, float]
    lambda0: float | None
    lambda_worst: list[float]
    doubling: float
    doubling_witness: list[int] | None
    doubling_step: str | None

    @property
    def ap_finite_stable(self) -> bool:
        return all(math.isfinite(v) for v in self.ap) and relative_spread(self.ap) < AP_STABLE_SPREAD

    @property
    def cp_finite_stable(self) -> bool:
        return all(math.isfinite(v) for v in self.cp) and relative_spread(self.cp) < CP_STABLE_SPREAD

    @property
    def np_growth(self) -> float:
        a, b = self.np_values
        return b / a if a > 0 else math.inf

    @property
    def np_bounded(self) -> bool:
        return self.np_growth < NP_BOUNDED_GROWTH

    @property
    def antecedent(self) -> bool:
        return self.lambda0 is not None and self.cp_finite_stable and self.np_bounded

    def to_dict(self) -> dict:
        return {
            "weight": self.weight, "ap": self.ap, "ap_witness": self.ap_witness, "cp": self.cp,
            "np": list(self.np_values), "np_growth": self.np_growth, "lambda0": self.lambda0,
            "lambda_worst": self.lambda_worst, "doubling": self.doubling,
            "doubling_witness": self.doubling_witness, "doubling_step": self.doubling_step,
            "ap_finite_stable": self.ap_finite_stable, "cp_finite_stable": self.cp_finite_stable,
            "np_bounded": self.np_bounded,
        }


def coherence_row(spec: WeightSpec, p: float = 2.0, ladder=(128, 256, 512), L: float = 8.0,
                  family: FamilySpec | None = None, delta: float = 0.5,
                  lambdas: Sequence[float] = LAMBDA_GRID) -> CoherenceRow:
    family = family or default_family_spec()
    ap, apw, cp = [], [], []
    for N in ladder:
        w = make_weight(spec, Grid1D.symmetric(L, N))
        e = ap_constant(w, p)
        ap.append(e.value)
        apw.append(e.witness.as_list() if e.witness else None)
        cp.append(cp_estimate(w, p, delta).value)
    # growth of the N_p integral when the domain doubles at fixed cell width
    Nf = ladder[-1]
    np_vals = (np_integral(make_weight(spec, Grid1D.symmetric(L, Nf)), p),
               np_integral(make_weight(spec, Grid1D.symmetric(2 * L, 2 * Nf)), p))
    grid = Grid1D.symmetric(L, Nf)
    w = make_weight(spec, grid)
    F = make_test_family(family, grid, w, p)
    res = search_lambda0(w, p, F, lambdas)
    dbl = doubling_constant(w)
    step = None
    if res.lambda0 is not None:
        step = doubling_step_check(w, p, res.lambda0, default_epsilon(res.lambda0)).status
    return CoherenceRow(spec.label, ap, apw, cp, np_vals, res.lambda0, res.worst, dbl.value,
                        dbl.witness.as_list() if dbl.witness else None, step)


def coherence_table(gallery: Sequence[WeightSpec] = GALLERY, p: float = 2.0, ladder=(128, 256, 512),
                    L: float = 8.0, family: FamilySpec | None = None,
                    delta: float = 0.5) -> tuple[list[CoherenceRow], CheckReport]:
    """Implication table: (lambda0 found, C_p stable, N_p bounded) => A_p finite and stable.

    Also requires the doubling step to pass whenever lambda0 was found, and
    an infinite A_p estimate to come with no lambda0.
    """
    rows = [coherence_row(s, p, ladder, L, family, delta) for s in gallery]
    margins, bad = [], []
    for row in rows:
        ok = True
        if row.antecedent and not row.ap_finite_stable:
            ok = False
        if row.lambda0 is not None and row.doubling_step != PASS:
            ok = False
        if any(math.isinf(v) for v in row.ap) and row.lambda0 is not None:
            ok = False
        margins.append(0.0 if ok else 1.0)
        if not ok:
            bad.append(row.weight)
    rep = assert_report("coherence", A_COHERENCE, margins, 0.0,
                        {"rows": [r.to_dict() for r in rows], "violations": bad},
                        {"p": p, "delta": delta, "N": ladder[-1], "L": L})
    return rows, rep
