"""Weight gallery and weight-class constants.

Every estimator is a maximum over a finite window family, so its value is
a lower bound for the corresponding continuum supremum (windows never
leave the grid).  Compare estimates only within one window family; use
refinement ladders (growing N, growing domain) to see divergence.

Each estimate carries its extremal window.  Re-evaluating the witness with
the matching ``*_window`` function reproduces the value bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numba import njit

from .grid_core import (
    CellSet,
    Grid1D,
    GridFunction,
    ParameterError,
    Window,
    _check_window,
    _pairwise_inplace,
    heaviest_subset,
    pairwise_sum,
    read_csv,
    scale_window,
)

FAMILIES = ("all", "dyadic")
DELTA_LADDER = tuple(round(0.1 * i, 1) for i in range(1, 11))
WEIGHT_KINDS = ("constant", "power", "vanishing", "complement", "custom")


@dataclass(frozen=True)
class WeightSpec:
    kind: str
    c: float = 1.0
    a: float = 0.0
    s: float = -1.0
    t: float = 1.0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ParameterError(f"unknown weight kind {self.kind!r}; expected one of {WEIGHT_KINDS}")
        if self.kind == "constant" and self.c < 0:
            raise ParameterError("constant weight must be nonnegative")
        if self.kind == "complement" and not self.s < self.t:
            raise ParameterError("complement weight needs s < t")
        if self.kind == "custom" and not self.path:
            raise ParameterError("custom weight needs a CSV path")

    @property
    def label(self) -> str:
        if self.kind == "constant":
            return f"const({self.c:g})"
        if self.kind == "power":
            return f"|x|^{self.a:g}"
        if self.kind == "vanishing":
            return "chi(|x|>=1)"
        if self.kind == "complement":
            return f"chi(R\\[{self.s:g},{self.t:g}])"
        return f"csv({Path(self.path).name})"

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSpec":
        return cls(**d)


@dataclass
class ConstantEstimate:
    name: str
    value: float
    witness: Window | None
    witness_set: CellSet | None = None
    params: dict[str, Any] = field(default_factory=dict)
    family: str = "all"
    N: int = 0
    L: float = 0.0

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "witness": None if self.witness is None else self.witness.as_list(),
            "witness_set": None if self.witness_set is None else list(self.witness_set.cells),
            "params": dict(self.params),
            "family": self.family,
            "N": self.N,
            "L": self.L,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConstantEstimate":
        wit = None if d["witness"] is None else Window(*d["witness"])
        ws = None if d["witness_set"] is None else CellSet(wit, tuple(d["witness_set"]))
        return cls(d["name"], d["value"], wit, ws, dict(d["params"]), d["family"], d["N"], d["L"])

    def __eq__(self, other):
        if not isinstance(other, ConstantEstimate):
            return NotImplemented
        return self.to_dict() == other.to_dict()


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


def make_weight(spec: WeightSpec, grid: Grid1D) -> GridFunction:
    x = grid.centers()
    if spec.kind == "constant":
        v = np.full(grid.n, float(spec.c))
    elif spec.kind == "power":
        if np.any(x == 0) and spec.a < 0:
            raise ParameterError("power weight with a < 0 evaluated at x = 0")
        v = np.abs(x) ** spec.a
    elif spec.kind == "vanishing":
        v = (np.abs(x) >= 1.0).astype(float)
    elif spec.kind == "complement":
        v = ((x < spec.s) | (x > spec.t)).astype(float)
    else:
        g = read_csv(spec.path)
        if g.grid.n != grid.n:
            raise ParameterError(f"custom weight has {g.grid.n} cells, grid has {grid.n}")
        v = g.values
        if np.any(v < 0):
            raise ParameterError("custom weight has negative values")
    return GridFunction(grid, v)


def dual_weight(w: GridFunction, p: float) -> np.ndarray:
    """sigma = w^(-1/(p-1)); zero cells map to +inf.

    Returned as a raw array because GridFunction values must be finite.
    """
    _check_p(p)
    v = w.values
    with np.errstate(divide="ignore"):
        return np.where(v > 0, v ** (-1.0 / (p - 1.0)), np.inf)


def dual_weight_function(w: GridFunction, p: float) -> GridFunction:
    """Finite dual weight as a GridFunction; rejects weights with zeros."""
    s = dual_weight(w, p)
    if not np.all(np.isfinite(s)):
        raise ParameterError("weight vanishes somewhere; dual weight is infinite")
    return w.with_values(s)


def perturb_weight(w: GridFunction, eps: float) -> GridFunction:
    if eps < 0:
        raise ParameterError(f"epsilon must be >= 0, got {eps}")
    if eps == 0:
        return w
    return w.with_values(w.values + eps)


def np_integral(w: GridFunction, p: float) -> float:
    """h * sum w_i / (1 + |x_i|)^p."""
    x = w.grid.centers()
    return w.grid.h * pairwise_sum(w.values / (1.0 + np.abs(x)) ** p)


def _check_p(p):
    if not p > 1:
        raise ParameterError(f"p must exceed 1, got {p}")


def _check_delta(delta):
    if not (0.0 < delta <= 1.0):
        raise ParameterError(f"delta must lie in (0, 1], got {delta}")


# ---------------------------------------------------------------------------
# window families
# ---------------------------------------------------------------------------


def window_family(n: int, family: str = "all") -> tuple[np.ndarray, np.ndarray]:
    """(lo, hi) arrays; "all" = every window, "dyadic" = lengths 2^j at all positions."""
    if family == "all":
        lo, hi = np.triu_indices(n)
    elif family == "dyadic":
        los, his = [], []
        m = 1
        while m <= n:
            s = np.arange(n - m + 1)
            los.append(s)
            his.append(s + m - 1)
            m *= 2
        lo, hi = np.concatenate(los), np.concatenate(his)
    else:
        raise ParameterError(f"unknown window family {family!r}")
    return np.ascontiguousarray(lo, dtype=np.int64), np.ascontiguousarray(hi, dtype=np.int64)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _prefix_split(w, p):
    # prefix sums of w, of finite sigma and of zero-cell counts
    n = w.size
    Pw = np.zeros(n + 1)
    Ps = np.zeros(n + 1)
    Z = np.zeros(n + 1, dtype=np.int64)
    e = -1.0 / (p - 1.0)
    for i in range(n):
        Pw[i + 1] = Pw[i] + w[i]
        if w[i] > 0:
            Ps[i + 1] = Ps[i] + w[i] ** e
            Z[i + 1] = Z[i]
        else:
            Ps[i + 1] = Ps[i]
            Z[i + 1] = Z[i] + 1
    return Pw, Ps, Z


@njit(cache=True, nogil=True)
def _ap_value(Pw, Ps, Z, lo, hi, p):
    if Z[hi + 1] - Z[lo] > 0:
        return np.inf
    m = hi - lo + 1
    aw = (Pw[hi + 1] - Pw[lo]) / m
    asg = (Ps[hi + 1] - Ps[lo]) / m
    return aw * asg ** (p - 1.0)


@njit(cache=True, nogil=True)
def _am_value(Pw, Ps, Z, lo, hi, p):
    # w(Q)^(1/p) sigma(Q)^(1/p') / |Q|, h cancels
    if Z[hi + 1] - Z[lo] > 0:
        return np.inf
    m = hi - lo + 1
    aw = (Pw[hi + 1] - Pw[lo]) / m
    asg = (Ps[hi + 1] - Ps[lo]) / m
    return aw ** (1.0 / p) * asg ** ((p - 1.0) / p)


@njit(cache=True, nogil=True)
def _sweep_ap(w, p, los, his, which):
    Pw, Ps, Z = _prefix_split(w, p)
    best = -1.0
    arg = -1
    for j in range(los.size):
        if which == 0:
            v = _ap_value(Pw, Ps, Z, los[j], his[j], p)
        else:
            v = _am_value(Pw, Ps, Z, los[j], his[j], p)
        if v > best:
            best = v
            arg = j
            if best == np.inf:
                break
    return best, arg


@njit(cache=True, nogil=True)
def _doubling_sweep(w, los, his, los2, his2, ok):
    P = np.zeros(w.size + 1)
    for i in range(w.size):
        P[i + 1] = P[i] + w[i]
    best = 0.0
    arg = -1
    for j in range(los.size):
        if not ok[j]:
            continue
        a = P[his[j] + 1] - P[los[j]]
        b = P[his2[j] + 1] - P[los2[j]]
        if a > 0:
            v = b / a
        elif b > 0:
            v = np.inf
        else:
            continue
        if v > best:
            best = v
            arg = j
            if best == np.inf:
                break
    return best, arg


@njit(cache=True, nogil=True)
def _mchi_power(m, d, p):
    return (m / (m + d)) ** p


@njit(cache=True, nogil=True)
def _mchi_table(n, p):
    tab = np.empty((n + 1, n))
    for m in range(1, n + 1):
        tab[m, 0] = 1.0
        for d in range(1, n):
            tab[m, d] = _mchi_power(m, d, p)
    return tab


@njit(cache=True, nogil=True)
def _mchi_denominator(w, lo, hi, tab, buf):
    # integral of (M chi_Q)^p w in cell units; M chi_Q = m/(m+d) at distance d
    n = w.size
    m = hi - lo + 1
    for x in range(n):
        if x < lo:
            d = lo - x
        elif x > hi:
            d = x - hi
        else:
            d = 0
        if d == 0:
            buf[x] = w[x]
        else:
            buf[x] = w[x] * tab[m, d]
    return _pairwise_inplace(buf, n)


@njit(cache=True, nogil=True)
def _growth(m, k, delta):
    return (m / k) ** delta


@njit(cache=True, nogil=True)
def _subset_sweep(w, deltas, step_dyadic, use_mchi, p):
    # all windows [a, b] (lengths restricted to powers of two when step_dyadic),
    # keeping a descending-sorted copy by insertion as b grows; for every
    # delta track max over (Q, k) of (sum of k largest)(m/k)^delta / denom
    n = w.size
    nd = deltas.size
    buf = np.empty(n)
    srt = np.empty(n)
    best = np.full(nd, -1.0)
    arg = np.full((nd, 3), -1, dtype=np.int64)
    mtab = _mchi_table(n, p) if use_mchi else np.empty((1, 1))
    tab = np.empty((nd, n + 1, n + 1))
    for t in range(nd):
        for m in range(1, n + 1):
            for k in range(1, m + 1):
                tab[t, m, k] = _growth(m, k, deltas[t])
    for a in range(n):
        cnt = 0
        for b in range(a, n):
            v = w[b]
            j = cnt
            while j > 0 and srt[j - 1] < v:
                srt[j] = srt[j - 1]
                j -= 1
            srt[j] = v
            cnt += 1
            m = cnt
            if step_dyadic and (m & (m - 1)) != 0:
                continue
            if use_mchi:
                denom = _mchi_denominator(w, a, b, mtab, buf)
            else:
                denom = 0.0
                for k in range(m):
                    denom += srt[k]
            if denom <= 0.0:
                continue
            s = 0.0
            for k in range(1, m + 1):
                s += srt[k - 1]
                for t in range(nd):
                    r = s * tab[t, m, k] / denom
                    if r > best[t]:
                        best[t] = r
                        arg[t, 0] = a
                        arg[t, 1] = b
                        arg[t, 2] = k
    return best, arg


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def _meta(w: GridFunction):
    return w.grid.n, w.grid.radius


def ap_window(w: GridFunction, p: float, Q: Window) -> float:
    """avg_Q(w) * avg_Q(sigma)^(p-1) for one window (+inf if w vanishes on Q)."""
    _check_p(p)
    _check_window(Q, w.grid.n)
    Pw, Ps, Z = _prefix_split(np.ascontiguousarray(w.values), float(p))
    return float(_ap_value(Pw, Ps, Z, Q.lo, Q.hi, float(p)))


def ap_constant(w: GridFunction, p: float, family: str = "all") -> ConstantEstimate:
    """[w]_{A_p} over the window family; +inf with witness if some window meets a zero."""
    _check_p(p)
    los, his = window_family(w.grid.n, family)
    best, j = _sweep_ap(np.ascontiguousarray(w.values), float(p), los, his, 0)
    N, L = _meta(w)
    return ConstantEstimate("ap_constant", float(best), Window(int(los[j]), int(his[j])),
                            params={"p": p}, family=family, N=N, L=L)


def am_window(w: GridFunction, p: float, Q: Window) -> float:
    _check_p(p)
    _check_window(Q, w.grid.n)
    Pw, Ps, Z = _prefix_split(np.ascontiguousarray(w.values), float(p))
    return float(_am_value(Pw, Ps, Z, Q.lo, Q.hi, float(p)))


def am_functional(w: GridFunction, p: float, family: str = "all") -> ConstantEstimate:
    """sup_Q ||chi_Q||_{L^p(w)} ||chi_Q||_{L^p'(sigma)} / |Q|, the X = L^p(w) case of
    the chi_Q product functional.  Equals ap_constant^(1/p) window by window."""
    _check_p(p)
    los, his = window_family(w.grid.n, family)
    best, j = _sweep_ap(np.ascontiguousarray(w.values), float(p), los, his, 1)
    N, L = _meta(w)
    return ConstantEstimate("am_functional", float(best), Window(int(los[j]), int(his[j])),
                            params={"p": p}, family=family, N=N, L=L)


def _subset_estimates(name, w, deltas, family, use_mchi, p):
    for d in deltas:
        _check_delta(d)
    vals = np.ascontiguousarray(w.values)
    best, arg = _subset_sweep(vals, np.asarray(deltas, dtype=np.float64), family == "dyadic",
                              use_mchi, float(p))
    N, L = _meta(w)
    out = []
    for t, d in enumerate(deltas):
        params = {"p": p, "delta": d} if use_mchi else {"delta": d}
        a, b, k = (int(v) for v in arg[t])
        if a < 0:
            # every window has zero weight: no information
            out.append(ConstantEstimate(name, 0.0, None, params=params, family=family, N=N, L=L))
            continue
        Q = Window(a, b)
        out.append(ConstantEstimate(name, float(best[t]), Q, heaviest_subset(w, Q, k),
                                    params=params, family=family, N=N, L=L))
    return out


@njit(cache=True, nogil=True)
def _subset_ratio_kernel(vals, lo, hi, k, delta, use_mchi, p):
    m = hi - lo + 1
    srt = np.sort(vals[lo:hi + 1])[::-1]
    if use_mchi:
        denom = _mchi_denominator(vals, lo, hi, _mchi_table(vals.size, p), np.empty(vals.size))
    else:
        denom = 0.0
        for i in range(m):
            denom += srt[i]
    if denom <= 0.0:
        return np.nan
    s = 0.0
    for i in range(k):
        s += srt[i]
    return s * _growth(m, k, delta) / denom


def _subset_ratio(w, Q, k, delta, use_mchi, p):
    _check_window(Q, w.grid.n)
    if not (1 <= k <= Q.m):
        raise ParameterError(f"k must lie in [1, {Q.m}], got {k}")
    return float(_subset_ratio_kernel(np.ascontiguousarray(w.values), Q.lo, Q.hi, int(k),
                                      float(delta), use_mchi, float(p)))


def ainfty_ratio(w: GridFunction, Q: Window, k: int, delta: float) -> float:
    """w(E_k) (m/k)^delta / w(Q) with E_k the k heaviest cells of Q."""
    return _subset_ratio(w, Q, k, delta, False, 2.0)


def cp_ratio(w: GridFunction, p: float, Q: Window, k: int, delta: float) -> float:
    """w(E_k) (m/k)^delta / integral (M chi_Q)^p w."""
    return _subset_ratio(w, Q, k, delta, True, p)


def ainfty_estimate(w: GridFunction, delta: float, family: str = "all") -> ConstantEstimate:
    """max over Q and k of w(E_k)(m/k)^delta / w(Q); zero-weight windows skipped."""
    return _subset_estimates("ainfty_estimate", w, [delta], family, False, 2.0)[0]


def ainfty_ladder(w: GridFunction, deltas=DELTA_LADDER, family: str = "all") -> list[ConstantEstimate]:
    """ainfty_estimate for every delta of the ladder in a single window sweep."""
    return _subset_estimates("ainfty_estimate", w, list(deltas), family, False, 2.0)


def cp_estimate(w: GridFunction, p: float, delta: float, family: str = "all") -> ConstantEstimate:
    """max over Q and k of w(E_k)(m/k)^delta / integral_grid (M chi_Q)^p w.

    M chi_Q is evaluated in closed form, m/(m+d) at cell distance d from Q.
    The integral only covers the grid, so the estimate is biased upward
    relative to the continuum denominator.
    """
    _check_p(p)
    return _subset_estimates("cp_estimate", w, [delta], family, True, p)[0]


def cp_ladder(w: GridFunction, p: float, deltas=DELTA_LADDER, family: str = "all") -> list[ConstantEstimate]:
    """cp_estimate for every delta of the ladder; the denominators are computed once."""
    _check_p(p)
    return _subset_estimates("cp_estimate", w, list(deltas), family, True, p)


def mchi_closed_form(n: int, Q: Window) -> np.ndarray:
    """M chi_Q on an n-cell grid: 1 on Q, m/(m+d) at distance d outside."""
    idx = np.arange(n)
    d = np.where(idx < Q.lo, Q.lo - idx, np.where(idx > Q.hi, idx - Q.hi, 0))
    return Q.m / (Q.m + d)


def doubling_window(w: GridFunction, Q: Window) -> float:
    Q2 = scale_window(Q, 2.0, w.grid.n)
    P = np.concatenate([[0.0], np.cumsum(w.values)])
    a = P[Q.hi + 1] - P[Q.lo]
    b = P[Q2.hi + 1] - P[Q2.lo]
    if a > 0:
        return float(b / a)
    return float("inf") if b > 0 else float("nan")


def doubling_constant(w: GridFunction, family: str = "all") -> ConstantEstimate:
    """max over windows whose double fits in the grid of w(2Q)/w(Q).

    +inf with witness when w(Q) = 0 < w(2Q); windows with w(2Q) = 0 carry
    no information and are skipped.
    """
    n = w.grid.n
    los, his = window_family(n, family)
    m = his - los + 1
    lo2 = (los + his + 1 - 2 * m) // 2
    hi2 = lo2 + 2 * m - 1
    ok = (lo2 >= 0) & (hi2 <= n - 1)
    best, j = _doubling_sweep(np.ascontiguousarray(w.values), los, his,
                              np.maximum(lo2, 0), np.minimum(hi2, n - 1), ok)
    N, L = _meta(w)
    wit = None if j < 0 else Window(int(los[j]), int(his[j]))
    return ConstantEstimate("doubling_constant", float(best), wit, family=family, N=N, L=L)
