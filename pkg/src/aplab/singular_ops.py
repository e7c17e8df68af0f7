"""Discrete Hilbert transform, its maximal truncation, and non-degeneracy checks.

The kernel is K(t) = 1/t at cell-center differences with the diagonal
omitted, so Hf(x_i) = h * sum_{j != i} f_j / (x_i - x_j) = sum_{j != i} f_j / (i - j).
Terms are grouped by distance d = |i - j| as (f_{i-d} - f_{i+d}) / d; this
makes the transform of a mirror-symmetric input exactly antisymmetric.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numba import njit

from .grid_core import Grid1D, GridFunction, ParameterError, Window, _pairwise_inplace

log = logging.getLogger(__name__)

KERNEL_LOWER_BOUND = 1.0


@dataclass(frozen=True)
class KernelModel:
    """K(t) = 1/t in one dimension; |K(t)| |t| = 1 for every t != 0."""

    c_K: float = KERNEL_LOWER_BOUND

    @staticmethod
    def K(t):
        return 1.0 / np.asarray(t, dtype=np.float64)


@dataclass
class NondegeneracyReport:
    mode: str
    C: float
    trials: int
    skipped: int
    worst_ratio: float
    witness: dict[str, Any] = field(default_factory=dict)
    worst_ratio_cond2: float | None = None
    witness_cond2: dict[str, Any] = field(default_factory=dict)
    per_trial: list[tuple[float, ...]] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        ok = self.worst_ratio <= self.C
        if self.worst_ratio_cond2 is not None:
            ok = ok and self.worst_ratio_cond2 <= self.C
        return ok


@njit(cache=True, nogil=True)
def _distance_terms(f, i, buf):
    n = f.size
    for d in range(1, n):
        left = f[i - d] if i - d >= 0 else 0.0
        right = f[i + d] if i + d < n else 0.0
        buf[d - 1] = (left - right) / d


@njit(cache=True, nogil=True)
def _hilbert_kernel(f):
    n = f.size
    out = np.zeros(n)
    if n < 2:
        return out
    buf = np.empty(n - 1)
    for i in range(n):
        _distance_terms(f, i, buf)
        out[i] = _pairwise_inplace(buf, n - 1)
    return out


@njit(cache=True, nogil=True)
def _hilbert_max_kernel(f, hf):
    n = f.size
    out = np.abs(hf)
    if n < 2:
        return out
    buf = np.empty(n - 1)
    for i in range(n):
        _distance_terms(f, i, buf)
        tail = 0.0
        for d in range(n - 1, 0, -1):
            tail += buf[d - 1]
            if abs(tail) > out[i]:
                out[i] = abs(tail)
    return out


def hilbert(f: GridFunction) -> GridFunction:
    """Hf(x_i) = sum_{j != i} f_j / (i - j), each cell summed by a fixed pairwise tree."""
    return f.with_values(_hilbert_kernel(np.ascontiguousarray(f.values)))


def hilbert_truncated_max(f: GridFunction) -> GridFunction:
    """H*f(x_i) = max over k >= 1 of |sum_{|i-j| >= k} f_j / (i - j)|.

    The full sum (k = 1) enters as |Hf| itself, so H*f >= |Hf| holds exactly.
    """
    v = np.ascontiguousarray(f.values)
    return f.with_values(_hilbert_max_kernel(v, _hilbert_kernel(v)))


def hilbert_matrix(n: int) -> np.ndarray:
    """Dense matrix with entries 1/(i - j) off the diagonal."""
    i = np.arange(n)
    d = (i[:, None] - i[None, :]).astype(float)
    with np.errstate(divide="ignore"):
        A = np.where(d != 0, 1.0 / d, 0.0)
    return A


# ---------------------------------------------------------------------------
# non-degeneracy
# ---------------------------------------------------------------------------


def _random_trial(rng, n, max_len):
    m = int(rng.integers(1, max_len + 1))
    lo = int(rng.integers(0, n - m + 1))
    Q = Window(lo, lo + m - 1)
    f = np.zeros(n)
    kind = rng.integers(0, 3)
    if kind == 0:
        f[Q.lo:Q.hi + 1] = rng.random(m)
    elif kind == 1:
        f[Q.lo:Q.hi + 1] = 1.0
    else:
        f[Q.lo + int(rng.integers(0, m))] = rng.exponential()
    return Q, f


def _shifted_cells(Q: Window, n: int):
    m = Q.m
    cells = []
    for s in (m, -m):
        lo, hi = Q.lo + s, Q.hi + s
        lo, hi = max(lo, 0), min(hi, n - 1)
        if lo <= hi:
            cells.extend(range(lo, hi + 1))
    return np.array(sorted(set(cells)), dtype=np.int64)


def _ratio(avg, hval):
    if avg == 0.0:
        return 0.0
    if hval == 0.0:
        return np.inf
    return avg / hval


def _worst_over(cells, avg, H):
    worst, wx = 0.0, None
    for x in cells:
        r = _ratio(avg, abs(H[x]))
        if wx is None or r > worst:
            worst, wx = r, int(x)
    return worst, wx


def nondegeneracy_check_shifted(C: float = 2.0, trials: int = 50, rng_seed: int = 0,
                                n: int = 512, max_len: int | None = None) -> NondegeneracyReport:
    """Shifted-window non-degeneracy of H with x_l = l (one window length).

    For random Q and nonnegative f supported in Q, checks
    avg_Q f <= C |H(f chi_Q)(x)| at every grid cell of (Q + l) u (Q - l).
    Trials with both shifts off the grid are skipped and logged.
    """
    if not C > 0:
        raise ParameterError("C must be positive")
    rng = np.random.default_rng(rng_seed)
    grid = Grid1D.unit(n)
    max_len = max_len or max(1, n // 4)
    worst, wit, skipped = 0.0, {}, 0
    per_trial = []
    for t in range(trials):
        Q, f = _random_trial(rng, n, max_len)
        cells = _shifted_cells(Q, n)
        if cells.size == 0:
            skipped += 1
            log.info("trial %d skipped: both shifts of [%d, %d] are off the grid", t, Q.lo, Q.hi)
            continue
        avg = f[Q.lo:Q.hi + 1].sum() / Q.m
        H = hilbert(GridFunction(grid, f)).values
        r, x = _worst_over(cells, avg, H)
        per_trial.append((r,))
        if r >= worst:
            worst, wit = r, {"trial": t, "Q": Q.as_list(), "x": x, "avg": avg}
    return NondegeneracyReport("shifted", C, trials, skipped, worst, wit, per_trial=per_trial)


def nondegeneracy_check_paired(C: float = 2.0, trials: int = 50, rng_seed: int = 0,
                               n: int = 512, max_len: int | None = None) -> NondegeneracyReport:
    """Paired-window non-degeneracy of H with Q' = Q + l (Q - l if that is off the grid).

    cond1: avg_Q f <= C |H(f chi_Q)(x)| for x in Q';
    cond2: 1 <= C |H(chi_Q')(x)| for x in Q.
    Uses the same random trials as :func:`nondegeneracy_check_shifted` for a given seed.
    """
    if not C > 0:
        raise ParameterError("C must be positive")
    rng = np.random.default_rng(rng_seed)
    grid = Grid1D.unit(n)
    max_len = max_len or max(1, n // 4)
    w1, wit1, w2, wit2, skipped = 0.0, {}, 0.0, {}, 0
    per_trial = []
    for t in range(trials):
        Q, f = _random_trial(rng, n, max_len)
        m = Q.m
        if Q.hi + m <= n - 1:
            Qp = Window(Q.lo + m, Q.hi + m)
        elif Q.lo - m >= 0:
            Qp = Window(Q.lo - m, Q.hi - m)
        else:
            skipped += 1
            log.info("trial %d skipped: no paired window for [%d, %d]", t, Q.lo, Q.hi)
            continue
        avg = f[Q.lo:Q.hi + 1].sum() / m
        H = hilbert(GridFunction(grid, f)).values
        r1, x1 = _worst_over(Qp.cells(), avg, H)
        Hp = hilbert(GridFunction.indicator(grid, Qp)).values
        r2, x2 = _worst_over(Q.cells(), 1.0, Hp)
        per_trial.append((r1, r2))
        if r1 >= w1:
            w1, wit1 = r1, {"trial": t, "Q": Q.as_list(), "Qp": Qp.as_list(), "x": x1, "avg": avg}
        if r2 >= w2:
            w2, wit2 = r2, {"trial": t, "Q": Q.as_list(), "Qp": Qp.as_list(), "x": x2}
    return NondegeneracyReport("paired", C, trials, skipped, w1, wit1, w2, wit2, per_trial=per_trial)
