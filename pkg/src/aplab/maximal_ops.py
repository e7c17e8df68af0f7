"""Maximal-type operators on grid functions: M, M_r, m_lambda, f#, f#_delta.

``maximal`` and ``local_maximal`` are the fast paths; ``maximal_oracle``
and ``local_maximal_oracle`` enumerate every window and are meant for
cross-checking on small grids.

Averages over windows always use the uncentered, all-windows definition:
the value at cell x is the maximum over every window containing x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .grid_core import (
    GridFunction,
    ParameterError,
    _check_lambda,
    order_index,
)

ORACLE_CAP = 256
BISECTION_MAX_ITER = 60
BISECTION_RTOL = 1e-9


class SizeError(ValueError):
    """Grid too large for an exhaustive oracle."""


@dataclass(frozen=True)
class TruncationLevel:
    level: float

    def __post_init__(self):
        if not self.level > 0:
            raise ParameterError(f"truncation level must be positive, got {self.level}")


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _prefix(a):
    P = np.zeros(a.size + 1)
    s = 0.0
    for i in range(a.size):
        s += a[i]
        P[i + 1] = s
    return P


@njit(cache=True, nogil=True)
def _feasible(P, x, t):
    # best window [ia, ib] containing x for sum(a - t); sum >= 0 means avg >= t
    n = P.size - 1
    best_hi = -np.inf
    ib = x
    for b in range(x, n):
        v = P[b + 1] - t * (b + 1)
        if v > best_hi:
            best_hi = v
            ib = b
    best_lo = np.inf
    ia = x
    for a in range(0, x + 1):
        v = P[a] - t * a
        if v < best_lo:
            best_lo = v
            ia = a
    return best_hi - best_lo >= 0.0, ia, ib


@njit(cache=True, nogil=True)
def _maximal_at(a, P, top, x, rtol, max_iter):
    lo = a[x]
    hi = top
    if hi <= lo:
        return lo
    ok, ia, ib = _feasible(P, x, hi)
    if ok:
        return hi
    best = lo
    for _ in range(max_iter):
        if hi - lo <= 0.5 * rtol * lo:
            break
        mid = 0.5 * (lo + hi)
        ok, ia, ib = _feasible(P, x, mid)
        if ok:
            lo = mid
            avg = (P[ib + 1] - P[ia]) / (ib - ia + 1)
            if avg > best:
                best = avg
        else:
            hi = mid
    # report an achieved window average, kept inside the final bracket
    if lo > best:
        best = lo
    if best > top:
        best = top
    return best


@njit(cache=True, nogil=True)
def _maximal_kernel(a, rtol, max_iter):
    n = a.size
    out = np.zeros(n)
    top = 0.0
    for i in range(n):
        if a[i] > top:
            top = a[i]
    if top == 0.0:
        return out
    P = _prefix(a)
    for x in range(n):
        out[x] = _maximal_at(a, P, top, x, rtol, max_iter)
    return out


@njit(cache=True, nogil=True)
def _propagate_upper(V):
    # V[a, b] holds a value for window [a, b]; out[x] = max over a <= x <= b
    n = V.shape[0]
    out = np.full(n, -np.inf)
    for a in range(n):
        run = -np.inf
        for b in range(n - 1, a - 1, -1):
            if V[a, b] > run:
                run = V[a, b]
            if run > out[b]:
                out[b] = run
    return out


@njit(cache=True, nogil=True)
def _fenwick_add(tree, i, d):
    i += 1
    n = tree.size - 1
    while i <= n:
        tree[i] += d
        i += i & (-i)


@njit(cache=True, nogil=True)
def _fenwick_select(tree, k, logn):
    # smallest position whose prefix count reaches k (k is 1-based)
    pos = 0
    step = logn
    n = tree.size - 1
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] < k:
            pos = nxt
            k -= tree[nxt]
        step >>= 1
    return pos


@njit(cache=True, nogil=True)
def _local_maximal_kernel(a, lam):
    n = a.size
    # rank 0 = largest value; ties broken by lower cell index
    order = np.argsort(-a, kind="mergesort")
    rank = np.empty(n, dtype=np.int64)
    for r in range(n):
        rank[order[r]] = r
    logn = 1
    while logn * 2 <= n:
        logn *= 2
    out = np.zeros(n)
    V = np.empty(n)
    dq = np.empty(n, dtype=np.int64)
    tree = np.zeros(n + 1, dtype=np.int64)
    for m in range(1, n + 1):
        k = order_index(lam, m)
        nstarts = n - m + 1
        if k >= m:
            for s in range(nstarts):
                V[s] = 0.0
        else:
            tree[:] = 0
            for i in range(m):
                _fenwick_add(tree, rank[i], 1)
            for s in range(nstarts):
                if s > 0:
                    _fenwick_add(tree, rank[s - 1], -1)
                    _fenwick_add(tree, rank[s + m - 1], 1)
                V[s] = a[order[_fenwick_select(tree, k + 1, logn)]]
        # sliding max over starts s in [x-m+1, x] ∩ [0, nstarts-1]
        head = 0
        tail = 0
        s_next = 0
        for x in range(n):
            while s_next <= x and s_next < nstarts:
                while tail > head and V[dq[tail - 1]] <= V[s_next]:
                    tail -= 1
                dq[tail] = s_next
                tail += 1
                s_next += 1
            while dq[head] < x - m + 1:
                head += 1
            v = V[dq[head]]
            if v > out[x]:
                out[x] = v
    return out


@njit(cache=True, nogil=True)
def _sharp_kernel(f):
    n = f.size
    P = _prefix(f)
    V = np.full((n, n), -np.inf)
    for a in range(n):
        for b in range(a, n):
            m = b - a + 1
            mean = (P[b + 1] - P[a]) / m
            s = 0.0
            for i in range(a, b + 1):
                s += abs(f[i] - mean)
            V[a, b] = s / m
    return _propagate_upper(V)


# ---------------------------------------------------------------------------
# public operators
# ---------------------------------------------------------------------------


def maximal(f: GridFunction, rtol: float = BISECTION_RTOL, max_iter: int = BISECTION_MAX_ITER) -> GridFunction:
    """Hardy-Littlewood maximal function Mf by per-cell bisection on the level.

    At cell x a level t is feasible when some window containing x has
    sum(|f| - t) >= 0; that test costs O(N) via prefix sums.  The returned
    value is an achieved window average within relative ``rtol`` of Mf(x),
    never below |f(x)| and never above max|f|.
    """
    a = np.abs(f.values)
    return f.with_values(_maximal_kernel(a, float(rtol), int(max_iter)))


def maximal_at(f: GridFunction, x: int, rtol: float = BISECTION_RTOL) -> float:
    """Mf at a single cell."""
    a = np.abs(f.values)
    top = float(a.max()) if a.size else 0.0
    if top == 0.0:
        return 0.0
    return float(_maximal_at(a, _prefix(a), top, int(x), float(rtol), BISECTION_MAX_ITER))


def maximal_oracle(f: GridFunction, cap: int = ORACLE_CAP) -> GridFunction:
    """Exact Mf by enumerating all windows (O(N^2) memory)."""
    n = f.grid.n
    if n > cap:
        raise SizeError(f"oracle cap is {cap} cells, got {n}")
    a = np.abs(f.values)
    P = np.concatenate([[0.0], np.cumsum(a)])
    lo, hi = np.triu_indices(n)
    avg = np.full((n, n), -np.inf)
    avg[lo, hi] = (P[hi + 1] - P[lo]) / (hi - lo + 1)
    # best[a, x] = max over b >= x of avg[a, b]
    best = np.maximum.accumulate(avg[:, ::-1], axis=1)[:, ::-1]
    best[np.tril_indices(n, -1)] = -np.inf
    return f.with_values(best.max(axis=0))


def maximal_r(f: GridFunction, r: float, rtol: float = BISECTION_RTOL) -> GridFunction:
    """M_r f = M(|f|^r)^(1/r)."""
    if r <= 0:
        raise ParameterError(f"r must be positive, got {r}")
    if r == 1:
        return maximal(f, rtol)
    g = f.with_values(np.abs(f.values) ** r)
    # tighten the inner tolerance so the r-th root keeps relative error rtol
    Mg = maximal(g, rtol * min(r, 1.0))
    return f.with_values(Mg.values ** (1.0 / r))


def local_maximal(f: GridFunction, lam: float) -> GridFunction:
    """m_lambda f(x) = max over windows Q containing x of (f chi_Q)^*(lam |Q|).

    Each window length m is handled independently: a Fenwick tree over
    value ranks gives the sliding (floor(lam*m)+1)-th largest, and a
    monotone deque spreads each window's value to the cells it covers.
    O(N^2 log N).
    """
    _check_lambda(lam)
    a = np.abs(f.values)
    return f.with_values(_local_maximal_kernel(a, float(lam)))


def local_maximal_oracle(f: GridFunction, lam: float, cap: int = ORACLE_CAP) -> GridFunction:
    """m_lambda f by sorting every window."""
    _check_lambda(lam)
    n = f.grid.n
    if n > cap:
        raise SizeError(f"oracle cap is {cap} cells, got {n}")
    a = np.abs(f.values)
    out = np.zeros(n)
    for lo in range(n):
        for hi in range(lo, n):
            m = hi - lo + 1
            k = order_index(lam, m)
            v = 0.0 if k >= m else np.sort(a[lo:hi + 1])[::-1][k]
            np.maximum(out[lo:hi + 1], v, out=out[lo:hi + 1])
    return f.with_values(out)


def sharp(f: GridFunction) -> GridFunction:
    """f#(x) = max over Q containing x of (1/m) sum_Q |f - <f>_Q>|, signed mean."""
    return f.with_values(_sharp_kernel(np.ascontiguousarray(f.values)))


def sharp_delta(f: GridFunction, delta: float) -> GridFunction:
    """f#_delta = ((|f|^delta)#)^(1/delta)."""
    if not (0.0 < delta <= 1.0):
        raise ParameterError(f"delta must lie in (0, 1], got {delta}")
    g = f.with_values(np.abs(f.values) ** delta)
    return f.with_values(sharp(g).values ** (1.0 / delta))


def truncate_fN(f: GridFunction, level: TruncationLevel | float) -> GridFunction:
    """f_N = min(|f|, N) on cells with |x_i| <= N, zero elsewhere."""
    N = level.level if isinstance(level, TruncationLevel) else TruncationLevel(level).level
    x = f.grid.centers()
    return f.with_values(np.where(np.abs(x) <= N, np.minimum(np.abs(f.values), N), 0.0))
