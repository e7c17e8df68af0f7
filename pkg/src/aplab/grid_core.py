"""Uniform 1-D grids, piecewise-constant functions, windows and rearrangements.

Every function lives on the cells of a :class:`Grid1D`.  A "cube" is a
contiguous run of cells (a :class:`Window`), so every supremum over cubes
becomes a finite maximum.  All suprema only range over windows that fit
inside the grid; no periodic wrap.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numba import njit


class ParameterError(ValueError):
    """An exponent or index argument is outside its admissible range."""


# ---------------------------------------------------------------------------
# deterministic summation
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _pairwise_inplace(buf, n):
    # balanced tree: adjacent pairs are combined level by level; an odd
    # trailing element is carried up unchanged
    if n == 0:
        return 0.0
    while n > 1:
        half = n // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if n % 2 == 1:
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            n = half
    return buf[0]


@njit(cache=True, nogil=True)
def pairwise_sum_kernel(values):
    buf = np.empty(values.size, dtype=np.float64)
    for i in range(values.size):
        buf[i] = values[i]
    return _pairwise_inplace(buf, values.size)


def pairwise_sum(values: Iterable[float]) -> float:
    """Sum with a fixed balanced binary tree.

    The result depends only on the values and their order, never on
    scheduling, so it is reproducible bit for bit.
    """
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.float64).ravel())
    return float(pairwise_sum_kernel(arr))


@njit(cache=True, nogil=True)
def order_index(lam, m):
    """Number k = floor(lam*m) of cells allowed strictly above the level.

    A product that lands within a few ulps below an integer is rounded up
    to it, so decimal inputs such as lam = 0.3, m = 10 give k = 3.
    """
    prod = lam * m
    k = math.floor(prod)
    if (k + 1) - prod <= 4.0 * 2.220446049250313e-16 * max(1.0, prod):
        k += 1
    return int(k)


# ---------------------------------------------------------------------------
# grids and functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid1D:
    origin: float
    h: float
    n: int

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ParameterError(f"cell width must be positive, got {self.h}")
        if self.n < 1:
            raise ParameterError(f"cell count must be >= 1, got {self.n}")

    @classmethod
    def symmetric(cls, L: float, n: int) -> "Grid1D":
        """Grid of n cells covering [-L, L] with no cell center at x = 0.

        For odd n the grid is shifted left by half a cell so that the
        centers stay at half-integer multiples of h.
        """
        h = 2.0 * L / n
        origin = -L if n % 2 == 0 else -L - h / 2
        return cls(origin=origin, h=h, n=n)

    @classmethod
    def unit(cls, n: int) -> "Grid1D":
        return cls(origin=0.0, h=1.0, n=n)

    @property
    def measure(self) -> float:
        return self.n * self.h

    @property
    def radius(self) -> float:
        return max(abs(self.origin), abs(self.origin + self.measure))

    def centers(self) -> np.ndarray:
        return self.origin + (np.arange(self.n) + 0.5) * self.h

    def cell_of(self, x: float) -> int:
        """Cell whose center is nearest to x (lower index on ties), clipped."""
        t = (x - self.origin) / self.h - 0.5
        i = math.ceil(t - 0.5)
        return min(max(i, 0), self.n - 1)

    def window_from_interval(self, a: float, b: float) -> "Window":
        """Cells whose centers lie in [a, b]; the nearest cell if none do."""
        c = self.centers()
        idx = np.nonzero((c >= a) & (c <= b))[0]
        if idx.size == 0:
            i = self.cell_of(0.5 * (a + b))
            return Window(i, i)
        return Window(int(idx[0]), int(idx[-1]))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if v.size != self.grid.n:
            raise ParameterError(f"expected {self.grid.n} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ParameterError("grid function values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values: Sequence[float], h: float = 1.0, origin: float = 0.0) -> "GridFunction":
        v = np.asarray(values, dtype=np.float64)
        return cls(Grid1D(origin, h, v.size), v)

    @classmethod
    def indicator(cls, grid: Grid1D, S: "Window | CellSet") -> "GridFunction":
        v = np.zeros(grid.n)
        v[_cells(S)] = 1.0
        return cls(grid, v)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def abs(self) -> "GridFunction":
        return GridFunction(self.grid, np.abs(self.values))

    def integral(self) -> float:
        return self.grid.h * pairwise_sum(self.values)

    @property
    def is_weight(self) -> bool:
        return bool(np.all(self.values >= 0))

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __len__(self):
        return self.grid.n


WeightFunction = GridFunction


@dataclass(frozen=True)
class Window:
    """Closed cell-index interval [lo, hi]."""

    lo: int
    hi: int
    clamped: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.lo < 0 or self.hi < self.lo:
            raise ParameterError(f"invalid window [{self.lo}, {self.hi}]")

    @property
    def m(self) -> int:
        return self.hi - self.lo + 1

    def measure(self, grid: Grid1D) -> float:
        return self.m * grid.h

    def center(self, grid: Grid1D) -> float:
        return grid.origin + 0.5 * (self.lo + self.hi + 1) * grid.h

    def cells(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def contains(self, i: int) -> bool:
        return self.lo <= i <= self.hi

    def within(self, n: int) -> bool:
        return self.hi <= n - 1

    def as_list(self) -> list[int]:
        return [self.lo, self.hi]


@dataclass(frozen=True)
class CellSet:
    parent: Window
    cells: tuple[int, ...]

    def __post_init__(self):
        cs = tuple(sorted(set(int(c) for c in self.cells)))
        if any(not self.parent.contains(c) for c in cs):
            raise ParameterError("cell set must lie inside its parent window")
        object.__setattr__(self, "cells", cs)

    def __len__(self):
        return len(self.cells)

    def measure(self, grid: Grid1D) -> float:
        return len(self.cells) * grid.h


def _cells(S) -> np.ndarray:
    if isinstance(S, Window):
        return S.cells()
    if isinstance(S, CellSet):
        return np.asarray(S.cells, dtype=np.int64)
    return np.asarray(S, dtype=np.int64)


def _check_window(Q: Window, n: int) -> None:
    if not Q.within(n):
        raise ParameterError(f"window [{Q.lo}, {Q.hi}] exceeds grid of {n} cells")


def _check_lambda(lam: float) -> None:
    if not (0.0 < lam < 1.0):
        raise ParameterError(f"lambda must lie in (0, 1), got {lam}")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def window_average(f: GridFunction, Q: Window) -> float:
    """(1/m) * sum of |f| over the window."""
    _check_window(Q, f.grid.n)
    return pairwise_sum(np.abs(f.values[Q.lo:Q.hi + 1])) / Q.m


def rearrangement_value(f: GridFunction, Q: Window, lam: float) -> float:
    """(f chi_Q)^*(lam |Q|) for a piecewise-constant f.

    The infimum of levels a with #{i in Q : |f_i| > a} <= floor(lam*m) is
    the (k+1)-th largest of |f| on Q, k = floor(lam*m).
    """
    _check_lambda(lam)
    _check_window(Q, f.grid.n)
    k = order_index(lam, Q.m)
    if k >= Q.m:
        return 0.0
    vals = np.sort(np.abs(f.values[Q.lo:Q.hi + 1]))[::-1]
    return float(vals[k])


def lp_w_norm(f: GridFunction, w: WeightFunction, p: float) -> float:
    """(h * sum |f_i|^p w_i)^(1/p)."""
    if p <= 0:
        raise ParameterError(f"p must be positive, got {p}")
    if f.grid.n != w.grid.n:
        raise ParameterError("function and weight live on different grids")
    terms = np.abs(f.values) ** p * w.values
    return (f.grid.h * pairwise_sum(terms)) ** (1.0 / p)


def scaled_count(c: float, m: int) -> int:
    """max(1, ceil(c*m)), treating products within 1e-9 of an integer as that integer."""
    v = c * m
    r = round(v)
    if abs(v - r) <= 1e-9 * max(1.0, abs(v)):
        return max(1, int(r))
    return max(1, math.ceil(v))


def scale_window(Q: Window, c: float, n: int) -> Window:
    """Concentric window with ceil(c*m) cells, clamped to [0, n-1].

    A half-cell placement offset is resolved toward the lower index.  The
    returned window has ``clamped=True`` when clamping cut it.
    """
    if c <= 0:
        raise ParameterError(f"scale factor must be positive, got {c}")
    _check_window(Q, n)
    m2 = scaled_count(c, Q.m)
    lo = (Q.lo + Q.hi + 1 - m2) // 2
    hi = lo + m2 - 1
    clamped = lo < 0 or hi > n - 1
    return Window(max(lo, 0), min(hi, n - 1), clamped=clamped)


def weighted_measure(w: WeightFunction, S) -> float:
    """h * sum of w over a Window, CellSet or index sequence."""
    idx = _cells(S)
    if idx.size == 0:
        return 0.0
    return w.grid.h * pairwise_sum(w.values[idx])


def heaviest_subset(w: WeightFunction, Q: Window, k: int) -> CellSet:
    """The k heaviest cells of Q; ties go to the lower index."""
    _check_window(Q, w.grid.n)
    if not (1 <= k <= Q.m):
        raise ParameterError(f"k must lie in [1, {Q.m}], got {k}")
    vals = w.values[Q.lo:Q.hi + 1]
    order = np.lexsort((np.arange(Q.m), -vals))
    return CellSet(Q, tuple(int(Q.lo + i) for i in order[:k]))


# ---------------------------------------------------------------------------
# CSV serialization: header `x,value`, one row per cell center
# ---------------------------------------------------------------------------


def write_csv(f: GridFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["x", "value"])
        for x, v in zip(f.grid.centers(), f.values):
            wr.writerow([repr(float(x)), repr(float(v))])


def read_csv(path) -> GridFunction:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "value"]:
        raise ValueError(f"{path}: expected header 'x,value'")
    body = [r for r in rows[1:] if r]
    if not body:
        raise ValueError(f"{path}: no data rows")
    xs = np.array([float(r[0]) for r in body])
    vs = np.array([float(r[1]) for r in body])
    if xs.size == 1:
        h = 1.0
    else:
        d = np.diff(xs)
        h = float((xs[-1] - xs[0]) / (xs.size - 1))
        if h <= 0 or not np.allclose(d, h, rtol=1e-9, atol=0):
            raise ValueError(f"{path}: cell centers must be uniformly increasing")
    return GridFunction(Grid1D(float(xs[0] - h / 2), h, xs.size), vs)
