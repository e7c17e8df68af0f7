"""Seeded families of nonnegative test functions.

Members that are described in continuum coordinates (spikes at a point,
indicators of intervals, decaying profiles) are the same function on every
grid of a refinement ladder; each member draws from its own child RNG so
adding cells never shifts the randomness of later members.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from ..grid_core import Grid1D, GridFunction, ParameterError, scale_window
from ..weight_lab import dual_weight

log = logging.getLogger(__name__)

MEMBER_KINDS = ("random-uniform", "spike", "indicator", "dual", "decaying")


@dataclass(frozen=True)
class MemberSpec:
    kind: str
    count: int = 1
    centers: tuple[float, ...] = ()
    width: float | None = None
    eps: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in MEMBER_KINDS:
            raise ParameterError(f"unknown family kind {self.kind!r}; expected one of {MEMBER_KINDS}")
        if self.count < 1:
            raise ParameterError("member count must be >= 1")
        if not self.eps > 0:
            raise ParameterError("eps must be positive")
        if not self.scale > 0:
            raise ParameterError("scale must be positive")
        if self.width is not None and not self.width > 0:
            raise ParameterError("width must be positive")
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))

    @classmethod
    def from_dict(cls, d: dict) -> "MemberSpec":
        d = dict(d)
        if "centers" in d:
            d["centers"] = tuple(d["centers"])
        return cls(**d)


@dataclass(frozen=True)
class FamilySpec:
    members: tuple[MemberSpec, ...]
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "FamilySpec":
        unknown = set(d) - {"members", "seed"}
        if unknown:
            raise ParameterError(f"unknown family keys {sorted(unknown)}")
        return cls(tuple(MemberSpec.from_dict(m) for m in d.get("members", [])), int(d.get("seed", 0)))

    def to_dict(self) -> dict:
        return {"seed": self.seed, "members": [asdict(m) for m in self.members]}


@dataclass
class TestFamily:
    __test__ = False  # not a pytest class

    members: list[GridFunction]
    labels: list[str]
    spec: FamilySpec
    grid: Grid1D
    dropped: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(zip(self.labels, self.members))


def _positions(ms: MemberSpec, rng, grid: Grid1D, inner: float):
    if ms.centers:
        return list(ms.centers)
    return list(rng.uniform(-inner, inner, size=ms.count))


def _widths(ms: MemberSpec, rng, count: int, inner: float):
    if ms.width is not None:
        return [ms.width] * count
    return list(rng.uniform(0.05 * inner, 0.5 * inner, size=count))


def make_test_family(spec: FamilySpec, grid: Grid1D, w: GridFunction | None = None,
                     p: float = 2.0) -> TestFamily:
    """Deterministic family on ``grid``; members are nonnegative and not identically 0.

    Random positions are drawn in the inner half of the domain.  The dual
    kind uses sigma = w^(-1/(p-1)) on a window (cells where w = 0 are left
    at 0); without a weight it degenerates to indicators.
    """
    if not spec.members:
        raise ParameterError("family spec has no members")
    center = grid.origin + grid.measure / 2
    inner = grid.measure / 4
    members, labels, dropped = [], [], []

    def add(values, label):
        v = np.asarray(values, dtype=np.float64)
        if not np.any(v > 0):
            dropped.append(label)
            log.info("family member %s is identically zero on this grid; dropped", label)
            return
        members.append(GridFunction(grid, v))
        labels.append(label)

    for mi, ms in enumerate(spec.members):
        rng = np.random.default_rng([spec.seed, mi])
        if ms.kind == "random-uniform":
            for j in range(ms.count):
                add(rng.random(grid.n), f"random-uniform#{mi}.{j}")
        elif ms.kind == "spike":
            for j, c in enumerate(_positions(ms, rng, grid, inner)):
                v = np.zeros(grid.n)
                v[grid.cell_of(center + c if not ms.centers else c)] = 1.0
                add(v, f"spike#{mi}.{j}")
        elif ms.kind in ("indicator", "dual"):
            pos = _positions(ms, rng, grid, inner)
            if not ms.centers:
                pos = [center + c for c in pos]
            widths = _widths(ms, rng, len(pos), inner)
            sigma = None
            if ms.kind == "dual" and w is not None:
                sigma = dual_weight(w, p)
                sigma = np.where(np.isfinite(sigma), sigma, 0.0)
            for j, (c, wd) in enumerate(zip(pos, widths)):
                Q = grid.window_from_interval(c - wd / 2, c + wd / 2)
                Qe = scale_window(Q, ms.eps, grid.n) if ms.eps != 1.0 else Q
                v = np.zeros(grid.n)
                v[Qe.lo:Qe.hi + 1] = 1.0 if sigma is None else sigma[Qe.lo:Qe.hi + 1]
                add(v, f"{ms.kind}#{mi}.{j}[{Qe.lo},{Qe.hi}]")
        elif ms.kind == "decaying":
            pos = list(ms.centers) if ms.centers else [0.0]
            x = grid.centers()
            for j, c in enumerate(pos):
                add(1.0 / (1.0 + np.abs(x - c) / ms.scale) ** 2, f"decaying#{mi}.{j}")
    if not members:
        raise ParameterError("family is empty on this grid")
    return TestFamily(members, labels, spec, grid, dropped)


def default_family_spec(seed: int = 0) -> FamilySpec:
    """Mixed family used by the lambda search and the coherence table.

    A spike at the origin and a small centered indicator, which drive
    m_lambda to zero on most of the line, sit next to generic members.
    """
    return FamilySpec((
        MemberSpec("random-uniform", count=4),
        MemberSpec("spike", centers=(0.0,)),
        MemberSpec("spike", count=3),
        MemberSpec("indicator", centers=(0.0,), width=1.0, eps=0.05),
        MemberSpec("indicator", count=4),
        MemberSpec("dual", count=2),
        MemberSpec("decaying"),
    ), seed)


def refinement_family_spec(seed: int = 0) -> FamilySpec:
    """Family whose members are defined in continuum coordinates only.

    Every member is the same function on each grid of a refinement ladder,
    so constants recorded on it can be compared across N.
    """
    return FamilySpec((
        MemberSpec("indicator", count=4),
        MemberSpec("indicator", centers=(0.0,), width=1.0),
        MemberSpec("decaying"),
        MemberSpec("decaying", centers=(1.5,), scale=0.5),
    ), seed)
