from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
STATUSES = (PASS, FAIL, INCONCLUSIVE)

# analytic pointwise inequalities vs. those that go through bisection
TOL_ANALYTIC = 1e-12
TOL_BISECTION = 1e-9
TOL_EXACT = 0.0


@dataclass
class CheckReport:
    """Outcome of one inequality or property check.

    ``mode`` is "assert" for checks that can fail and "record" for checks
    that only measure a quantity (``value``).  For asserting checks,
    status is fail exactly when ``worst_violation > tolerance``.
    """

    name: str
    anchor: str
    status: str
    worst_violation: float | None
    tolerance: float
    witness: dict[str, Any] = field(default_factory=dict)
    value: float | None = None
    params: dict[str, Any] = field(default_factory=dict)
    mode: str = "assert"
    notes: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")

    @property
    def failed(self) -> bool:
        return self.mode == "assert" and self.status == FAIL

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "status": self.status,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
            "witness": jsonable(self.witness),
            "value": self.value,
            "params": jsonable(self.params),
            "mode": self.mode,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        return cls(**d)

    def __eq__(self, other):
        if not isinstance(other, CheckReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def relative_margin(lhs, rhs) -> np.ndarray:
    """Signed relative excess (lhs - rhs) / max(|lhs|, |rhs|); 0 where both vanish."""
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    diff = lhs - rhs
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), 0.0)
    # inf on the left only: maximal violation
    out = np.where(np.isinf(lhs) & ~np.isinf(rhs), np.inf, out)
    return out


def status_of(margin: float, tol: float) -> str:
    return FAIL if margin > tol else PASS


def assert_report(name, anchor, margins, tol, witness=None, params=None, value=None, notes=""):
    """Build an asserting report from a vector of margins (worst = max)."""
    margins = np.atleast_1d(np.asarray(margins, dtype=np.float64))
    if margins.size == 0:
        return CheckReport(name, anchor, INCONCLUSIVE, None, tol, witness or {}, value,
                           params or {}, notes=notes or "nothing to check")
    i = int(np.argmax(margins))
    worst = float(margins[i])
    wit = dict(witness or {})
    wit.setdefault("index", i)
    return CheckReport(name, anchor, status_of(worst, tol), worst, tol, wit, value, params or {}, notes=notes)


def record_report(name, anchor, value, witness=None, params=None, notes=""):
    return CheckReport(name, anchor, PASS, None, 0.0, witness or {}, value, params or {},
                       mode="record", notes=notes)


def inconclusive(name, anchor, tol, witness=None, params=None, notes=""):
    return CheckReport(name, anchor, INCONCLUSIVE, None, tol, witness or {}, None, params or {}, notes=notes)


def merge_sweep(name: str, anchor: str, reports: list[CheckReport], params=None) -> CheckReport:
    """Collapse a sweep of asserting reports into one: worst margin wins."""
    scored = [r for r in reports if r.worst_violation is not None]
    if not scored:
        return inconclusive(name, anchor, reports[0].tolerance if reports else 0.0, params=params,
                            notes="no conclusive configuration")
    worst = max(scored, key=lambda r: r.worst_violation)
    n_fail = sum(r.status == FAIL for r in scored)
    n_inc = len(reports) - len(scored)
    wit = dict(worst.witness)
    wit["configurations"] = len(reports)
    return CheckReport(name, anchor, FAIL if n_fail else PASS, worst.worst_violation, worst.tolerance,
                       wit, worst.value, params if params is not None else worst.params,
                       notes=f"{n_fail} failing, {n_inc} inconclusive of {len(reports)}")


def growth_factors(values) -> list[float]:
    v = list(values)
    return [v[i + 1] / v[i] if v[i] > 0 else math.inf for i in range(len(v) - 1)]


def relative_spread(values) -> float:
    v = np.asarray(values, dtype=np.float64)
    return float((v.max() - v.min()) / v.min()) if v.min() > 0 else math.inf
