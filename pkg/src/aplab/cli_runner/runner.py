"""Turn a config into a list of independent tasks, run them, collect a RunReport."""

from __future__ import annotations

import logging
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..grid_core import Grid1D, ParameterError, Window, read_csv, scale_window
from ..inequality_suite import pointwise as pw
from ..inequality_suite import structural as st
from ..inequality_suite.families import FamilySpec, MemberSpec, make_test_family, refinement_family_spec
from ..inequality_suite.reports import (
    FAIL,
    PASS,
    TOL_EXACT,
    CheckReport,
    assert_report,
    inconclusive,
    jsonable,
    merge_sweep,
)
from ..maximal_ops import SizeError, local_maximal, local_maximal_oracle, maximal, maximal_oracle
from ..singular_ops import nondegeneracy_check_paired, nondegeneracy_check_shifted
from ..weight_lab import (
    ConstantEstimate,
    WeightSpec,
    ainfty_ladder,
    am_functional,
    ap_constant,
    cp_ladder,
    doubling_constant,
    make_weight,
    np_integral,
)
from .config import CHECKS, ExperimentConfig

log = logging.getLogger(__name__)

ESTIMATE_ANCHORS = {
    "ap_constant": "[w]_{A_p} = sup_Q avg_Q(w) avg_Q(w^(-1/(p-1)))^(p-1)",
    "am_functional": "sup_Q avg_Q(w)^(1/p) avg_Q(sigma)^(1/p')",
    "ainfty_estimate": "w(E) <= C (|E|/|Q|)^delta w(Q)",
    "cp_estimate": "w(E) <= C (|E|/|Q|)^delta int (M chi_Q)^p w",
    "doubling_constant": "w(2Q) <= C w(Q)",
    "np_integral": "int w(x) / (1 + |x|)^(np) dx",
}
A_ORACLE = "Mf and m_lambda f agree with brute-force window enumeration"
A_NONDEGEN = "avg_Q f <= C |T(f chi_Q)(x)| on shifted / paired windows"

Item = CheckReport | ConstantEstimate


@dataclass
class RunReport:
    config: dict
    items: list[Item] = field(default_factory=list)
    timing: dict[str, float] = field(default_factory=dict)

    @property
    def failed(self) -> list[CheckReport]:
        return [it for it in self.items if isinstance(it, CheckReport) and it.failed]

    @property
    def status(self) -> str:
        return FAIL if self.failed else PASS

    def to_dict(self) -> dict:
        items = []
        for it in self.items:
            kind = "check" if isinstance(it, CheckReport) else "estimate"
            items.append({"type": kind, **jsonable(it.to_dict())})
        return {"config": jsonable(self.config), "status": self.status, "items": items,
                "timing": dict(self.timing)}

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        items: list[Item] = []
        for raw in d["items"]:
            raw = dict(raw)
            kind = raw.pop("type")
            items.append(CheckReport.from_dict(raw) if kind == "check" else ConstantEstimate.from_dict(raw))
        return cls(d["config"], items, dict(d.get("timing", {})))

    def __eq__(self, other):
        if not isinstance(other, RunReport):
            return NotImplemented
        a, b = self.to_dict(), other.to_dict()
        a.pop("timing")
        b.pop("timing")
        return a == b


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _grid(cfg: ExperimentConfig, N: int | None = None) -> Grid1D:
    return Grid1D.symmetric(cfg.L, N or cfg.N)


def _tag(rep: CheckReport, spec: WeightSpec) -> CheckReport:
    rep.params = {**rep.params, "weight": spec.label}
    return rep


def _stability_family(cfg: ExperimentConfig) -> FamilySpec:
    # refinement studies need members that are the same function on every grid
    if cfg.family == "default":
        return refinement_family_spec(cfg.seed)
    return cfg.family_spec()


class _SearchCache:
    """lambda_0 searches are shared by the search, doubling-step and coherence items."""

    def __init__(self):
        self._lock = threading.Lock()
        self._data: dict = {}

    def get(self, cfg: ExperimentConfig, spec: WeightSpec):
        key = (spec, cfg.N, cfg.L, cfg.p)
        with self._lock:
            if key in self._data:
                return self._data[key]
        grid = _grid(cfg)
        w = make_weight(spec, grid)
        res = st.search_lambda0(w, cfg.p, make_test_family(cfg.family_spec(), grid, w, cfg.p))
        with self._lock:
            self._data.setdefault(key, res)
        return res


def _rel_diff(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.abs(a), np.abs(b))
    d = np.abs(a - b)
    return np.where(scale > 0, d / np.where(scale > 0, scale, 1.0), 0.0)


# ---------------------------------------------------------------------------
# estimator tasks
# ---------------------------------------------------------------------------


def _estimates(cfg: ExperimentConfig, spec: WeightSpec, N: int) -> list[Item]:
    grid = _grid(cfg, N)
    w = make_weight(spec, grid)
    out: list[ConstantEstimate] = []
    for name in cfg.estimators:
        if name == "ap":
            out.append(ap_constant(w, cfg.p, cfg.window_family))
        elif name == "am":
            out.append(am_functional(w, cfg.p, cfg.window_family))
        elif name == "ainfty":
            out.extend(ainfty_ladder(w, cfg.deltas, cfg.window_family))
        elif name == "cp":
            out.extend(cp_ladder(w, cfg.p, cfg.deltas, cfg.window_family))
        elif name == "doubling":
            out.append(doubling_constant(w, cfg.window_family))
        elif name == "np":
            out.append(ConstantEstimate("np_integral", np_integral(w, cfg.p), None, params={"p": cfg.p},
                                        family="none", N=grid.n, L=grid.radius))
    for e in out:
        e.params = {**e.params, "weight": spec.label}
    return out


# ---------------------------------------------------------------------------
# check tasks
# ---------------------------------------------------------------------------


def _oracle(cfg: ExperimentConfig) -> list[Item]:
    oc = cfg.oracle
    rng = np.random.default_rng([cfg.seed, 7])
    grid = Grid1D.unit(oc.N)
    worst_m, worst_l, wit_m, wit_l = 0.0, 0.0, {}, {}
    for t in range(oc.count):
        f = pw.random_function(rng, grid)
        lam = float(rng.uniform(0.05, 0.95))
        d = _rel_diff(maximal(f).values, maximal_oracle(f).values)
        if t == 0 or d.max() > worst_m:
            worst_m, wit_m = float(d.max()), {"trial": t, "point": int(np.argmax(d))}
        d = np.abs(local_maximal(f, lam).values - local_maximal_oracle(f, lam).values)
        if t == 0 or d.max() > worst_l:
            worst_l, wit_l = float(d.max()), {"trial": t, "point": int(np.argmax(d)), "lambda": lam}
    params = {"N": oc.N, "seed": cfg.seed}
    out: list[Item] = [
        assert_report("oracle_maximal", A_ORACLE, [worst_m], oc.tolerance, wit_m, params,
                      notes=f"{oc.count} random functions"),
        assert_report("oracle_local_maximal", A_ORACLE, [worst_l], TOL_EXACT, wit_l, params,
                      notes=f"{oc.count} random functions, bitwise"),
    ]
    if oc.fixture is not None:
        f = read_csv(cfg.resolve(oc.fixture["input"]))
        expected = read_csv(cfg.resolve(oc.fixture["expected"]))
        if expected.grid.n != f.grid.n:
            raise ParameterError("oracle fixture: input and expected have different lengths")
        d = _rel_diff(maximal(f).values, expected.values)
        i = int(np.argmax(d))
        out.append(assert_report("oracle_fixture", A_ORACLE, [float(d[i])], oc.tolerance,
                                 {"point": i, "expected": float(expected.values[i]),
                                  "input": oc.fixture["input"]}, {"N": f.grid.n}))
    return out


def _nondegen(cfg: ExperimentConfig) -> list[Item]:
    nc = cfg.nondegen
    out: list[Item] = []
    for fn in (nondegeneracy_check_shifted, nondegeneracy_check_paired):
        r = fn(C=nc.C, trials=nc.trials, rng_seed=cfg.seed, n=nc.N)
        ratios = [r.worst_ratio] + ([r.worst_ratio_cond2] if r.worst_ratio_cond2 is not None else [])
        margins = [x / nc.C - 1.0 for x in ratios]
        wit = {"worst_ratio": r.worst_ratio, "witness": r.witness, "skipped": r.skipped}
        if r.worst_ratio_cond2 is not None:
            wit.update(worst_ratio_cond2=r.worst_ratio_cond2, witness_cond2=r.witness_cond2)
        out.append(assert_report(f"nondegen_{r.mode}", A_NONDEGEN, margins, 0.0, wit,
                                 {"C": nc.C, "N": nc.N, "trials": nc.trials, "seed": cfg.seed},
                                 value=max(ratios)))
    return out


def localization_windows(grid: Grid1D, count: int, seed: int) -> list[Window]:
    """Seeded windows of 128 to n/2 cells placed anywhere inside the grid."""
    rng = np.random.default_rng([seed, 8])
    n = grid.n
    lo_m, hi_m = min(128, n // 2), max(min(128, n // 2), n // 2)
    out = []
    for _ in range(count):
        m = int(rng.integers(lo_m, hi_m + 1))
        lo = int(rng.integers(0, n - m + 1))
        out.append(Window(lo, lo + m - 1))
    return out


def support_windows(grid: Grid1D, lam: float, count: int, seed: int) -> list[Window]:
    """Seeded windows small enough that rQ, r = 1 + 2/lambda, stays inside the grid."""
    rng = np.random.default_rng([seed, 9])
    n = grid.n
    r = 1.0 + 2.0 / lam
    max_m = max(1, int(n / (r + 1)))
    out = []
    while len(out) < count:
        m = int(rng.integers(1, max_m + 1))
        lo = int(rng.integers(0, n - m + 1))
        Q = Window(lo, lo + m - 1)
        if not scale_window(Q, r, n).clamped:
            out.append(Q)
    return out


def _localization(cfg: ExperimentConfig) -> list[Item]:
    grid = _grid(cfg)
    eps = cfg.eps if cfg.eps is not None else st.default_epsilon(cfg.lam)
    reps = [st.localization_check(cfg.lam, eps, Q, grid)
            for Q in localization_windows(grid, cfg.placements, cfg.seed)]
    return [_merge("localization", st.A_LOCALIZATION, reps, {"lambda": cfg.lam, "eps": eps,
                                                              "N": grid.n, "L": grid.radius})]


def _support(cfg: ExperimentConfig) -> list[Item]:
    grid = _grid(cfg)
    reps = [st.support_check_rq(cfg.lam, Q, grid)
            for Q in support_windows(grid, cfg.lam, cfg.placements, cfg.seed)]
    return [_merge("support_rq", st.A_SUPPORT_RQ, reps, {"lambda": cfg.lam, "N": grid.n, "L": grid.radius})]


def _merge(name, anchor, reps, params):
    if any(r.mode == "record" for r in reps):
        worst = max(r.value for r in reps)
        return CheckReport(name, anchor, PASS, None, 0.0, {"max_outside": worst, "placements": len(reps)},
                           worst, params, mode="record", notes="condition fails; report only")
    return merge_sweep(name, anchor, reps, params)


def _search(cfg: ExperimentConfig, cache: _SearchCache, spec: WeightSpec) -> list[Item]:
    res = cache.get(cfg, spec)
    rep = _tag(res.to_report(), spec)
    mono = assert_report("search_lambda0_monotone", "m_lambda f is non-increasing in lambda",
                         [0.0 if res.monotone else math.inf], TOL_EXACT,
                         {"worst": res.worst}, dict(rep.params))
    return [rep, mono]


def _doubling_step(cfg: ExperimentConfig, cache: _SearchCache, spec: WeightSpec) -> list[Item]:
    res = cache.get(cfg, spec)
    if res.lambda0 is None:
        return [_tag(inconclusive("doubling_step", st.A_DOUBLING_STEP, 0.0, {}, {"p": cfg.p, "N": cfg.N},
                                  notes="no lambda0 found"), spec)]
    w = make_weight(spec, _grid(cfg))
    eps = st.default_epsilon(res.lambda0)
    return [_tag(st.doubling_step_check(w, cfg.p, res.lambda0, eps, cfg.window_family), spec)]


def _per_weight(cfg: ExperimentConfig, spec: WeightSpec, fn) -> list[Item]:
    grid = _grid(cfg)
    w = make_weight(spec, grid)
    F = make_test_family(cfg.family_spec(), grid, w, cfg.p)
    return [_tag(fn(w, F), spec)]


def _decay(cfg: ExperimentConfig, spec: WeightSpec) -> list[Item]:
    grid = _grid(cfg)
    w = make_weight(spec, grid)
    fam = make_test_family(FamilySpec((MemberSpec("decaying"), MemberSpec("indicator", centers=(0.0,),
                                                                          width=1.0))), grid)
    x = grid.cell_of(0.0)
    reps = [pw.decay_check(w, cfg.p, f, x, cfg.decay_R, label) for label, f in fam]
    return [_tag(_merge("decay", pw.A_DECAY, reps, {"p": cfg.p, "N": grid.n, "L": grid.radius}), spec)]


def _coherence(cfg: ExperimentConfig) -> list[Item]:
    _, rep = st.coherence_table(cfg.weights, cfg.p, tuple(cfg.ladder), cfg.L, cfg.family_spec(), cfg.delta)
    return [rep]


def build_tasks(cfg: ExperimentConfig, estimators: bool, checks: list[str]) -> list[tuple[str, Callable]]:
    """Independent (name, thunk) pairs in config order."""
    tasks: list[tuple[str, Callable]] = []
    if estimators:
        for spec in cfg.weights:
            for N in cfg.ladder:
                tasks.append((f"estimates[{spec.label},N={N}]", lambda s=spec, n=N: _estimates(cfg, s, n)))
    cache = _SearchCache()
    sw = cfg.sweep
    simple = {
        "oracle": lambda: _oracle(cfg),
        "chebyshev": lambda: [pw.sweep_chebyshev(sw.count, sw.N, cfg.seed)],
        "splitting": lambda: [pw.sweep_splitting(sw.count, sw.N, cfg.seed)],
        "mla": lambda: [pw.sweep_mla(sw.count, sw.N, cfg.seed)],
        "sharp_delta": lambda: [pw.sweep_sharp_delta(sw.count, sw.N, cfg.seed)],
        "local_of_maximal": lambda: [pw.sweep_local_of_maximal(sw.count, sw.N, cfg.seed)],
        "coifman_rochberg": lambda: pw.coifman_rochberg_stability(_stability_family(cfg), tuple(cfg.ladder),
                                                                  cfg.L, cfg.lam),
        "cf_pointwise": lambda: [pw.cf_stability(_stability_family(cfg), tuple(cfg.ladder), cfg.L, cfg.cf_r)],
        "hilbert_l2": lambda: [pw.hilbert_inequality_sweep(sw.count, sw.N, cfg.seed)],
        "nondegen": lambda: _nondegen(cfg),
        "localization": lambda: _localization(cfg),
        "support_rq": lambda: _support(cfg),
        "coherence": lambda: _coherence(cfg),
    }
    per_weight = {
        "search_lambda0": lambda s: _search(cfg, cache, s),
        "doubling_step": lambda s: _doubling_step(cfg, cache, s),
        "wp_ratio": lambda s: _per_weight(cfg, s, lambda w, F: st.wp_ratio(w, cfg.p, F)),
        "fs_ratio": lambda s: _per_weight(cfg, s, lambda w, F: st.fs_inequality_ratio(w, cfg.p, cfg.delta, F)),
        "decay": lambda s: _decay(cfg, s),
    }
    for name in checks:
        if name in simple:
            tasks.append((name, simple[name]))
        else:
            for spec in cfg.weights:
                tasks.append((f"{name}[{spec.label}]", lambda s=spec, fn=per_weight[name]: fn(s)))
    return tasks


def _guarded(name: str, thunk: Callable) -> tuple[list[Item], float]:
    t0 = time.perf_counter()
    try:
        items = thunk()
    except (ParameterError, SizeError, OSError) as e:
        log.warning("%s: %s", name, e)
        items = [inconclusive(name, "", 0.0, {}, {}, notes=f"error: {e}")]
    return items, time.perf_counter() - t0


def run_experiment(cfg: ExperimentConfig, estimators: bool = True, checks: list[str] | None = None,
                   threads: int = 0) -> RunReport:
    """Run the configured items; results keep config order whatever the completion order."""
    checks = list(cfg.checks) if checks is None else checks
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise ParameterError(f"unknown checks {unknown}")
    tasks = build_tasks(cfg, estimators, checks)
    t0 = time.perf_counter()
    workers = threads if threads > 0 else (os.cpu_count() or 1)
    if workers == 1 or len(tasks) <= 1:
        results = [_guarded(n, t) for n, t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda nt: _guarded(*nt), tasks))
    report = RunReport(cfg.to_dict())
    for (name, _), (items, dt) in zip(tasks, results):
        report.items.extend(items)
        report.timing[name] = dt
    report.timing["total"] = time.perf_counter() - t0
    return report
