"""Experiment configuration: YAML (or JSON) file to a validated dataclass.

Schema, with defaults::

    seed: 0
    L: 8.0                     # domain [-L, L]
    N: 512                     # grid size for single-grid items
    ladder: [128, 256, 512]    # refinement ladder, strictly increasing
    weights: [{kind: constant}]
    p: 2.0
    delta: 0.5
    deltas: [0.1, ..., 1.0]    # ladder for the A_infty / C_p estimators
    lambda: 0.3
    eps: 0.05                  # null: largest admissible dyadic value for lambda
    cf_r: 0.5
    window_family: all         # all | dyadic
    family: default            # default | refinement | {seed, members}
    estimators: [ap, am, ainfty, cp, doubling, np]
    checks: [...]              # see CHECKS
    sweep: {count: 200, N: 256}
    nondegen: {C: 2.0, trials: 50, N: 512}
    placements: 20
    decay_R: [1.0, 2.0, 4.0]
    oracle: {count: 100, N: 64, tolerance: 1.0e-9, fixture: null}
    output: {dir: aplab-out, format: csv}

``oracle.fixture`` is ``{input: f.csv, expected: Mf.csv}``: two grid
CSVs whose second holds the expected maximal function of the first.
Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..grid_core import ParameterError
from ..inequality_suite.families import FamilySpec, default_family_spec, refinement_family_spec
from ..weight_lab import DELTA_LADDER, FAMILIES, WeightSpec


class ConfigError(ValueError):
    """Invalid or unreadable configuration (exit status 2)."""


ESTIMATORS = ("ap", "am", "ainfty", "cp", "doubling", "np")
CHECKS = (
    "oracle",
    "chebyshev",
    "splitting",
    "mla",
    "sharp_delta",
    "local_of_maximal",
    "coifman_rochberg",
    "cf_pointwise",
    "hilbert_l2",
    "nondegen",
    "localization",
    "support_rq",
    "doubling_step",
    "search_lambda0",
    "wp_ratio",
    "fs_ratio",
    "decay",
    "coherence",
)
FORMATS = ("csv", "json")


@dataclass
class SweepConfig:
    count: int = 200
    N: int = 256


@dataclass
class NondegenConfig:
    C: float = 2.0
    trials: int = 50
    N: int = 512


@dataclass
class OracleConfig:
    count: int = 100
    N: int = 64
    tolerance: float = 1e-9
    fixture: dict[str, str] | None = None


@dataclass
class OutputConfig:
    dir: str = "aplab-out"
    format: str = "csv"


@dataclass
class ExperimentConfig:
    seed: int = 0
    L: float = 8.0
    N: int = 512
    ladder: list[int] = field(default_factory=lambda: [128, 256, 512])
    weights: list[WeightSpec] = field(default_factory=lambda: [WeightSpec("constant")])
    p: float = 2.0
    delta: float = 0.5
    deltas: list[float] = field(default_factory=lambda: list(DELTA_LADDER))
    lam: float = 0.3
    eps: float | None = 0.05
    cf_r: float = 0.5
    window_family: str = "all"
    family: Any = "default"
    estimators: list[str] = field(default_factory=lambda: list(ESTIMATORS))
    checks: list[str] = field(default_factory=list)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    nondegen: NondegenConfig = field(default_factory=NondegenConfig)
    placements: int = 20
    decay_R: list[float] = field(default_factory=lambda: [1.0, 2.0, 4.0])
    oracle: OracleConfig = field(default_factory=OracleConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    base_dir: str = "."

    def family_spec(self, seed: int | None = None) -> FamilySpec:
        s = self.seed if seed is None else seed
        if self.family == "default":
            return default_family_spec(s)
        if self.family == "refinement":
            return refinement_family_spec(s)
        fs = FamilySpec.from_dict(self.family)
        return fs if "seed" in self.family else FamilySpec(fs.members, s)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        d["lambda"] = d.pop("lam")
        d["weights"] = [asdict(w) for w in self.weights]
        return d


_SECTIONS = {"sweep": SweepConfig, "nondegen": NondegenConfig, "oracle": OracleConfig, "output": OutputConfig}
_TOP = set(ExperimentConfig.__dataclass_fields__) - {"lam", "base_dir"} | {"lambda"}


def _section(name, cls, raw):
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected a mapping")
    unknown = set(raw) - set(cls.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
    return cls(**raw)


def _positive_int(name, v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigError(f"{name} must be a positive integer, got {v!r}")


def _number(name, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{name} must be a finite number, got {v!r}")
    return float(v)


def _increasing(name, xs):
    if not isinstance(xs, list) or not xs:
        raise ConfigError(f"{name} must be a non-empty list")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ConfigError(f"{name} must be strictly increasing, got {xs}")


def config_from_dict(raw: dict, base_dir: str = ".") -> ExperimentConfig:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at the top level")
    unknown = set(raw) - _TOP
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    kw = dict(raw)
    if "lambda" in kw:
        kw["lam"] = kw.pop("lambda")
    for name, cls in _SECTIONS.items():
        if name in kw:
            kw[name] = _section(name, cls, kw[name])
    try:
        if "weights" in kw:
            if not isinstance(kw["weights"], list) or not kw["weights"]:
                raise ConfigError("weights must be a non-empty list")
            kw["weights"] = [WeightSpec.from_dict(w) for w in kw["weights"]]
        cfg = ExperimentConfig(**kw, base_dir=base_dir)
        validate(cfg)
    except ParameterError as e:
        raise ConfigError(str(e)) from e
    except TypeError as e:
        raise ConfigError(f"malformed config: {e}") from e
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    for name in ("N", "placements"):
        _positive_int(name, getattr(cfg, name))
    _increasing("ladder", cfg.ladder)
    for N in cfg.ladder:
        _positive_int("ladder entry", N)
    if _number("L", cfg.L) <= 0:
        raise ConfigError("L must be positive")
    if not _number("p", cfg.p) > 1:
        raise ConfigError(f"p must be > 1, got {cfg.p}")
    if not _number("delta", cfg.delta) > 0:
        raise ConfigError("delta must be positive")
    _increasing("deltas", cfg.deltas)
    for d in cfg.deltas:
        if not _number("deltas entry", d) > 0:
            raise ConfigError("deltas entries must be positive")
    if not 0 < _number("lambda", cfg.lam) < 1:
        raise ConfigError(f"lambda must lie in (0, 1), got {cfg.lam}")
    if cfg.eps is not None and not 0 < _number("eps", cfg.eps) < 1:
        raise ConfigError(f"eps must lie in (0, 1), got {cfg.eps}")
    if not 0 < _number("cf_r", cfg.cf_r) < 1:
        raise ConfigError(f"cf_r must lie in (0, 1), got {cfg.cf_r}")
    if cfg.window_family not in FAMILIES:
        raise ConfigError(f"window_family must be one of {FAMILIES}")
    if isinstance(cfg.family, str):
        if cfg.family not in ("default", "refinement"):
            raise ConfigError("family must be 'default', 'refinement' or a mapping")
    elif isinstance(cfg.family, dict):
        cfg.family_spec()
    else:
        raise ConfigError("family must be 'default', 'refinement' or a mapping")
    for lst, allowed, name in ((cfg.estimators, ESTIMATORS, "estimators"), (cfg.checks, CHECKS, "checks")):
        if not isinstance(lst, list):
            raise ConfigError(f"{name} must be a list")
        bad = [x for x in lst if x not in allowed]
        if bad:
            raise ConfigError(f"unknown {name} {bad}; expected a subset of {list(allowed)}")
    _increasing("decay_R", cfg.decay_R)
    for name in ("count", "N"):
        _positive_int(f"sweep.{name}", getattr(cfg.sweep, name))
        _positive_int(f"oracle.{name}", getattr(cfg.oracle, name))
    _positive_int("nondegen.trials", cfg.nondegen.trials)
    _positive_int("nondegen.N", cfg.nondegen.N)
    if not _number("nondegen.C", cfg.nondegen.C) > 0:
        raise ConfigError("nondegen.C must be positive")
    if not _number("oracle.tolerance", cfg.oracle.tolerance) >= 0:
        raise ConfigError("oracle.tolerance must be nonnegative")
    fx = cfg.oracle.fixture
    if fx is not None and (not isinstance(fx, dict) or set(fx) != {"input", "expected"}):
        raise ConfigError("oracle.fixture must have exactly the keys 'input' and 'expected'")
    if cfg.output.format not in FORMATS:
        raise ConfigError(f"output.format must be one of {FORMATS}")


def parse_config(path) -> ExperimentConfig:
    """Read a YAML or JSON config; any problem raises ConfigError."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        raw = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from e
    return config_from_dict(raw, str(path.parent))
