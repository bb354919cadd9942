"""Experiment configuration for the command-line harness.

Config files are YAML (JSON is accepted, being a subset)::

    measure:                 # inline mapping, or a path to a file holding one
      kind: dirichlet        # dirichlet | independent | moment_table
      kappa: [1, 1, 1, 1]    # or alpha: ["3/2", "3/2", "3/2", "3/2"]
    function: "10*(x1^6 + x2^6 + x3^6) + (x1*x2 + x1*x3 + x2*x3)/10 + x1^2*x2^2*x3^2/1000"
    sweep:
      S: [1, 2]
      m: [1, 2, 3, 4, 5]     # pairs with m < S are skipped
      p: [1, 2, 3, 4, 5]
    basis:
      max_degree: 3
      max_cardinality: 3     # or subsets: [[1], [1, 2]]
      form: dual             # dual | orthonormal
    verify:
      max_degree: 4
      mc_samples: 200000
      mc_min_samples: 10000
    seed: 0
    precision: double        # double | extended (exact rationals)
    jobs: 1
    out: results

Other measure kinds::

    {kind: independent, marginals: [{family: gaussian, params: [0, 1]}, ...]}
    {kind: moment_table, dimension: 2, max_degree: 8, moments: {"1,0": "1/3", ...}}
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .measure import Measure, measure_from_spec
from .orthopoly import FORMS
from .polynomial import Polynomial


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class SweepConfig:
    S: list = field(default_factory=list)
    m: list = field(default_factory=list)
    p: list = field(default_factory=list)
    form: str = "orthonormal"


@dataclass
class BasisConfig:
    max_degree: int = 3
    max_cardinality: int | None = None
    subsets: list | None = None
    form: str = "dual"


@dataclass
class VerifyConfig:
    max_degree: int = 4
    max_cardinality: int | None = None
    form: str = "orthonormal"
    mc_samples: int = 200_000
    mc_min_samples: int = 10_000
    quadrature: bool = True


@dataclass
class ExperimentConfig:
    measure_spec: dict
    function: str | None = None
    sweep: SweepConfig = field(default_factory=SweepConfig)
    basis: BasisConfig = field(default_factory=BasisConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    seed: int = 0
    precision: str = "double"
    jobs: int = 1
    out: str = "results"

    def measure(self) -> Measure:
        try:
            m = measure_from_spec(self.measure_spec)
        except (KeyError, TypeError, ValueError) as err:
            raise ConfigError(f"measure: {err}") from err
        try:
            return m.with_precision(self.precision)
        except ValueError as err:
            raise ConfigError(f"precision: {err}") from err

    def polynomial(self) -> Polynomial | None:
        if self.function is None:
            return None
        try:
            return Polynomial.parse(str(self.function), exact=self.precision == "extended")
        except Exception as err:  # sympy raises a zoo of exception types
            raise ConfigError(f"function: cannot parse {self.function!r}: {err}") from err


def _int_list(value, name):
    if value is None:
        return []
    if isinstance(value, int):
        value = [value]
    try:
        return [int(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a list of integers, got {value!r}") from None


def _section(raw, name, cls):
    data = raw.get(name) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{name}: expected a mapping")
    known = set(cls.__dataclass_fields__)
    extra = set(data) - known
    if extra:
        raise ConfigError(f"{name}.{sorted(extra)[0]}: unknown key")
    return cls(**data)


def load_config(path: str | Path | None = None, raw: dict | None = None) -> ExperimentConfig:
    if raw is None:
        if path is None:
            raise ConfigError("config: no file given")
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text())
        except OSError as err:
            raise ConfigError(f"config: cannot read {path}: {err}") from err
        except yaml.YAMLError as err:
            raise ConfigError(f"config: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    known = {"measure", "function", "sweep", "basis", "verify", "seed", "precision", "jobs", "out"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"{sorted(extra)[0]}: unknown key")
    spec = raw.get("measure")
    if isinstance(spec, str):
        base = Path(path).parent if path is not None else Path(".")
        mpath = Path(spec) if Path(spec).is_absolute() else base / spec
        try:
            spec = yaml.safe_load(mpath.read_text())
        except (OSError, yaml.YAMLError) as err:
            raise ConfigError(f"measure: cannot load {mpath}: {err}") from err
    if not isinstance(spec, dict):
        raise ConfigError("measure: expected a mapping or a file path")
    cfg = ExperimentConfig(
        measure_spec=spec,
        function=raw.get("function"),
        sweep=_section(raw, "sweep", SweepConfig),
        basis=_section(raw, "basis", BasisConfig),
        verify=_section(raw, "verify", VerifyConfig),
        seed=int(raw.get("seed", 0)),
        precision=str(raw.get("precision", "double")),
        jobs=int(raw.get("jobs", 1)),
        out=str(raw.get("out", "results")),
    )
    return cfg


def validate(cfg: ExperimentConfig) -> Measure:
    """Check every constraint before any computation; returns the measure."""
    if cfg.precision not in ("double", "extended"):
        raise ConfigError(f"precision: must be 'double' or 'extended', got {cfg.precision!r}")
    if cfg.jobs < 1:
        raise ConfigError(f"jobs: must be >= 1, got {cfg.jobs}")
    if cfg.seed < 0:
        raise ConfigError(f"seed: must be non-negative, got {cfg.seed}")
    measure = cfg.measure()
    N = measure.dim
    sw = cfg.sweep
    sw.S, sw.m, sw.p = _int_list(sw.S, "sweep.S"), _int_list(sw.m, "sweep.m"), _int_list(sw.p, "sweep.p")
    for S in sw.S:
        if not 1 <= S <= N:
            raise ConfigError(f"sweep.S: {S} is outside [1, N={N}]")
    for m in sw.m:
        if sw.S and m < min(sw.S):
            raise ConfigError(f"sweep.m: {m} is below the smallest S={min(sw.S)}")
        if m < 1:
            raise ConfigError(f"sweep.m: {m} must be >= 1")
    for p in sw.p:
        if p < 0:
            raise ConfigError(f"sweep.p: {p} must be >= 0")
    if sw.form not in FORMS:
        raise ConfigError(f"sweep.form: must be one of {FORMS}")
    b = cfg.basis
    if b.form not in FORMS:
        raise ConfigError(f"basis.form: must be one of {FORMS}")
    if b.max_degree < 0:
        raise ConfigError(f"basis.max_degree: must be >= 0, got {b.max_degree}")
    if b.max_cardinality is not None and not 1 <= b.max_cardinality <= N:
        raise ConfigError(f"basis.max_cardinality: must be in [1, {N}]")
    if b.subsets is not None:
        for u in b.subsets:
            u = [int(v) for v in (u if isinstance(u, (list, tuple)) else [u])]
            if not u or sorted(set(u)) != u or u[0] < 1 or u[-1] > N:
                raise ConfigError(f"basis.subsets: {u} is not a strictly increasing subset of 1..{N}")
    v = cfg.verify
    if v.form not in FORMS:
        raise ConfigError(f"verify.form: must be one of {FORMS}")
    if v.max_degree < 1:
        raise ConfigError("verify.max_degree: must be >= 1")
    if v.max_cardinality is not None and not 1 <= v.max_cardinality <= N:
        raise ConfigError(f"verify.max_cardinality: must be in [1, {N}]")
    if v.mc_samples < 0:
        raise ConfigError("verify.mc_samples: must be >= 0")
    y = cfg.polynomial()
    if y is not None and y.scope and y.scope[-1] > N:
        raise ConfigError(f"function: uses x{y.scope[-1]} but the measure has N={N}")
    return measure
