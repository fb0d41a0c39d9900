"""Run configuration: one YAML format for every mode.

Every section is a dataclass; unknown keys are rejected, missing keys take
the defaults below, and :func:`emit_config` writes the fully resolved form
back out so that parse -> emit -> parse is the identity.
"""
from dataclasses import asdict, dataclass, field, fields, is_dataclass
import math
import types
import typing

import yaml

SCHEMA_VERSION = 1
MODES = ("eigen-semi", "eigen-full", "advect", "ns2d")
REQUIRED_KEYS = ("version", "mode")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, msg, key=None, line=None):
        where = []
        if key:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {msg}" if where else msg)
        self.key = key
        self.line = line


@dataclass
class EigenConfig:
    N: int = 40
    P: int = 3
    c: float = 1.0
    lam: float = 1.0
    Z: int = 1
    eta: float | None = 1e-3
    chi_f: float | None = None
    sfd_delta: float = 1.0
    k_points: int = 64
    dt: float | None = None
    search_dt: list[float] | None = None
    search_schemes: list[str] = field(default_factory=lambda: ["penalty", "combined"])


@dataclass
class AdvectConfig:
    N: int = 40
    P: int = 3
    c: float = 1.0
    lam: float = 1.0
    Z: int = 1
    k_nondim: float = 0.3223
    dt: float = 1e-5
    t_final: float = 1.1
    eta: float | None = None
    chi_f: float | None = None
    sfd_delta: float = 1.0
    snapshot_every: int = 0


@dataclass
class GasConfig:
    gamma: float = 1.4
    Re: float | None = None
    Pr: float = 0.72
    M: float | None = None
    alpha: float = 0.0


@dataclass
class MeshConfig:
    preset: str | None = None
    core_x: list[float] | None = None
    core_y: list[float] | None = None
    size: float | None = None
    domain_x: list[float] | None = None
    domain_y: list[float] | None = None
    stretch: list[float] | None = None
    counts: list[int] | None = None
    elements: int | None = None


@dataclass
class IbmConfig:
    eta: float | None = None
    chi_f: float | None = None
    sfd_delta: float = 100.0


@dataclass
class OutputConfig:
    record_every: int = 10
    snapshot_every: int = 0
    checkpoint_every: int = 0


@dataclass
class Ns2dConfig:
    case: str = "cylinder"
    P: int = 2
    scheme: str = "lserk"
    dt: float | None = None
    t_final: float = 1.0
    kick: float = 0.05
    gas: GasConfig = field(default_factory=GasConfig)
    mesh: MeshConfig = field(default_factory=MeshConfig)
    ibm: IbmConfig = field(default_factory=IbmConfig)
    probes: list[list[float]] | None = None
    output: OutputConfig = field(default_factory=OutputConfig)


@dataclass
class RunConfig:
    version: int = SCHEMA_VERSION
    mode: str = "advect"
    output_dir: str = "out"
    deterministic: bool = True
    eigen: EigenConfig = field(default_factory=EigenConfig)
    advect: AdvectConfig = field(default_factory=AdvectConfig)
    ns2d: Ns2dConfig = field(default_factory=Ns2dConfig)


@dataclass
class SweepConfig:
    eta: list[float | None] = field(default_factory=lambda: [None])
    chi_f: list[float | None] = field(default_factory=lambda: [None])
    sfd_delta: list[float] = field(default_factory=lambda: [1.0])
    repeats: int = 1
    calibrate_dt: bool = True


# ----- generic typed loading -----------------------------------------------

def _is_optional(tp):
    return typing.get_origin(tp) in (typing.Union, types.UnionType) and type(None) in typing.get_args(tp)


def _coerce(value, tp, key):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = typing.get_args(tp)
        if value is None:
            if type(None) in args:
                return None
            raise ConfigError("must not be null", key)
        errors = []
        for a in args:
            if a is type(None):
                continue
            try:
                return _coerce(value, a, key)
            except ConfigError as e:
                errors.append(str(e))
        raise ConfigError(f"invalid value {value!r}", key)
    if value is None:
        raise ConfigError("must not be null", key)
    if is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(f"expected a mapping, got {type(value).__name__}", key)
        return _build(tp, value, key)
    if origin is list:
        (inner,) = typing.get_args(tp)
        if not isinstance(value, list):
            raise ConfigError(f"expected a list, got {type(value).__name__}", key)
        return [_coerce(v, inner, f"{key}[{i}]") for i, v in enumerate(value)]
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", key)
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", key)
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            # YAML 1.1 leaves forms such as 1e-3 as strings
            if isinstance(value, str):
                try:
                    return float(value)
                except ValueError:
                    pass
            raise ConfigError(f"expected a number, got {value!r}", key)
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", key)
        return value
    raise ConfigError(f"unsupported type {tp}", key)


def _build(cls, data, prefix=""):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in fields(cls)}
    for k in data:
        if k not in names:
            path = f"{prefix}.{k}" if prefix else str(k)
            raise ConfigError(f"unknown key (allowed: {', '.join(sorted(names))})", path)
    kwargs = {}
    for f in fields(cls):
        if f.name in data:
            path = f"{prefix}.{f.name}" if prefix else f.name
            kwargs[f.name] = _coerce(data[f.name], hints[f.name], path)
    return cls(**kwargs)


# ----- semantic checks -----------------------------------------------------

def _positive(value, key, allow_none=False):
    if value is None and allow_none:
        return
    if value is None or not (value > 0 and math.isfinite(value)):
        raise ConfigError(f"must be a positive finite number, got {value!r}", key)


def validate(cfg):
    if cfg.version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {cfg.version} (this build reads {SCHEMA_VERSION})",
                          "version")
    if cfg.mode not in MODES:
        raise ConfigError(f"must be one of {', '.join(MODES)}", "mode")
    for name in ("eigen", "advect"):
        sec = getattr(cfg, name)
        if sec.N < 2:
            raise ConfigError("need at least two elements", f"{name}.N")
        if sec.P < 0:
            raise ConfigError("must be >= 0", f"{name}.P")
        if not 1 <= sec.Z < sec.N:
            raise ConfigError("slab must cover between 1 and N-1 elements", f"{name}.Z")
        _positive(sec.eta, f"{name}.eta", allow_none=True)
        _positive(sec.chi_f, f"{name}.chi_f", allow_none=True)
        _positive(sec.sfd_delta, f"{name}.sfd_delta")
    if cfg.eigen.k_points < 3:
        raise ConfigError("need at least three wavenumbers", "eigen.k_points")
    if cfg.mode == "eigen-full" and cfg.eigen.dt is None:
        raise ConfigError("required for the fully discrete analysis", "eigen.dt")
    _positive(cfg.eigen.dt, "eigen.dt", allow_none=True)
    for i, v in enumerate(cfg.eigen.search_dt or []):
        _positive(v, f"eigen.search_dt[{i}]")
    for i, v in enumerate(cfg.eigen.search_schemes):
        if v not in ("penalty", "sfd", "combined"):
            raise ConfigError("must be penalty, sfd or combined", f"eigen.search_schemes[{i}]")
    _positive(cfg.advect.dt, "advect.dt")
    _positive(cfg.advect.t_final, "advect.t_final")
    if cfg.advect.snapshot_every < 0:
        raise ConfigError("must be >= 0", "advect.snapshot_every")
    ns = cfg.ns2d
    if ns.case not in ("naca0012", "cylinder", "vortex"):
        raise ConfigError("must be one of naca0012, cylinder, vortex", "ns2d.case")
    if ns.scheme not in ("rk3", "lserk"):
        raise ConfigError("must be rk3 or lserk", "ns2d.scheme")
    if ns.P < 1:
        raise ConfigError("must be >= 1", "ns2d.P")
    _positive(ns.dt, "ns2d.dt", allow_none=True)
    _positive(ns.t_final, "ns2d.t_final")
    _positive(ns.ibm.eta, "ns2d.ibm.eta", allow_none=True)
    _positive(ns.ibm.chi_f, "ns2d.ibm.chi_f", allow_none=True)
    _positive(ns.ibm.sfd_delta, "ns2d.ibm.sfd_delta")
    _positive(ns.gas.Re, "ns2d.gas.Re", allow_none=True)
    _positive(ns.gas.M, "ns2d.gas.M", allow_none=True)
    for key in ("record_every", "snapshot_every", "checkpoint_every"):
        if getattr(ns.output, key) < 0:
            raise ConfigError("must be >= 0", f"ns2d.output.{key}")
    if ns.output.record_every == 0:
        raise ConfigError("must be >= 1", "ns2d.output.record_every")
    m = ns.mesh
    presets = {"naca0012": ("coarse", "fine"), "cylinder": ("full", "reduced"), "vortex": ()}[ns.case]
    if m.preset is not None and m.preset not in presets:
        allowed = ", ".join(presets) or "none"
        raise ConfigError(f"unknown preset for case {ns.case} (allowed: {allowed})", "ns2d.mesh.preset")
    for key in ("core_x", "core_y", "domain_x", "domain_y", "stretch", "counts"):
        v = getattr(m, key)
        if v is not None and len(v) != 2:
            raise ConfigError("expected two entries", f"ns2d.mesh.{key}")
    if ns.probes is not None:
        for i, p in enumerate(ns.probes):
            if len(p) != 2:
                raise ConfigError("expected [x, y]", f"ns2d.probes[{i}]")
    return cfg


# ----- entry points --------------------------------------------------------

def _load_yaml(text):
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"syntax error: {exc.problem or exc}", line=line) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"syntax error: {exc}") from None
    return data


def parse_config(text):
    """Validated :class:`RunConfig` from YAML text."""
    data = _load_yaml(text)
    if data is None or data == {}:
        raise ConfigError(f"empty configuration; required keys: {', '.join(REQUIRED_KEYS)}")
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping")
    missing = [k for k in REQUIRED_KEYS if k not in data]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    return validate(_build(RunConfig, data))


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def parse_sweep(text):
    data = _load_yaml(text)
    if not isinstance(data, dict):
        raise ConfigError("sweep file must be a mapping")
    return _build(SweepConfig, data, "sweep")


def to_dict(cfg):
    return asdict(cfg)


def emit_config(cfg):
    """YAML text of the fully resolved configuration."""
    return yaml.safe_dump(to_dict(cfg), sort_keys=False, default_flow_style=False)
