"""Run configuration: YAML schema, validation, and deterministic echoes.

A config file is a single YAML document.  Validation reports the dotted
path of the offending field so errors are actionable.  Every artifact a
run produces embeds the normalized config echo plus the schema version,
which makes runs bit-reproducible given the same build.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from . import topography
from .geometry import ChannelSpec

__all__ = ["SCHEMA_VERSION", "ConfigError", "RunConfig", "load_config"]

SCHEMA_VERSION = "iwchannel-config/1"

_MISSING = object()


class ConfigError(ValueError):
    """Schema violation carrying the dotted path of the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


def _section(doc, name, required=True):
    val = doc.get(name, _MISSING)
    if val is _MISSING:
        if required:
            raise ConfigError(name, "required section is missing")
        return {}
    if not isinstance(val, dict):
        raise ConfigError(name, f"expected a mapping, got {type(val).__name__}")
    return val


def _scalar(sec, path, key, typ, default=_MISSING):
    val = sec.get(key, _MISSING)
    if val is _MISSING:
        if default is _MISSING:
            raise ConfigError(f"{path}.{key}", "required field is missing")
        return default
    if typ is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, typ):
        raise ConfigError(f"{path}.{key}",
                          f"expected {typ.__name__}, got {type(val).__name__}")
    return val


def _pair(sec, path, key, default=_MISSING):
    val = sec.get(key, _MISSING)
    if val is _MISSING:
        if default is _MISSING:
            raise ConfigError(f"{path}.{key}", "required field is missing")
        return default
    if (not isinstance(val, (list, tuple)) or len(val) != 2
            or not all(isinstance(v, (int, float)) for v in val)):
        raise ConfigError(f"{path}.{key}", "expected a pair of numbers")
    return (float(val[0]), float(val[1]))


@dataclass
class RunConfig:
    """Validated run parameters plus the normalized echo of the source."""

    channel: dict
    solver: dict
    forcing: dict
    analysis: dict
    evolution: dict
    sweep: dict
    seed: int
    echo: dict = field(repr=False, default_factory=dict)

    def channel_spec(self) -> ChannelSpec:
        return ChannelSpec(topography.from_dict(self.channel))

    @property
    def omega(self) -> complex:
        return complex(self.solver["lambda"], -self.solver["eps"])

    def echo_dict(self) -> dict:
        return {"schema": SCHEMA_VERSION, "config": self.echo}


def load_config(path) -> RunConfig:
    """Parse and validate a YAML config file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("(file)", f"not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("(file)", "top level must be a mapping")

    schema = doc.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError("schema", f"unsupported schema {schema!r}; "
                          f"this build reads {SCHEMA_VERSION!r}")

    chan_sec = _section(doc, "channel")
    kind = _scalar(chan_sec, "channel", "kind", str)
    try:
        topo = topography.from_dict(chan_sec)
    except (ValueError, TypeError) as exc:
        raise ConfigError("channel", str(exc)) from exc
    channel = {"kind": kind, **{k: float(v) for k, v in chan_sec.items()
                                if k != "kind"}}

    s = _section(doc, "solver")
    solver = {
        "L": _scalar(s, "solver", "L", float, 15.0),
        "tau": _scalar(s, "solver", "tau", float, 0.5),
        "n1": _scalar(s, "solver", "n1", int, 160),
        "n2": _scalar(s, "solver", "n2", int, 60),
        "lambda": _scalar(s, "solver", "lambda", float),
        "eps": _scalar(s, "solver", "eps", float, 1e-5),
        "profile_center": _scalar(s, "solver", "profile_center", float, 0.9),
        "profile_steepness": _scalar(s, "solver", "profile_steepness", float, 20.0),
        "profile_kind": _scalar(s, "solver", "profile_kind", str, "tanh"),
    }
    if not 0.0 < solver["lambda"] < 1.0:
        raise ConfigError("solver.lambda", "must lie strictly in (0, 1)")
    if solver["eps"] < 0.0:
        raise ConfigError("solver.eps", "must be nonnegative")

    f = _section(doc, "forcing", required=False)
    forcing = {
        "center": _pair(f, "forcing", "center", (0.1, 0.0)),
        "width": _scalar(f, "forcing", "width", float, 0.1),
        "amplitude": _scalar(f, "forcing", "amplitude", float, 1.0),
        "carriers": [float(c) for c in f.get("carriers", [5.0, -5.0])],
        "envelope": _scalar(f, "forcing", "envelope", str, "gaussian"),
    }
    if forcing["envelope"] not in ("gaussian",):
        raise ConfigError("forcing.envelope",
                          f"unknown envelope {forcing['envelope']!r}")
    if not isinstance(f.get("carriers", []), list):
        raise ConfigError("forcing.carriers", "expected a list of numbers")

    a = _section(doc, "analysis", required=False)
    analysis = {
        "K": _scalar(a, "analysis", "K", int, 0),
        "beta": _scalar(a, "analysis", "beta", float, -0.6),
        "io_threshold": _scalar(a, "analysis", "io_threshold", float, 1e-2),
        "cutoff_L": _scalar(a, "analysis", "cutoff_L", float, 2.2),
        "support_box": _pair(a, "analysis", "support_box", (-3.2, 3.2)),
        "n_probe": _scalar(a, "analysis", "n_probe", int, 50),
    }
    if analysis["beta"] >= -0.5:
        raise ConfigError("analysis.beta", "must be < -1/2")

    e = _section(doc, "evolution", required=False)
    evolution = {
        "L_e": _scalar(e, "evolution", "L_e", float, 6.0),
        "K": _scalar(e, "evolution", "K", int, 12),
        "M": _scalar(e, "evolution", "M", int, 60),
        "t_max": _scalar(e, "evolution", "t_max", float, 40.0),
        "n_times": _scalar(e, "evolution", "n_times", int, 41),
    }

    w = _section(doc, "sweep", required=False)
    sweep = {}
    if w:
        sweep["kind"] = _scalar(w, "sweep", "kind", str)
        if sweep["kind"] not in ("eps", "tau", "n"):
            raise ConfigError("sweep.kind", "must be one of eps, tau, n")
        vals = w.get("values")
        if (not isinstance(vals, list) or not vals
                or not all(isinstance(v, (int, float)) for v in vals)):
            raise ConfigError("sweep.values", "expected a non-empty number list")
        sweep["values"] = [float(v) for v in vals]

    seed = _scalar(doc, "(top)", "seed", int, 0)

    echo = {"schema": SCHEMA_VERSION, "channel": channel, "solver": solver,
            "forcing": forcing, "analysis": analysis, "evolution": evolution,
            "sweep": sweep, "seed": seed}
    del topo
    return RunConfig(channel=channel, solver=solver, forcing=forcing,
                     analysis=analysis, evolution=evolution, sweep=sweep,
                     seed=seed, echo=echo)
