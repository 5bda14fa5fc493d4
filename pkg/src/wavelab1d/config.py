"""Flat ``key = value`` configuration with dotted sections.

Grammar: one ``key = value`` pair per line; ``#`` starts a comment; keys are
dotted lowercase identifiers (``grid.dx``); values are numbers, bare words,
``true``/``false`` or comma-separated number lists.  Unknown keys are
rejected per subcommand, and every physical parameter is validated against
its type invariants.  ``emit`` writes the fully resolved configuration in
canonical sorted order, so parse(emit(cfg)) == cfg.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .grid import GridSpec, InitialData, Nonlinearity

_FLOAT, _INT, _STR, _BOOL, _LIST = "float", "int", "str", "bool", "float_list"


@dataclass(frozen=True)
class KeySpec:
    vtype: str
    default: object  # None marks a value computed during resolution


_NL = {
    "nl.p": KeySpec(_FLOAT, 3.0),
    "nl.sign": KeySpec(_STR, "defocusing"),
}

_GRID = {
    "grid.x_min": KeySpec(_FLOAT, None),
    "grid.x_max": KeySpec(_FLOAT, None),
    "grid.dx": KeySpec(_FLOAT, 2e-3),
    "grid.cfl": KeySpec(_FLOAT, 1.0),
}

_INIT = {
    "init.kind": KeySpec(_STR, "gaussian"),
    "init.amplitude": KeySpec(_FLOAT, 1.0),
    "init.center": KeySpec(_FLOAT, 0.0),
    "init.width": KeySpec(_FLOAT, 1.0),
    "init.radius": KeySpec(_FLOAT, 1.0),
    "init.power": KeySpec(_INT, 2),
    "init.velocity_fraction": KeySpec(_FLOAT, 0.0),
    "init.mirror": KeySpec(_BOOL, False),
}

_RUN_COMMON = {
    "run.t_end": KeySpec(_FLOAT, 5.0),
    "run.sample_every": KeySpec(_FLOAT, 1.0),
    "run.t_samples": KeySpec(_LIST, None),
    "run.guard": KeySpec(_FLOAT, 1e8),
    "thresholds.conservation_tol": KeySpec(_FLOAT, 0.01),
}


def _run(t_end, sample_every, extra=None):
    base = dict(_RUN_COMMON)
    base["run.t_end"] = KeySpec(_FLOAT, t_end)
    base["run.sample_every"] = KeySpec(_FLOAT, sample_every)
    if extra:
        base.update(extra)
    return base


def _with_defaults(group: dict, **over) -> dict:
    out = dict(group)
    for key, value in over.items():
        out[key] = KeySpec(out[key].vtype, value)
    return out


SCHEMAS: dict[str, dict[str, KeySpec]] = {
    "simulate": {**_NL, **_GRID, **_INIT, **_run(5.0, 1.0, {
        "run.eta": KeySpec(_FLOAT, 1.0),
    })},
    "decay": {**_NL, **_GRID, **_INIT, **_run(60.0, 5.0, {
        "run.c": KeySpec(_FLOAT, 0.5),
        "thresholds.energy_ratio": KeySpec(_FLOAT, 0.1),
        "thresholds.norm_ratio": KeySpec(_FLOAT, 0.2),
    })},
    "tail": {**_NL, **_GRID, **_INIT, **_run(30.0, 5.0, {
        "run.R": KeySpec(_FLOAT, 0.0),
        "run.margin_cells": KeySpec(_INT, 3),
    })},
    "retraction": {**_NL, **_GRID, **_INIT, **_run(40.0, 2.0, {
        "run.eta": KeySpec(_FLOAT, 2.0),
        "thresholds.retraction_floor": KeySpec(_FLOAT, 0.01),
        "thresholds.monotonicity_tol": KeySpec(_FLOAT, 1e-8),
    })},
    "conjecture": {**_NL, **_GRID, **_INIT, **_run(40.0, 5.0, {
        "run.eta": KeySpec(_FLOAT, 1.0),
        "probe.offset": KeySpec(_FLOAT, 0.5),
        "probe.length": KeySpec(_FLOAT, 2.0),
        "thresholds.retraction_ratio": KeySpec(_FLOAT, 0.1),
        "thresholds.weak_probe_ratio": KeySpec(_FLOAT, 0.2),
        "thresholds.strong_probe_ratio": KeySpec(_FLOAT, 0.2),
        "thresholds.monotonicity_tol": KeySpec(_FLOAT, 1e-8),
    })},
    "focusing": {**_with_defaults(_NL, **{"nl.sign": "focusing"}),
                 **_GRID,
                 **_with_defaults(_INIT, **{"init.kind": "polynomial_bump",
                                            "init.amplitude": 6.0}),
                 **_run(20.0, 0.05, {
                     "thresholds.norm_blowup": KeySpec(_FLOAT, 1e6),
                 })},
    "concentration": {**_NL, **_GRID,
                      **_with_defaults(_INIT, **{"init.kind": "polynomial_bump",
                                                 "init.center": 3.0,
                                                 "init.mirror": True}),
                      **_run(50.0, 5.0, {
                          "run.q_baseline_time": KeySpec(_FLOAT, 5.0),
                          "thresholds.q_floor_ratio": KeySpec(_FLOAT, 0.2),
                          "thresholds.evenness_tol": KeySpec(_FLOAT, 1e-10),
                      })},
    "flux-check": {**_NL, **_GRID, **_INIT, **{
        "flux.a": KeySpec(_FLOAT, -1.0),
        "flux.b": KeySpec(_FLOAT, 1.0),
        "flux.h": KeySpec(_FLOAT, 0.5),
        "flux.t0": KeySpec(_FLOAT, 0.0),
        "flux.which": KeySpec(_STR, "plus"),
        "thresholds.flux_residual": KeySpec(_FLOAT, 1e-4),
        "run.guard": KeySpec(_FLOAT, 1e8),
    }},
    "trapezoid": {**_NL, **_GRID, **_INIT, **{
        "trapezoid.eta": KeySpec(_FLOAT, 0.0),
        "trapezoid.t1": KeySpec(_FLOAT, 0.0),
        "trapezoid.t2": KeySpec(_FLOAT, 1.0),
        "trapezoid.which": KeySpec(_STR, "plus"),
        "thresholds.trapezoid_residual": KeySpec(_FLOAT, 1e-4),
        "run.guard": KeySpec(_FLOAT, 1e8),
    }},
    "selfsimilar": {
        "ode.p": KeySpec(_FLOAT, 3.0),
        "ode.a": KeySpec(_FLOAT, 1.0),
        "ode.b": KeySpec(_FLOAT, 0.0),
        "ode.delta": KeySpec(_FLOAT, 1e-4),
        "ode.tol": KeySpec(_FLOAT, 1e-10),
        "ode.samples": KeySpec(_INT, 4001),
        "ray.R": KeySpec(_FLOAT, 1.0),
        "ray.R1": KeySpec(_FLOAT, 2.0),
        "ray.t_list": KeySpec(_LIST, (10.0, 20.0, 40.0, 80.0)),
        "thresholds.semi_energy_mono": KeySpec(_FLOAT, 1e-8),
    },
    "cp-table": {
        "cp.p_values": KeySpec(_LIST, (2.0, 3.0, 5.0)),
    },
}

SUBCOMMANDS = tuple(SCHEMAS)


def parse_text(text: str) -> dict[str, str]:
    """Raw key -> value strings; rejects malformed lines and duplicates."""
    raw: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(line_no, "expected 'key = value'")
        key, _, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ParseError(line_no, "empty key or value")
        if key in raw:
            raise ParseError(line_no, f"duplicate key {key!r}")
        raw[key] = value
    return raw


def _convert(key: str, spec: KeySpec, text: str):
    try:
        if spec.vtype == _FLOAT:
            return float(text)
        if spec.vtype == _INT:
            return int(text)
        if spec.vtype == _BOOL:
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if spec.vtype == _LIST:
            return tuple(float(tok) for tok in text.split(",") if tok.strip())
        return text
    except ValueError:
        raise ValidationError(key, f"cannot parse {text!r} as {spec.vtype}")


@dataclass(frozen=True)
class Config:
    """Fully resolved configuration for one subcommand."""

    subcommand: str
    values: tuple  # sorted (key, value) pairs; tuples keep Config hashable

    def __getitem__(self, key):
        for k, v in self.values:
            if k == key:
                return v
        raise KeyError(key)

    def as_dict(self) -> dict:
        return dict(self.values)

    def emit(self) -> str:
        lines = []
        for key, value in self.values:
            if isinstance(value, tuple):
                rendered = ",".join(repr(float(v)) for v in value)
            elif isinstance(value, bool):
                rendered = "true" if value else "false"
            elif isinstance(value, float):
                rendered = repr(value)
            else:
                rendered = str(value)
            lines.append(f"{key} = {rendered}")
        return "\n".join(lines) + "\n"

    # -- domain object builders ---------------------------------------

    def nonlinearity(self) -> Nonlinearity:
        return Nonlinearity(p=self["nl.p"], sign=self["nl.sign"])

    def initial_data(self) -> InitialData:
        kind = self["init.kind"]
        if kind == "gaussian":
            return InitialData.gaussian(
                amplitude=self["init.amplitude"], center=self["init.center"],
                width=self["init.width"],
                velocity_fraction=self["init.velocity_fraction"],
                mirror=self["init.mirror"])
        if kind == "polynomial_bump":
            return InitialData.polynomial_bump(
                amplitude=self["init.amplitude"], center=self["init.center"],
                radius=self["init.radius"], power=self["init.power"],
                velocity_fraction=self["init.velocity_fraction"],
                mirror=self["init.mirror"])
        raise ValidationError("init.kind",
                              f"{kind!r} cannot be built from a config file")

    def grid(self) -> GridSpec:
        x_min, x_max, dx = self["grid.x_min"], self["grid.x_max"], self["grid.dx"]
        n_cells = int(round((x_max - x_min) / dx))
        return GridSpec(x_min=x_min, x_max=x_max, n_cells=n_cells, cfl=self["grid.cfl"])

    def ode_params(self):
        from .selfsimilar import OdeParams
        return OdeParams(p=self["ode.p"], a=self["ode.a"], b=self["ode.b"],
                         delta=self["ode.delta"], tol=self["ode.tol"])

    def t_samples(self) -> tuple:
        return self["run.t_samples"]

    def thresholds(self) -> dict:
        return {k.split(".", 1)[1]: v for k, v in self.values
                if k.startswith("thresholds.")}


def resolve(subcommand: str, raw: dict[str, str] | None = None,
            overrides: dict[str, str] | None = None) -> Config:
    """Fill defaults, convert types, compute derived values and validate."""
    if subcommand not in SCHEMAS:
        raise ValidationError("subcommand", f"unknown subcommand {subcommand!r}")
    schema = SCHEMAS[subcommand]
    merged: dict[str, str] = dict(raw or {})
    for key, value in (overrides or {}).items():
        merged[key] = value

    values: dict[str, object] = {}
    for key, text in merged.items():
        if key == "scenario":
            if text != subcommand:
                raise ValidationError("scenario", f"config says {text!r}, running "
                                      f"{subcommand!r}")
            continue
        if key not in schema:
            raise ValidationError(key, f"unknown key for {subcommand!r}")
        values[key] = _convert(key, schema[key], text)
    for key, spec in schema.items():
        values.setdefault(key, spec.default)

    _resolve_derived(subcommand, values)
    cfg = Config(subcommand=subcommand, values=tuple(sorted(values.items())))
    _validate(cfg)
    return cfg


def _resolve_derived(subcommand: str, values: dict):
    if "grid.dx" in values:
        dx = values["grid.dx"]
        if not (isinstance(dx, float) and dx > 0.0):
            raise ValidationError("grid.dx", "dx must be a positive number")
        if values["grid.x_min"] is None or values["grid.x_max"] is None:
            init = _tentative_init(values)
            support = init.support_interval()
            radius = max(abs(support[0]), abs(support[1])) if support else 1.0
            horizon = values.get("run.t_end")
            if horizon is None:
                if "flux.t0" in values:
                    horizon = values["flux.t0"] + 2.0 * values["flux.h"]
                elif "trapezoid.t2" in values:
                    horizon = values["trapezoid.t2"]
                else:
                    horizon = 0.0
            # the lattice support cone spreads one cell per step, i.e. at
            # speed 1/cfl, so undersize domains would trip DomainTooSmall
            cfl = values.get("grid.cfl", 1.0)
            half = radius + horizon / cfl + 2.0
            n_half = int(math.ceil(half / dx - 1e-9))
            values["grid.x_min"] = -n_half * dx
            values["grid.x_max"] = n_half * dx
        span = values["grid.x_max"] - values["grid.x_min"]
        n_cells = round(span / dx)
        if n_cells < 2 or abs(n_cells * dx - span) > 1e-6 * span:
            raise ValidationError("grid.dx", "dx does not divide the domain span")
    if "run.t_end" in values and values.get("run.t_samples") is None:
        t_end = values["run.t_end"]
        every = values["run.sample_every"]
        if not every > 0.0:
            raise ValidationError("run.sample_every", "must be positive")
        n = int(math.floor(t_end / every + 1e-9))
        samples = [round(i * every, 12) for i in range(n + 1)]
        if samples[-1] < t_end - 1e-9:
            samples.append(t_end)
        values["run.t_samples"] = tuple(samples)


def _tentative_init(values) -> InitialData:
    cfg = Config(subcommand="simulate", values=tuple(sorted(
        (k, v) for k, v in values.items() if k.startswith("init."))))
    return cfg.initial_data()


def _validate(cfg: Config):
    d = cfg.as_dict()
    if "nl.p" in d:
        if not d["nl.p"] > 1.0:
            raise ValidationError("nl.p", "p must exceed 1")
        Nonlinearity(p=d["nl.p"], sign=d["nl.sign"])
    if "grid.cfl" in d and not 0.0 < d["grid.cfl"] <= 1.0:
        raise ValidationError("grid.cfl", "cfl in (0,1]")
    if "grid.dx" in d:
        cfg.grid()
        cfg.initial_data()
    if "run.t_end" in d and d["run.t_end"] < 0.0:
        raise ValidationError("run.t_end", "must be nonnegative")
    if cfg.subcommand == "decay" and not 0.0 < d["run.c"] < 1.0:
        raise ValidationError("run.c", "speed fraction in (0,1)")
    if cfg.subcommand == "concentration":
        if not d["init.mirror"]:
            raise ValidationError("init.mirror",
                                  "concentration needs even (mirrored) data")
        if d["init.velocity_fraction"] != 0.0:
            raise ValidationError("init.velocity_fraction",
                                  "nonzero velocity breaks evenness")
    if cfg.subcommand == "focusing" and d["nl.sign"] != "focusing":
        raise ValidationError("nl.sign", "focusing scenario needs nl.sign = focusing")
    if cfg.subcommand in ("decay", "retraction", "conjecture", "concentration", "tail") \
            and d["nl.sign"] == "focusing":
        raise ValidationError("nl.sign", "directional energy scenarios are defocusing")
    if "ode.p" in d:
        cfg.ode_params()
    if "ray.R" in d and not 0.0 < d["ray.R"] < d["ray.R1"]:
        raise ValidationError("ray.R", "need 0 < R < R1")
    if "cp.p_values" in d:
        for p in d["cp.p_values"]:
            if not p > 1.0:
                raise ValidationError("cp.p_values", "p must exceed 1")


def parse_config(text: str, subcommand: str,
                 overrides: dict[str, str] | None = None) -> Config:
    """Parse config text and resolve it for a subcommand."""
    return resolve(subcommand, parse_text(text), overrides)
