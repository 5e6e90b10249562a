"""TOML run configurations.

Schema (``format_version = 1``)::

    format_version = 1
    dimension = 2
    order = 4                        # optional jet-order budget
    output = "report.jsonl"          # optional

    [spray]                          # catalog entry ...
    catalog = "minkowski"
    params = { n = 2 }
    # ... or inline:  G = ["0", "0"]   plus optional params / x_box / x_radius
    # optional: deform = "<field>" (G + P y)  or  pm = "<field>" (PM-spray)

    [fields.Q]                       # same two forms; inline uses expr + degree,
    catalog = "oneform_funk"         # potential = "<sigma(x)>" gives sigma_0,
    params = { a = [1, 0] }          # kind = "finsler" makes a Finsler metric

    [[checks]]
    name = "is_funk"
    field = "Q"
    expect = "pass"                  # or "fail"

    [sampling]
    seed = 7
    count = 50
    x_box = [[-0.5, 0.5], [-0.5, 0.5]]
    y_mode = "sphere"                # or "sphere_scaled"

    [tolerances]
    tol = 1e-8
    neg_threshold = 1e-3
    floor = 1e-6
    solver_tol = 1e-12
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError

FORMAT_VERSION = 1

DEFAULT_SAMPLING = {"seed": 0, "count": 50, "x_box": None, "y_mode": "sphere"}
DEFAULT_TOLERANCES = {"tol": 1e-8, "neg_threshold": 1e-3, "floor": 1e-6, "solver_tol": 1e-12}
DEFAULT_ORDER = 4

_TOP_KEYS = {"format_version", "dimension", "order", "output", "spray", "fields", "checks", "sampling",
             "tolerances", "workers"}


@dataclass
class RunConfig:
    dimension: int
    spray: dict[str, Any]
    fields: dict[str, dict[str, Any]]
    checks: list[dict[str, Any]]
    sampling: dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_SAMPLING))
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    order: int = DEFAULT_ORDER
    output: str | None = None
    workers: int = 4
    raw: dict[str, Any] = field(default_factory=dict)


def _need(d: dict, key: str, path: str, kind=None):
    if key not in d:
        raise ConfigError(f"missing key {key!r}", path)
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ConfigError(f"{key!r} should be {getattr(kind, '__name__', kind)}, got {type(v).__name__}",
                          f"{path}.{key}" if path else key)
    return v


def _model_spec(d: Any, path: str) -> dict[str, Any]:
    if not isinstance(d, dict):
        raise ConfigError("expected a table", path)
    forms = [k for k in ("catalog", "G", "expr", "potential") if k in d]
    if len(forms) != 1:
        raise ConfigError("give exactly one of catalog / G / expr / potential", path)
    if "params" in d and not isinstance(d["params"], dict):
        raise ConfigError("params must be a table", f"{path}.params")
    return dict(d)


def from_dict(raw: dict[str, Any]) -> RunConfig:
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {sorted(unknown)}", sorted(unknown)[0])
    fv = raw.get("format_version", FORMAT_VERSION)
    if fv != FORMAT_VERSION:
        raise ConfigError(f"unsupported format_version {fv!r}", "format_version")
    dim = _need(raw, "dimension", "", int)
    if dim < 1:
        raise ConfigError("dimension must be >= 1", "dimension")
    spray = _model_spec(_need(raw, "spray", ""), "spray")
    if "G" in spray and (not isinstance(spray["G"], list) or len(spray["G"]) != dim):
        raise ConfigError(f"G must be a list of {dim} expressions", "spray.G")
    fields_raw = raw.get("fields", {})
    if not isinstance(fields_raw, dict):
        raise ConfigError("fields must be a table of named fields", "fields")
    fields = {name: _model_spec(spec, f"fields.{name}") for name, spec in fields_raw.items()}
    for key in ("deform", "pm"):
        if key in spray and spray[key] not in fields:
            raise ConfigError(f"unknown field {spray[key]!r}", f"spray.{key}")
    checks = raw.get("checks", [])
    if not isinstance(checks, list) or not checks:
        raise ConfigError("at least one [[checks]] entry is required", "checks")
    from .runner import CHECKS

    for i, c in enumerate(checks):
        path = f"checks[{i}]"
        if not isinstance(c, dict):
            raise ConfigError("expected a table", path)
        name = _need(c, "name", path, str)
        if name not in CHECKS:
            raise ConfigError(f"unknown check {name!r}; known: {', '.join(sorted(CHECKS))}", f"{path}.name")
        for ref in CHECKS[name].field_keys:
            if ref not in c:
                raise ConfigError(f"check {name!r} needs {ref!r}", path)
            if c[ref] not in fields:
                raise ConfigError(f"unknown field {c[ref]!r}", f"{path}.{ref}")
        exp = c.get("expect", "scalar" if name == "classify" else "pass")
        if exp not in CHECKS[name].expectations:
            raise ConfigError(f"expect must be one of {CHECKS[name].expectations}", f"{path}.expect")
    sampling = dict(DEFAULT_SAMPLING)
    sampling.update(raw.get("sampling", {}))
    if set(sampling) - set(DEFAULT_SAMPLING):
        raise ConfigError(f"unknown sampling key(s) {sorted(set(sampling) - set(DEFAULT_SAMPLING))}", "sampling")
    if sampling["y_mode"] not in ("sphere", "sphere_scaled"):
        raise ConfigError("y_mode must be 'sphere' or 'sphere_scaled'", "sampling.y_mode")
    if not isinstance(sampling["count"], int) or sampling["count"] < 1:
        raise ConfigError("count must be a positive integer", "sampling.count")
    if sampling["x_box"] is not None and len(sampling["x_box"]) != dim:
        raise ConfigError(f"x_box needs {dim} intervals", "sampling.x_box")
    tols = dict(DEFAULT_TOLERANCES)
    tols.update(raw.get("tolerances", {}))
    if set(tols) - set(DEFAULT_TOLERANCES):
        raise ConfigError(f"unknown tolerance(s) {sorted(set(tols) - set(DEFAULT_TOLERANCES))}", "tolerances")
    order = raw.get("order", DEFAULT_ORDER)
    if not isinstance(order, int) or order < 1:
        raise ConfigError("order must be a positive integer", "order")
    workers = raw.get("workers", 4)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers must be a positive integer", "workers")
    return RunConfig(dim, spray, fields, checks, sampling, tols, order, raw.get("output"), workers, raw)


def load(path: str | Path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", str(path)) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", str(path)) from None
    return from_dict(raw)
