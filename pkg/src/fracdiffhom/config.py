"""Scenario files: YAML parsing, normalization, hashing and coefficient loading."""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import math
import os
from dataclasses import replace
from typing import Any

import yaml

from fracdiffhom.cell import LayeredMatrix, PeriodicCoefficient1D
from fracdiffhom.errors import ConfigError

SUBCOMMANDS = ("homogenize", "convergence", "solve", "invert", "cross")

_COEF_DEFAULTS = {
    "constant": {"value": 1.0},
    "two_phase": {"values": [1.0, 3.0], "fraction": 0.5},
    "sinusoid": {"mean": 2.0, "amplitude": 1.0},
    "table": {},
}

_SWEEP = {
    "alpha": 0.5,
    "length": 1.0,
    "t_final": 1.0,
    "epsilons": [0.25, 0.125, 0.0625, 0.03125],
    "J": None,
    "M": None,
}

DEFAULTS: dict[str, dict[str, Any]] = {
    "homogenize": {"quad_points": 10000, "grid_points": 10000},
    "convergence": {**_SWEEP, "coefficient": {"kind": "sinusoid"}, "reference": "fdm"},
    "solve": {
        "method": "spectral",
        "alpha": 0.5,
        "length": math.pi,
        "p": 1.0,
        "u0_coeffs": [-1.0],
        "n_max": 64,
        "t_final": 1.0,
        "steps": 100,
        "J": 100,
        "coefficient": None,
        "epsilon": None,
        "nx": 101,
    },
    "invert": {
        "mode": "point",
        "alpha": 0.5,
        "length": math.pi,
        "u0_coeffs": [-1.0],
        "nu": 0.5,
        "mu": 3.0,
        "tolerance": 1e-8,
        "p_true": 1.7,
        "observation": None,
        "x0": math.pi / 2,
        "t0": 1.0,
        "omega": [0.0, math.pi],
        "interval": [0.0, 1.0],
        "window": [50.0, 500.0],
        "n_times": 200,
    },
    "cross": {
        "mode": "to_homogenized",
        **_SWEEP,
        "coefficient": {"kind": "sinusoid"},
        "omega": None,
        "interval": None,
        "tolerance": 1e-10,
        "family": {"kind": "sinusoid_shift", "amplitude": 1.0},
        "s_interval": [2.0, 4.0],
        "s_true": 2.0,
        "x0": None,
        "t0": 1.0,
        "nu": None,
        "mu": None,
    },
}

_ENUMS = {
    ("convergence", "reference"): ("fdm", "spectral"),
    ("solve", "method"): ("spectral", "fdm"),
    ("invert", "mode"): ("point", "region", "trace", "counterexample"),
    ("cross", "mode"): ("to_homogenized", "to_periodic"),
}


def load(path: str | os.PathLike) -> dict:
    """Parse a scenario file; YAML problems are reported with line and column."""
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}: invalid YAML{where}: {getattr(exc, 'problem', exc)}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    doc.setdefault("base_dir", os.path.dirname(os.path.abspath(path)))
    return doc


def _merge(defaults: dict, given: dict, where: str) -> dict:
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    out = copy.deepcopy(defaults)
    out.update(copy.deepcopy(given))
    return out


_INTEGER_KEYS = ("J", "M", "steps", "n_max", "nx", "n_times", "quad_points", "grid_points")


def _number(block: dict, key: str, where: str, positive: bool = False, lo=None, hi=None):
    v = block.get(key)
    if v is None:
        return
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key}: must be positive, got {v!r}")
    if lo is not None and not lo < v or hi is not None and not v < hi:
        raise ConfigError(f"{where}.{key}: must lie in ({lo}, {hi}), got {v!r}")
    if key in _INTEGER_KEYS:
        if int(v) != v:
            raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
        block[key] = int(v)
    else:
        block[key] = float(v)


def normalize_coefficient(spec: Any, where: str) -> dict:
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        spec = {"kind": "constant", "value": float(spec)}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{where}: coefficient needs a 'kind' field")
    kind = spec["kind"]
    if kind not in _COEF_DEFAULTS:
        raise ConfigError(f"{where}.kind: expected one of {sorted(_COEF_DEFAULTS)}, got {kind!r}")
    allowed = {"kind", "period", "nu", "mu", *(_COEF_DEFAULTS[kind])}
    if kind == "table":
        allowed |= {"file", "y", "values"}
    defaults = {k: None for k in allowed} | {"kind": kind, "period": 1.0, **_COEF_DEFAULTS[kind]}
    out = _merge(defaults, spec, where)
    for key in ("period", "nu", "mu", "value", "mean", "amplitude", "fraction"):
        _number(out, key, where, positive=key in ("period", "nu", "mu"))
    if kind == "table" and out.get("file") is None and out.get("y") is None:
        raise ConfigError(f"{where}: table coefficient needs 'file' or 'y'/'values'")
    return out


def normalize_layered(spec: dict, where: str) -> dict:
    entries = spec.get("entries")
    if not isinstance(entries, list) or not entries:
        raise ConfigError(f"{where}.entries: expected a square list of coefficients")
    n = len(entries)
    norm = []
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != n:
            raise ConfigError(f"{where}.entries[{i}]: row length must be {n}")
        norm.append([normalize_coefficient(e, f"{where}.entries[{i}][{j}]") for j, e in enumerate(row)])
    out = _merge({"entries": None, "nu": None, "mu": None, "period": 1.0}, spec, where)
    out["entries"] = norm
    for key in ("nu", "mu", "period"):
        _number(out, key, where, positive=True)
    if out["nu"] is None or out["mu"] is None:
        raise ConfigError(f"{where}: layered coefficient needs nu and mu")
    return out


def normalize(doc: dict, subcommand: str) -> dict:
    """Fill defaults and validate the block for ``subcommand``."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    block = doc.get(subcommand)
    if block is None:
        raise ConfigError(f"config has no '{subcommand}' block")
    if not isinstance(block, dict):
        raise ConfigError(f"{subcommand}: expected a mapping")
    defaults = DEFAULTS[subcommand]
    if subcommand == "homogenize":
        defaults = {**defaults, "coefficient": None, "layered": None}
    out = _merge(defaults, block, subcommand)
    for (cmd, key), choices in _ENUMS.items():
        if cmd == subcommand and out.get(key) not in choices:
            raise ConfigError(f"{cmd}.{key}: expected one of {list(choices)}, got {out.get(key)!r}")
    if "alpha" in out:
        _number(out, "alpha", subcommand, lo=0.0, hi=1.0)
    for key in ("length", "t_final", "p", "nu", "mu", "tolerance", "t0", "epsilon", "s_true"):
        if key in out:
            _number(out, key, subcommand, positive=True)
    for key in _INTEGER_KEYS:
        if key in out:
            _number(out, key, subcommand, positive=True)
    if "epsilons" in out:
        eps = out["epsilons"]
        if not isinstance(eps, list) or not eps or any(
            isinstance(e, bool) or not isinstance(e, (int, float)) or e <= 0 for e in eps
        ):
            raise ConfigError(f"{subcommand}.epsilons: expected a non-empty list of positive numbers")
        out["epsilons"] = [float(e) for e in eps]
    if subcommand == "homogenize":
        if (out["coefficient"] is None) == (out["layered"] is None):
            raise ConfigError("homogenize: give exactly one of 'coefficient' or 'layered'")
        if out["coefficient"] is not None:
            out["coefficient"] = normalize_coefficient(out["coefficient"], "homogenize.coefficient")
        else:
            out["layered"] = normalize_layered(out["layered"], "homogenize.layered")
    elif out.get("coefficient") is not None:
        out["coefficient"] = normalize_coefficient(out["coefficient"], f"{subcommand}.coefficient")
    result = {"scenario": str(doc.get("scenario", "default")), subcommand: out}
    if "base_dir" in doc:
        result["base_dir"] = doc["base_dir"]
    return result


def emit(normalized: dict) -> str:
    """YAML text that parses back to ``normalized``."""
    return yaml.safe_dump(normalized, sort_keys=True)


def input_hash(normalized: dict) -> str:
    body = {k: v for k, v in normalized.items() if k != "base_dir"}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _read_table(path: str) -> tuple[list[float], list[float]]:
    ys, vs = [], []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    y, v = float(row[0]), float(row[1])
                except (ValueError, IndexError) as exc:
                    if lineno == 1:
                        continue  # header
                    raise ConfigError(f"{path}:{lineno}: expected 'y,value', got {row!r}") from exc
                ys.append(y)
                vs.append(v)
    except FileNotFoundError as exc:
        raise ConfigError(f"coefficient table not found: {path}") from exc
    return ys, vs


def build_coefficient(spec: dict, base_dir: str = ".") -> PeriodicCoefficient1D:
    """Instantiate a normalized coefficient block."""
    kind, period = spec["kind"], spec.get("period", 1.0)
    if kind == "constant":
        coef = PeriodicCoefficient1D.constant(spec["value"], period)
    elif kind == "two_phase":
        coef = PeriodicCoefficient1D.two_phase(spec["values"], spec["fraction"], period)
    elif kind == "sinusoid":
        coef = PeriodicCoefficient1D.sinusoid(spec["mean"], spec["amplitude"], period)
    else:
        if spec.get("file"):
            ys, vs = _read_table(os.path.join(base_dir, spec["file"]))
        else:
            ys, vs = spec["y"], spec["values"]
        try:
            coef = PeriodicCoefficient1D.table(ys, vs, period)
        except ValueError as exc:
            raise ConfigError(f"table coefficient: {exc}") from exc
    nu = spec.get("nu")
    mu = spec.get("mu")
    if nu is not None or mu is not None:
        coef = replace(coef, nu=coef.nu if nu is None else nu, mu=coef.mu if mu is None else mu)
    return coef


def build_layered(spec: dict, base_dir: str = ".") -> LayeredMatrix:
    entries = [
        [
            e["value"] if e["kind"] == "constant" else build_coefficient(e, base_dir)
            for e in row
        ]
        for row in spec["entries"]
    ]
    return LayeredMatrix(entries, spec["nu"], spec["mu"], spec.get("period", 1.0))
