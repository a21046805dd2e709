"""Experiment configurations: parsing, validation, serialization, builders.

A configuration names everything a study needs (domain, interfaces, flux
laws, initial datum, march parameters, resolution ladder) in a plain YAML
mapping.  Validation reports the offending field by dotted path.  Builders
turn a validated configuration into the library objects the solver consumes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigError, GridAlignmentError
from .fluxes import PiecewiseFlux, linear_flux, quadratic_flux
from .grid import PiecewiseConstant, SampledTable, build_grid
from .solver import Inflow, Outflow, ProblemSpec, SolverConfig

_FLUX_KINDS = ("linear", "quadratic")
_NUMERICAL_FLUXES = ("upwind", "godunov", "engquist_osher")


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated experiment description."""

    xmin: float
    xmax: float
    interfaces: tuple[float, ...]
    fluxes: tuple[dict, ...]
    initial: dict
    lam: float
    t_end: float
    resolutions: tuple[int, ...]
    reference_n: int
    numerical_flux: str = "upwind"
    boundary_left: dict = field(default_factory=lambda: {"kind": "outflow"})
    snapshots: tuple[float, ...] = ()
    outputs: dict = field(default_factory=dict)


# {{{ parsing and validation


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        _fail(path, f"must be finite, got {value}")
    return value


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    return int(value)


def _as_map(value, path: str, required=(), optional=()) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected a mapping, got {type(value).__name__}")
    for key in required:
        if key not in value:
            _fail(path, f"missing required key {key!r}")
    for key in value:
        if key not in required and key not in optional:
            _fail(f"{path}.{key}", "unknown key")
    return value


def from_dict(raw: dict) -> ExperimentConfig:
    """Validate a plain mapping and freeze it into an :class:`ExperimentConfig`."""
    _as_map(
        raw,
        "config",
        required=("domain", "interfaces", "fluxes", "initial", "lambda",
                  "t_end", "resolutions", "reference_n"),
        optional=("numerical_flux", "boundary", "snapshots", "outputs"),
    )
    dom = _as_map(raw["domain"], "domain", required=("xmin", "xmax"))
    xmin = _as_float(dom["xmin"], "domain.xmin")
    xmax = _as_float(dom["xmax"], "domain.xmax")
    if xmin >= xmax:
        _fail("domain", f"xmin={xmin} must be below xmax={xmax}")

    if not isinstance(raw["interfaces"], (list, tuple)):
        _fail("interfaces", "expected a list")
    interfaces = tuple(
        _as_float(x, f"interfaces[{i}]") for i, x in enumerate(raw["interfaces"])
    )
    if any(b <= a for a, b in zip(interfaces, interfaces[1:])):
        _fail("interfaces", f"must be strictly increasing, got {list(interfaces)}")
    if any(not xmin < x < xmax for x in interfaces):
        _fail("interfaces", f"must lie strictly inside ({xmin}, {xmax})")

    if not isinstance(raw["fluxes"], (list, tuple)):
        _fail("fluxes", "expected a list")
    if len(raw["fluxes"]) != len(interfaces) + 1:
        _fail(
            "fluxes",
            f"{len(interfaces)} interfaces need {len(interfaces) + 1} laws, "
            f"got {len(raw['fluxes'])}",
        )
    fluxes = tuple(
        _validated_flux(fx, f"fluxes[{i}]") for i, fx in enumerate(raw["fluxes"])
    )

    initial = _validated_initial(raw["initial"], "initial")
    lam = _as_float(raw["lambda"], "lambda")
    if lam <= 0.0:
        _fail("lambda", f"must be positive, got {lam}")
    t_end = _as_float(raw["t_end"], "t_end")
    if t_end < 0.0:
        _fail("t_end", f"must be nonnegative, got {t_end}")

    if not isinstance(raw["resolutions"], (list, tuple)) or not raw["resolutions"]:
        _fail("resolutions", "expected a nonempty list")
    resolutions = tuple(
        _as_int(x, f"resolutions[{i}]") for i, x in enumerate(raw["resolutions"])
    )
    reference_n = _as_int(raw["reference_n"], "reference_n")
    for i, n in enumerate(resolutions):
        if n < 1:
            _fail(f"resolutions[{i}]", f"must be positive, got {n}")
        if reference_n % n != 0:
            _fail(
                f"resolutions[{i}]",
                f"reference_n={reference_n} is not a multiple of {n}",
            )
    for label, n in [
        *((f"resolutions[{i}]", n) for i, n in enumerate(resolutions)),
        ("reference_n", reference_n),
    ]:
        try:
            build_grid(xmin, xmax, n, interfaces)
        except GridAlignmentError as exc:
            _fail(label, str(exc))

    numerical_flux = raw.get("numerical_flux", "upwind")
    if numerical_flux not in _NUMERICAL_FLUXES:
        _fail("numerical_flux", f"expected one of {_NUMERICAL_FLUXES}, got {numerical_flux!r}")

    boundary_left = _validated_boundary(raw.get("boundary", {"left": "outflow"}))

    snaps_raw = raw.get("snapshots", [])
    if not isinstance(snaps_raw, (list, tuple)):
        _fail("snapshots", "expected a list")
    snapshots = tuple(
        _as_float(s, f"snapshots[{i}]") for i, s in enumerate(snaps_raw)
    )
    if any(not 0.0 <= s <= t_end for s in snapshots):
        _fail("snapshots", f"times must lie within [0, {t_end}]")

    outputs = _as_map(
        raw.get("outputs", {}), "outputs", optional=("run_dir", "convergence_csv")
    )
    outputs = {k: str(v) for k, v in outputs.items()}

    return ExperimentConfig(
        xmin=xmin,
        xmax=xmax,
        interfaces=interfaces,
        fluxes=fluxes,
        initial=initial,
        lam=lam,
        t_end=t_end,
        resolutions=resolutions,
        reference_n=reference_n,
        numerical_flux=numerical_flux,
        boundary_left=boundary_left,
        snapshots=snapshots,
        outputs=outputs,
    )


def _validated_flux(raw, path: str) -> dict:
    raw = _as_map(raw, path, required=("kind",), optional=("a", "b"))
    kind = raw["kind"]
    if kind not in _FLUX_KINDS:
        _fail(f"{path}.kind", f"expected one of {_FLUX_KINDS}, got {kind!r}")
    a = _as_float(raw.get("a", 1.0), f"{path}.a")
    b = _as_float(raw.get("b", 0.0), f"{path}.b")
    if kind == "linear" and a <= 0.0:
        _fail(f"{path}.a", f"linear law needs a positive slope, got {a}")
    if kind == "quadratic" and a == 0.0:
        _fail(f"{path}.a", "quadratic law needs a != 0")
    return {"kind": kind, "a": a, "b": b}


def _validated_initial(raw, path: str) -> dict:
    if not isinstance(raw, dict) or "kind" not in raw:
        _fail(path, "expected a mapping with a 'kind' key")
    kind = raw["kind"]
    if kind == "piecewise_constant":
        _as_map(raw, path, required=("kind", "breakpoints", "values"))
        bps = tuple(
            _as_float(x, f"{path}.breakpoints[{i}]")
            for i, x in enumerate(raw["breakpoints"])
        )
        vals = tuple(
            _as_float(v, f"{path}.values[{i}]") for i, v in enumerate(raw["values"])
        )
        if len(vals) != len(bps) + 1:
            _fail(path, f"{len(bps)} breakpoints need {len(bps) + 1} values, got {len(vals)}")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            _fail(f"{path}.breakpoints", "must be strictly increasing")
        return {"kind": kind, "breakpoints": list(bps), "values": list(vals)}
    if kind == "gaussian_offset":
        _as_map(raw, path, required=("kind", "base", "amplitude", "width", "center"))
        width = _as_float(raw["width"], f"{path}.width")
        if width <= 0.0:
            _fail(f"{path}.width", f"must be positive, got {width}")
        return {
            "kind": kind,
            "base": _as_float(raw["base"], f"{path}.base"),
            "amplitude": _as_float(raw["amplitude"], f"{path}.amplitude"),
            "width": width,
            "center": _as_float(raw["center"], f"{path}.center"),
        }
    if kind == "table":
        _as_map(raw, path, required=("kind", "path"))
        return {"kind": kind, "path": str(raw["path"])}
    _fail(f"{path}.kind", f"unknown initial datum kind {kind!r}")


def _validated_boundary(raw) -> dict:
    raw = _as_map(raw, "boundary", optional=("left", "right"))
    right = raw.get("right", "outflow")
    if right != "outflow":
        _fail("boundary.right", "only 'outflow' is supported on the right")
    left = raw.get("left", "outflow")
    if left == "outflow":
        return {"kind": "outflow"}
    left = _as_map(left, "boundary.left", required=("kind",), optional=("trace",))
    if left["kind"] == "outflow":
        return {"kind": "outflow"}
    if left["kind"] != "inflow":
        _fail("boundary.left.kind", f"expected outflow or inflow, got {left['kind']!r}")
    trace = _as_map(
        left.get("trace"), "boundary.left.trace", required=("kind",),
        optional=("value", "path"),
    )
    if trace["kind"] == "constant":
        return {
            "kind": "inflow",
            "trace": {"kind": "constant",
                      "value": _as_float(trace.get("value"), "boundary.left.trace.value")},
        }
    if trace["kind"] == "table":
        if "path" not in trace:
            _fail("boundary.left.trace", "table trace needs a 'path'")
        return {"kind": "inflow", "trace": {"kind": "table", "path": str(trace["path"])}}
    _fail("boundary.left.trace.kind", f"expected constant or table, got {trace['kind']!r}")


# }}}


# {{{ serialization


def to_dict(config: ExperimentConfig) -> dict:
    """Canonical plain mapping; ``from_dict`` of it reproduces ``config``."""
    out = {
        "domain": {"xmin": config.xmin, "xmax": config.xmax},
        "interfaces": list(config.interfaces),
        "fluxes": [dict(fx) for fx in config.fluxes],
        "initial": dict(config.initial),
        "lambda": config.lam,
        "t_end": config.t_end,
        "numerical_flux": config.numerical_flux,
        "boundary": {"left": _boundary_to_dict(config.boundary_left)},
        "resolutions": list(config.resolutions),
        "reference_n": config.reference_n,
        "snapshots": list(config.snapshots),
    }
    if config.outputs:
        out["outputs"] = dict(config.outputs)
    return out


def _boundary_to_dict(left: dict):
    if left["kind"] == "outflow":
        return "outflow"
    return {"kind": "inflow", "trace": dict(left["trace"])}


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a YAML mapping")
    return from_dict(raw)


def save_config(config: ExperimentConfig, path):
    with open(path, "w") as fh:
        yaml.safe_dump(to_dict(config), fh, sort_keys=False)


def config_digest(config: ExperimentConfig) -> str:
    """Hex digest identifying the configuration contents."""
    canonical = json.dumps(to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# }}}


# {{{ presets


def preset(name: str) -> ExperimentConfig:
    """Built-in configurations for the two reference studies."""
    if name == "experiment1":
        return from_dict({
            "domain": {"xmin": -1.0, "xmax": 1.0},
            "interfaces": [0.0],
            "fluxes": [
                {"kind": "linear", "a": 1.0, "b": 0.0},
                {"kind": "quadratic", "a": 1.0, "b": 0.0},
            ],
            "initial": {
                "kind": "piecewise_constant",
                "breakpoints": [-0.5],
                "values": [0.5, 2.0],
            },
            "lambda": 0.5,
            "t_end": 0.9,
            "resolutions": [16, 32, 64, 128, 256, 512, 1024],
            "reference_n": 2048,
            "snapshots": [0.3, 0.6, 0.9],
        })
    if name == "experiment2":
        return from_dict({
            "domain": {"xmin": -1.0, "xmax": 1.0},
            "interfaces": [0.0],
            "fluxes": [
                {"kind": "quadratic", "a": 1.0, "b": 0.0},
                {"kind": "linear", "a": 1.0, "b": 0.0},
            ],
            "initial": {
                "kind": "gaussian_offset",
                "base": 2.0,
                "amplitude": 1.0,
                "width": 0.1,
                "center": -0.75,
            },
            "lambda": 0.2,
            "t_end": 0.5,
            "resolutions": [16, 32, 64, 128, 256, 512, 1024],
            "reference_n": 2048,
            "snapshots": [0.2, 0.3, 0.5],
        })
    raise ConfigError(f"unknown preset {name!r}; available: experiment1, experiment2")


# }}}


# {{{ builders


def initial_datum(config: ExperimentConfig):
    spec = config.initial
    if spec["kind"] == "piecewise_constant":
        return PiecewiseConstant(tuple(spec["breakpoints"]), tuple(spec["values"]))
    if spec["kind"] == "gaussian_offset":
        base, amp = spec["base"], spec["amplitude"]
        width, center = spec["width"], spec["center"]

        def bump(x):
            return base + amp * np.exp(-np.square((np.asarray(x, dtype=float) - center) / width))

        return bump
    return _load_table(spec["path"])


def data_range(config: ExperimentConfig) -> tuple[float, float]:
    """Hull of the initial datum's values (and inflow trace values, if any)."""
    spec = config.initial
    if spec["kind"] == "piecewise_constant":
        lo, hi = min(spec["values"]), max(spec["values"])
    elif spec["kind"] == "gaussian_offset":
        base, amp = spec["base"], spec["amplitude"]
        lo, hi = min(base, base + amp), max(base, base + amp)
    else:
        table = _load_table(spec["path"])
        lo, hi = float(table.values.min()), float(table.values.max())
    if config.boundary_left["kind"] == "inflow":
        trace = config.boundary_left["trace"]
        if trace["kind"] == "constant":
            lo, hi = min(lo, trace["value"]), max(hi, trace["value"])
        else:
            tab = _load_table(trace["path"])
            lo, hi = min(lo, float(tab.values.min())), max(hi, float(tab.values.max()))
    return lo, hi


def build_model(config: ExperimentConfig) -> PiecewiseFlux:
    lo, hi = data_range(config)
    pad = 1e-6 * max(1.0, abs(lo), abs(hi))
    interval = (lo - pad, hi + pad)
    segments = []
    for i, fx in enumerate(config.fluxes):
        try:
            if fx["kind"] == "linear":
                segments.append(linear_flux(fx["a"], fx["b"]))
            else:
                segments.append(quadratic_flux(fx["a"], fx["b"], interval=interval))
        except ValueError as exc:
            raise ConfigError(f"fluxes[{i}]: {exc}") from exc
    return PiecewiseFlux(config.interfaces, segments)


def build_problem(config: ExperimentConfig) -> ProblemSpec:
    return ProblemSpec((config.xmin, config.xmax), initial_datum(config))


def build_boundary(config: ExperimentConfig):
    left = config.boundary_left
    if left["kind"] == "outflow":
        return Outflow()
    trace = left["trace"]
    if trace["kind"] == "constant":
        value = trace["value"]

        def constant(t):
            return value + 0.0 * np.asarray(t, dtype=float)

        return Inflow(constant)
    return Inflow(_load_table(trace["path"]))


def build_solver_config(config: ExperimentConfig, numerical_flux: Optional[str] = None) -> SolverConfig:
    return SolverConfig(
        lam=config.lam,
        t_end=config.t_end,
        numerical_flux=numerical_flux or config.numerical_flux,
        left=build_boundary(config),
    )


def _load_table(path) -> SampledTable:
    try:
        data = np.genfromtxt(path, delimiter=",", comments="#")
    except OSError as exc:
        raise ConfigError(f"cannot read table {path}: {exc}") from exc
    data = np.atleast_2d(data)
    if data.shape[0] and np.all(np.isnan(data[0])):
        data = data[1:]  # header row
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise ConfigError(f"table {path} must have two numeric columns")
    try:
        return SampledTable(data[:, 0], data[:, 1])
    except ValueError as exc:
        raise ConfigError(f"table {path}: {exc}") from exc


# }}}
