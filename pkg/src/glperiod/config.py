"""Run configuration: a single JSON key/value tree.

The shipped reference configuration doubles as schema documentation; every
field has a default, so a config file only needs the keys it overrides.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .errors import ConfigError
from .forcing import ForcingSpec, PerturbationSpec
from .operators import CutoffSpec, LinearOperatorSpec, auto_cutoffs, make_cutoffs, make_operator
from .periodic_solver import SolveOptions
from .spectral import Grid, GridConfig, make_grid


def reference_config() -> dict:
    """The pinned desk-scale experiment (dim 3, n=32, L=64, T=1, eps=1e-2)."""
    return {
        "grid": {
            "dim": 3,
            "n_per_axis": 32,
            "box_length": 64.0,
            "dealias_fraction": 2.0 / 3.0,
        },
        "period": 1.0,
        "cutoffs": "auto",  # or {"r1": ..., "r_inf": ...}
        "forcing": {
            "amplitude": 1e-2,
            "temporal_profile": "sin_fundamental",
            "harmonic": 1,
            "spatial_profile": "gauss_dipole",
            "sigma": None,  # null -> L/16
            "axis": 0,
        },
        "solve": {
            "max_iterations": 50,
            "z_tolerance": 1e-10,
            "m_t": 64,
            "zero_mode_tol": 1e-10,
            "nonlinearity_enabled": True,
        },
        "stability": {
            "t_max": 26.0,
            "amplitude": 1e-2,
            "profile": "gauss_dipole",
            "sigma": None,
            "axis": 0,
            "record_stride": 4,
            "order": 2,
            "linear_only": False,
        },
        "verify": {
            "samples": 200,
            "grid": {"dim": 3, "n_per_axis": 16, "box_length": 32.0},
            "m_t": 32,
            "solve_amplitude": 1e-2,
        },
        "sweep": {
            "epsilon": [1e-3, 3e-3, 1e-2],
            "m_t": [32, 64, 128],
            "n": [16, 32],
        },
        "seed": 12345,
        "output": {
            "dir": "runs/reference",
            "save_fields": False,
        },
    }


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, path + key + ".")
        else:
            out[key] = value
    return out


def load_config(path) -> dict:
    """Read a JSON config file and merge it over the reference defaults."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return _merge(reference_config(), raw)


def build_grid(cfg: dict) -> Grid:
    g = cfg["grid"]
    try:
        return make_grid(GridConfig(dim=int(g["dim"]), n_per_axis=int(g["n_per_axis"]),
                                    box_length=float(g["box_length"]),
                                    dealias_fraction=float(g["dealias_fraction"])))
    except ValueError as exc:
        raise ConfigError(f"invalid grid config: {exc}")


def build_operator(grid: Grid, cfg: dict) -> LinearOperatorSpec:
    period = float(cfg["period"])
    if not period > 0:
        raise ConfigError(f"period must be positive; got {period}")
    return make_operator(grid, period)


def build_cutoffs(grid: Grid, cfg: dict) -> CutoffSpec:
    period = float(cfg["period"])
    spec = cfg["cutoffs"]
    try:
        if spec == "auto":
            cutoffs = auto_cutoffs(grid, period)
        elif isinstance(spec, dict):
            cutoffs = make_cutoffs(float(spec["r1"]), float(spec["r_inf"]), grid)
        else:
            raise ConfigError(f"cutoffs must be 'auto' or an object; got {spec!r}")
        cutoffs.validate(grid, period)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"invalid cutoffs: {exc}")
    return cutoffs


def build_forcing_spec(cfg: dict) -> ForcingSpec:
    f = cfg["forcing"]
    try:
        return ForcingSpec(amplitude=float(f["amplitude"]), period=float(cfg["period"]),
                           temporal_profile=f["temporal_profile"],
                           harmonic=int(f["harmonic"]),
                           spatial_profile=f["spatial_profile"],
                           sigma=None if f["sigma"] is None else float(f["sigma"]),
                           axis=int(f["axis"]))
    except ValueError as exc:
        raise ConfigError(f"invalid forcing config: {exc}")


def build_solve_options(cfg: dict) -> SolveOptions:
    s = cfg["solve"]
    try:
        return SolveOptions(max_iterations=int(s["max_iterations"]),
                            z_tolerance=float(s["z_tolerance"]), m_t=int(s["m_t"]),
                            zero_mode_tol=float(s["zero_mode_tol"]),
                            nonlinearity_enabled=bool(s["nonlinearity_enabled"]))
    except ValueError as exc:
        raise ConfigError(f"invalid solve config: {exc}")


def build_perturbation_spec(cfg: dict) -> PerturbationSpec:
    s = cfg["stability"]
    try:
        return PerturbationSpec(amplitude=float(s["amplitude"]), profile=s["profile"],
                                sigma=None if s["sigma"] is None else float(s["sigma"]),
                                axis=int(s["axis"]))
    except ValueError as exc:
        raise ConfigError(f"invalid stability config: {exc}")
