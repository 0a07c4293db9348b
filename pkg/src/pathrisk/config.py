"""TOML run configuration: scenario geometry, variance grid and method settings."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bench import METHODS, BenchmarkConfig
from .errors import ConfigError, PathRiskError
from .path import trajectory_from_dict
from .quadrature import QuadratureSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_CONFIG = """\
# Three paths from (0, 0) to (5, 0) passing an obstacle at (2.5, 0).

[geometry]
robot_radius = 0.05
obstacle_radius = 0.05
obstacle_mean = [2.5, 0.0]

[[trajectories]]
name = "mu_A"
family = "segment"
start = [0.0, 0.0]
end = [5.0, 0.0]

[[trajectories]]
name = "mu_B"
family = "quadratic"
c0 = [0.0, 0.0]
c1 = [5.0, 0.5]
c2 = [0.0, -0.5]

[[trajectories]]
name = "mu_C"
family = "quadratic"
c0 = [0.0, 0.0]
c1 = [5.0, 1.0]
c2 = [0.0, -1.0]

[uncertainty]
# Sigma_T = sigma * I; 10 values log-spaced from 1e-3 to 1, endpoints included.
sigma_logspace = [-3.0, 0.0, 10]

[montecarlo]
trials = 10000
seed = 0
workers = 1
# ds_max defaults to a tenth of the combined radius.

[stagewise]
waypoints = 50
bound_mode = "center"

[grid]
cell_sizes = [0.001953125]

[quadrature]
rel_tol = 1e-8
abs_tol = 1e-13
max_subdivisions = 40

[bench]
methods = ["stagewise", "parametrization", "risk_density", "grid"]
timing_repeats = 3
workers = 1

[radius_sweep]
radii_logspace = [-2.0, 0.0, 10]
sigmas = [0.001, 0.01, 0.1, 1.0]
mode = "sensitivity_h3"

[estimate]
trajectory = "mu_A"
sigma = 0.01
method = "risk_density"
"""

_TABLES = {
    "geometry": {"robot_radius", "obstacle_radius", "obstacle_mean"},
    "uncertainty": {"sigma_values", "sigma_logspace"},
    "montecarlo": {"trials", "seed", "workers", "ds_max"},
    "stagewise": {"waypoints", "bound_mode"},
    "grid": {"cell_sizes"},
    "quadrature": {"rel_tol", "abs_tol", "max_subdivisions"},
    "bench": {"methods", "timing_repeats", "workers", "cache_dir"},
    "radius_sweep": {"radii", "radii_logspace", "sigmas", "mode"},
    "estimate": {"trajectory", "sigma", "method"},
}


@dataclass(frozen=True)
class EstimateDefaults:
    trajectory: str = "mu_A"
    sigma: float = 0.01
    method: str = "risk_density"


@dataclass(frozen=True)
class RunConfig:
    bench: BenchmarkConfig
    estimate: EstimateDefaults
    source: str = "<default>"


def _logspace(spec, what):
    try:
        a, b, n = spec
        n = int(n)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be [start_exponent, stop_exponent, count]") from None
    if n < 1:
        raise ConfigError(f"{what} count must be >= 1")
    return tuple(float(v) for v in np.logspace(float(a), float(b), n))


def _values(table, explicit, spaced, what, default=None):
    if explicit in table and spaced in table:
        raise ConfigError(f"give either {explicit} or {spaced}, not both")
    if explicit in table:
        return tuple(float(v) for v in table[explicit])
    if spaced in table:
        return _logspace(table[spaced], what)
    if default is None:
        raise ConfigError(f"missing {explicit} or {spaced}")
    return default


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    unknown = set(data) - set(_TABLES) - {"trajectories"}
    if unknown:
        raise ConfigError(f"{source}: unknown tables {sorted(unknown)}")
    for name, keys in _TABLES.items():
        extra = set(data.get(name, {})) - keys
        if extra:
            raise ConfigError(f"{source}: unknown keys in [{name}]: {sorted(extra)}")
    try:
        return _build(data, source)
    except ConfigError:
        raise
    except (PathRiskError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _build(data: dict, source: str) -> RunConfig:
    geo = data.get("geometry", {})
    trajs = data.get("trajectories")
    if not trajs:
        raise ConfigError(f"{source}: at least one [[trajectories]] entry is required")
    names = tuple(str(t.get("name", f"path_{k}")) for k, t in enumerate(trajs))
    if len(set(names)) != len(names):
        raise ConfigError(f"{source}: trajectory names must be unique")
    mc = data.get("montecarlo", {})
    sw = data.get("stagewise", {})
    grid = data.get("grid", {})
    quad = data.get("quadrature", {})
    bench = data.get("bench", {})
    sweep = data.get("radius_sweep", {})
    est = data.get("estimate", {})
    base = BenchmarkConfig()
    cfg = BenchmarkConfig(
        sigma_values=_values(data.get("uncertainty", {}), "sigma_values", "sigma_logspace",
                             "sigma_logspace"),
        trajectories=tuple(trajectory_from_dict(t) for t in trajs),
        names=names,
        radii=(float(geo.get("robot_radius", base.radii[0])),
               float(geo.get("obstacle_radius", base.radii[1]))),
        obstacle_mean=tuple(float(v) for v in geo.get("obstacle_mean", base.obstacle_mean)),
        mc_trials=int(mc.get("trials", base.mc_trials)),
        mc_seed=int(mc.get("seed", base.mc_seed)),
        mc_ds_max=float(mc["ds_max"]) if "ds_max" in mc else None,
        mc_workers=int(mc.get("workers", base.mc_workers)),
        stagewise_N=int(sw.get("waypoints", base.stagewise_N)),
        stagewise_mode=str(sw.get("bound_mode", base.stagewise_mode)),
        grid_cell_sizes=tuple(float(h) for h in grid.get("cell_sizes", base.grid_cell_sizes)),
        quadrature=QuadratureSpec(**quad),
        methods=tuple(bench.get("methods", base.methods)),
        timing_repeats=int(bench.get("timing_repeats", base.timing_repeats)),
        workers=int(bench.get("workers", base.workers)),
        cache_dir=bench.get("cache_dir"),
        sweep_radii=_values(sweep, "radii", "radii_logspace", "radii_logspace", base.sweep_radii),
        sweep_sigmas=tuple(float(s) for s in sweep.get("sigmas", base.sweep_sigmas)),
        sweep_mode=str(sweep.get("mode", base.sweep_mode)),
    )
    defaults = EstimateDefaults(
        trajectory=str(est.get("trajectory", names[0])),
        sigma=float(est.get("sigma", EstimateDefaults.sigma)),
        method=str(est.get("method", EstimateDefaults.method)),
    )
    if defaults.trajectory not in names:
        raise ConfigError(f"{source}: estimate.trajectory {defaults.trajectory!r} not in {names}")
    if defaults.method not in METHODS:
        raise ConfigError(f"{source}: estimate.method must be one of {METHODS}")
    if not defaults.sigma > 0:
        raise ConfigError(f"{source}: estimate.sigma must be positive")
    return RunConfig(cfg, defaults, source)


def load_config(path=None) -> RunConfig:
    """Parse ``path``, or the built-in default benchmark when ``path`` is None."""
    if path is None:
        return parse_config(DEFAULT_CONFIG, "<default>")
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from None
    return parse_config(text, str(p))
