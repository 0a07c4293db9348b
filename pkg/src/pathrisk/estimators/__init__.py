"""Collision-probability estimators for a disk swept along a path."""

from .combine import combine_h1, combine_h2_discrete, lune_mass, p_config
from .grid import grid_estimate, grid_probability, rasterize_swept_set
from .montecarlo import default_ds_max, mc_ground_truth, min_distances
from .scenario import Estimate, Scenario
from .stagewise import density_peak_in_disk, stagewise_estimate
from .tube import (
    cp_update,
    naive_param_h3,
    risk_density,
    risk_density_estimate,
    sensitivity,
    tube_integral,
    volterra_h2,
)

__all__ = [
    "Estimate",
    "Scenario",
    "combine_h1",
    "combine_h2_discrete",
    "cp_update",
    "default_ds_max",
    "density_peak_in_disk",
    "grid_estimate",
    "grid_probability",
    "lune_mass",
    "mc_ground_truth",
    "min_distances",
    "naive_param_h3",
    "p_config",
    "rasterize_swept_set",
    "risk_density",
    "risk_density_estimate",
    "sensitivity",
    "stagewise_estimate",
    "tube_integral",
    "volterra_h2",
]
