"""Collision probability of a disk robot moving along a planar path.

The obstacle position (relative to the robot) is Gaussian. Besides a
Monte Carlo reference the package provides the risk density estimate,
the naive swept-tube integral and its Volterra form, an occupancy-grid
estimate and the stage-wise chance-constraint sum.
"""

from .estimators import *  # noqa: F401,F403
from .estimators import __all__ as _est_all
from .gauss import Gaussian2, QuadratureSpec
from .geometry import CombinedBody, Disk, collision_check, minkowski_combine
from .path import Arc, Polyline, Quadratic, Segment, Trajectory, benchmark_paths

__version__ = "0.1.0"

__all__ = list(_est_all) + [
    "Arc",
    "CombinedBody",
    "Disk",
    "Gaussian2",
    "Polyline",
    "QuadratureSpec",
    "Quadratic",
    "Segment",
    "Trajectory",
    "benchmark_paths",
    "collision_check",
    "minkowski_combine",
]
