"""Disk shapes, their Minkowski combination and the overlap test.

Only disks are handled. Two disks of radii ``r_r`` and ``r_o`` collide
exactly when the difference of their centers lies in the disk of radius
``r_r + r_o`` centered at the origin, so all collision questions reduce
to a point-in-disk test in the difference domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidShapeError


def _finite_vector(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.shape != (2,):
        raise InvalidShapeError(f"{name} must be a 2-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidShapeError(f"{name} must be finite, got {arr}")
    return arr


def _check_radius(radius):
    radius = float(radius)
    if not math.isfinite(radius) or radius <= 0.0:
        raise InvalidShapeError(f"radius must be positive and finite, got {radius}")
    return radius


@dataclass(frozen=True)
class Disk:
    """A disk of given radius around a nominal center (workspace units)."""

    radius: float
    nominal_center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "radius", _check_radius(self.radius))
        center = _finite_vector(self.nominal_center, "nominal_center")
        object.__setattr__(self, "nominal_center", (float(center[0]), float(center[1])))

    @property
    def area(self) -> float:
        return math.pi * self.radius**2


@dataclass(frozen=True)
class CombinedBody:
    """Minkowski combination of two disks: a disk of the summed radius.

    The radius doubles as the tube half-width when the body is swept
    along a path.
    """

    radius: float

    def __post_init__(self):
        object.__setattr__(self, "radius", _check_radius(self.radius))

    @property
    def area(self) -> float:
        return math.pi * self.radius**2


def minkowski_combine(robot: Disk, obstacle: Disk) -> CombinedBody:
    """Combine robot and obstacle disks into one body centered at the origin."""
    # Disk() already validates, but callers may pass duck-typed objects.
    r = _check_radius(robot.radius) + _check_radius(obstacle.radius)
    return CombinedBody(r)


def collision_check(d_ro, noise, body: CombinedBody) -> bool:
    """Overlap indicator in the difference domain.

    ``d_ro`` is the nominal robot-minus-obstacle offset and ``noise`` a
    realization of the relative position error. Contact at distance
    exactly ``body.radius`` counts as a collision.
    """
    d = np.asarray(d_ro, dtype=float)
    n = np.asarray(noise, dtype=float)
    return bool(math.hypot(*(n - d)) <= body.radius)
