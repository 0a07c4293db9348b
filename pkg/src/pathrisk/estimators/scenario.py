"""Scenario and Estimate value types shared by every estimator."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from ..errors import CovarianceError, DomainError
from ..gauss import Gaussian2
from ..geometry import CombinedBody
from ..path import Trajectory, closest_parameter


@dataclass(frozen=True, eq=False)
class Scenario:
    """A path, an uncertain obstacle and the combined body radius.

    ``sigma_t`` is the zero-mean relative position uncertainty. Restricting
    ``param_range`` to ``(s, 1)`` gives the collision probability of the
    remaining part of the path.
    """

    trajectory: Trajectory
    obstacle_mean: np.ndarray
    body: CombinedBody
    sigma_t: Gaussian2
    param_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        mean = np.asarray(self.obstacle_mean, dtype=float).reshape(2)
        object.__setattr__(self, "obstacle_mean", mean)
        if np.any(self.sigma_t.mean != 0.0):
            raise CovarianceError("sigma_t must have zero mean")
        lo, hi = map(float, self.param_range)
        if not (0.0 <= lo <= hi <= 1.0):
            raise DomainError(f"param_range must be a subinterval of [0, 1], got {(lo, hi)}")
        object.__setattr__(self, "param_range", (lo, hi))

    @classmethod
    def isotropic(cls, trajectory, obstacle_mean, radius, variance, param_range=(0.0, 1.0)):
        return cls(trajectory, obstacle_mean, CombinedBody(radius),
                   Gaussian2.isotropic(variance), param_range)

    @property
    def radius(self) -> float:
        return self.body.radius

    @property
    def obstacle(self) -> Gaussian2:
        """Obstacle position distribution in the workspace."""
        return self.sigma_t.shifted(self.obstacle_mean)

    def with_radius(self, radius) -> "Scenario":
        return Scenario(self.trajectory, self.obstacle_mean, CombinedBody(radius),
                        self.sigma_t, self.param_range)

    def with_range(self, lo, hi) -> "Scenario":
        return Scenario(self.trajectory, self.obstacle_mean, self.body, self.sigma_t, (lo, hi))

    def check_param(self, s):
        lo, hi = self.param_range
        arr = np.asarray(s, dtype=float)
        if np.any(arr < lo) or np.any(arr > hi):
            raise DomainError(f"parameter outside scenario range {self.param_range}")
        return arr

    def offset(self, s):
        """Robot-minus-obstacle nominal offset at ``s``."""
        return self.trajectory.position(s) - self.obstacle_mean

    def peak_parameter(self) -> float:
        """Parameter where the path comes closest to the obstacle in Mahalanobis distance."""
        lo, hi = self.param_range
        return closest_parameter(self.trajectory, self.obstacle_mean,
                                 self.sigma_t.precision, lo, hi)


@dataclass(frozen=True)
class Estimate:
    """Method-tagged probability. ``raw`` is the value before clamping to 1."""

    method: str
    value: float
    raw: float
    wall_time: float
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_raw(cls, method, raw, wall_time, **meta):
        raw = max(float(raw), 0.0)
        return cls(method, min(raw, 1.0), raw, float(wall_time), meta)


@contextmanager
def stopwatch():
    """Yields a one-element list that receives the elapsed seconds."""
    box = [0.0]
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = time.perf_counter() - t0
