"""Planar parametric trajectories on s in [0, 1] and the swept-tube map.

The tube map offsets the centerline along the unit left normal,

    Phi(s, theta) = mu(s) + theta * n(s),

so ``theta`` is a metric off-track distance. Its Jacobian magnitude is
``|mu'(s)| * |1 - theta * kappa(s)|`` with ``kappa`` the signed curvature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RegularityError

_PARAM_EPS = 1e-12


def _check_param(s):
    arr = np.asarray(s, dtype=float)
    # NaN fails both comparisons, so it is rejected here too.
    if arr.size and not (arr.min() >= -_PARAM_EPS and arr.max() <= 1 + _PARAM_EPS):
        raise DomainError("curve parameter must lie in [0, 1]")
    return np.clip(arr, 0.0, 1.0)


def _vec(v):
    arr = np.asarray(v, dtype=float).reshape(2)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite coefficient {arr}")
    return arr


class Trajectory:
    """Base class: a twice differentiable curve on the unit parameter interval.

    Subclasses implement ``_eval(s)`` returning position, first and second
    derivative arrays of shape ``s.shape + (2,)``; ``s`` is already
    validated there.
    """

    family = "abstract"

    def _eval(self, s):
        raise NotImplementedError

    def evaluate(self, s):
        """Position, first and second derivative at ``s`` (scalar or array)."""
        return self._eval(_check_param(s))

    def position(self, s):
        return self.evaluate(s)[0]

    def to_dict(self) -> dict:
        raise NotImplementedError

    def length(self) -> float:
        return traj_length_between(self, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class Segment(Trajectory):
    """Straight segment from ``start`` to ``end``."""

    start: np.ndarray
    end: np.ndarray
    family = "segment"

    def __post_init__(self):
        object.__setattr__(self, "start", _vec(self.start))
        object.__setattr__(self, "end", _vec(self.end))

    def _eval(self, s):
        s = s[..., None]
        d = self.end - self.start
        pos = self.start + s * d
        return pos, np.broadcast_to(d, pos.shape).copy(), np.zeros_like(pos)

    def to_dict(self):
        return {"family": self.family, "start": self.start.tolist(), "end": self.end.tolist()}


@dataclass(frozen=True, eq=False)
class Quadratic(Trajectory):
    """``mu(s) = c0 + c1 s + c2 s^2`` with 2-vector coefficients."""

    c0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    family = "quadratic"

    def __post_init__(self):
        for name in ("c0", "c1", "c2"):
            object.__setattr__(self, name, _vec(getattr(self, name)))

    def _eval(self, s):
        s = s[..., None]
        pos = self.c0 + s * (self.c1 + s * self.c2)
        d1 = self.c1 + 2.0 * s * self.c2
        d2 = np.broadcast_to(2.0 * self.c2, pos.shape).copy()
        return pos, d1, d2

    def to_dict(self):
        return {"family": self.family, "c0": self.c0.tolist(), "c1": self.c1.tolist(),
                "c2": self.c2.tolist()}


@dataclass(frozen=True, eq=False)
class Polyline(Trajectory):
    """Piecewise-linear path through ``points`` with knots at ``k / (n - 1)``.

    Derivatives at an interior knot come from the segment to its right.
    """

    points: np.ndarray
    family = "polyline"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError("polyline needs at least two 2D points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("polyline points must be finite")
        object.__setattr__(self, "points", pts)

    def _eval(self, s):
        m = self.points.shape[0] - 1
        u = s * m
        idx = np.minimum(np.floor(u).astype(int), m - 1)
        t = (u - idx)[..., None]
        a = self.points[idx]
        b = self.points[idx + 1]
        d1 = (b - a) * m
        return a + t * (b - a), d1, np.zeros_like(d1)

    def to_dict(self):
        return {"family": self.family, "points": self.points.tolist()}


@dataclass(frozen=True, eq=False)
class Arc(Trajectory):
    """Circular arc ``center + R (cos a, sin a)`` with ``a = start_angle + sweep * s``."""

    center: np.ndarray
    radius: float
    start_angle: float
    sweep: float
    family = "arc"

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.radius > 0:
            raise ValueError("arc radius must be positive")

    def _eval(self, s):
        a = self.start_angle + self.sweep * s
        c, si = np.cos(a), np.sin(a)
        R, w = self.radius, self.sweep
        pos = self.center + R * np.stack([c, si], axis=-1)
        d1 = R * w * np.stack([-si, c], axis=-1)
        d2 = -R * w * w * np.stack([c, si], axis=-1)
        return pos, d1, d2

    def to_dict(self):
        return {"family": self.family, "center": self.center.tolist(), "radius": self.radius,
                "start_angle": self.start_angle, "sweep": self.sweep}


_FAMILIES = {cls.family: cls for cls in (Segment, Quadratic, Polyline, Arc)}


def trajectory_from_dict(d: dict) -> Trajectory:
    """Build a trajectory from its serialized form (see ``Trajectory.to_dict``)."""
    d = dict(d)
    family = d.pop("family", None)
    d.pop("name", None)
    if family not in _FAMILIES:
        raise ValueError(f"unknown trajectory family {family!r}; expected one of {sorted(_FAMILIES)}")
    try:
        return _FAMILIES[family](**d)
    except TypeError as exc:
        raise ValueError(f"bad fields for {family} trajectory: {exc}") from None


def curve_eval(traj: Trajectory, s):
    """``(position, d1, d2)`` at ``s``; raises DomainError outside [0, 1]."""
    return traj.evaluate(s)


def curvature(d1, d2):
    """Signed curvature from first and second derivatives."""
    cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    speed = np.hypot(d1[..., 0], d1[..., 1])
    return cross / speed**3


@dataclass(frozen=True)
class TubePoint:
    s: float
    theta: float
    position: np.ndarray
    gamma: float


def tube_points(traj: Trajectory, s, theta):
    """Vectorized tube map: returns ``(positions, gamma)`` for broadcast ``s, theta``."""
    s, theta = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(theta, dtype=float))
    pos, d1, d2 = traj.evaluate(s)
    speed = np.hypot(d1[..., 0], d1[..., 1])
    if np.any(speed <= 0.0):
        raise RegularityError("tangent vanishes; the tube normal is undefined")
    nx = -d1[..., 1] / speed
    ny = d1[..., 0] / speed
    cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    # |mu'| * |1 - theta * kappa| with kappa = cross / speed^3
    gamma = np.abs(speed - theta * cross / (speed * speed))
    out = np.stack([pos[..., 0] + theta * nx, pos[..., 1] + theta * ny], axis=-1)
    return out, gamma


def tube_map(traj: Trajectory, s: float, theta: float, T: float) -> TubePoint:
    """Single point of the swept tube with half-width ``T``."""
    if abs(theta) > T:
        raise DomainError(f"|theta|={abs(theta)} exceeds tube half-width {T}")
    pos, gamma = tube_points(traj, s, theta)
    return TubePoint(float(s), float(theta), pos, float(gamma))


def benchmark_paths() -> tuple[Trajectory, Trajectory, Trajectory]:
    """The three test paths from (0, 0) to (5, 0) past an obstacle at (2.5, 0).

    A is the straight line through the obstacle; B and C are parabolas
    with apex heights 0.125 and 0.25.
    """
    mu_a = Segment((0.0, 0.0), (5.0, 0.0))
    mu_b = Quadratic((0.0, 0.0), (5.0, 0.5), (0.0, -0.5))
    mu_c = Quadratic((0.0, 0.0), (5.0, 1.0), (0.0, -1.0))
    return mu_a, mu_b, mu_c


BENCHMARK_NAMES = ("mu_A", "mu_B", "mu_C")


def closest_parameter(traj: Trajectory, target, precision=None, lo=0.0, hi=1.0, samples=513):
    """Parameter in ``[lo, hi]`` whose point is nearest ``target``.

    Distance is Mahalanobis when a precision matrix is supplied. Found by
    dense sampling, which is all the integrators need for a breakpoint.
    """
    s = np.linspace(lo, hi, samples)
    d = traj.position(s) - np.asarray(target, dtype=float)
    dx, dy = d[:, 0], d[:, 1]
    if precision is None:
        q = dx * dx + dy * dy
    else:
        q = precision[0, 0] * dx * dx + 2.0 * precision[0, 1] * dx * dy + precision[1, 1] * dy * dy
    return float(s[int(np.argmin(q))])


def arc_length_parameters(traj: Trajectory, ds_max: float, lo=0.0, hi=1.0, oversample=8):
    """Parameters whose consecutive points are at most ``ds_max`` apart.

    Arc length is tabulated on a fine parameter grid and inverted by
    interpolation; a final check splits any gap that still exceeds
    ``ds_max`` because of the chord approximation.
    """
    rough = max(2, int(math.ceil(traj_length_between(traj, lo, hi) / ds_max)) + 1)
    fine = np.linspace(lo, hi, rough * oversample + 1)
    p = traj.position(fine)
    cum = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(p, axis=0).T))])
    n = max(2, int(math.ceil(cum[-1] / ds_max)) + 1)
    s = np.interp(np.linspace(0.0, cum[-1], n), cum, fine)
    pts = traj.position(s)
    gaps = np.hypot(*np.diff(pts, axis=0).T)
    if np.any(gaps > ds_max):
        extra = [np.linspace(s[i], s[i + 1], int(math.ceil(g / ds_max)) + 1)[1:-1]
                 for i, g in enumerate(gaps) if g > ds_max]
        s = np.sort(np.concatenate([s] + extra))
    return s


def traj_length_between(traj: Trajectory, lo, hi, samples=4097):
    s = np.linspace(lo, hi, samples)
    p = traj.position(s)
    return float(np.sum(np.hypot(*np.diff(p, axis=0).T)))
