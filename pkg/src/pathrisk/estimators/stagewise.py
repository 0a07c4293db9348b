"""Stage-wise chance-constraint estimate: Boole's bound over waypoints.

Each waypoint's collision probability is approximated as the disk area
times a density value. In ``center`` mode the density is taken at the
disk center offset; in ``max_point`` mode at the point of the disk where
the density peaks, which makes every per-waypoint term an upper bound.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .scenario import Estimate, Scenario, stopwatch

BOUND_MODES = ("center", "max_point")


def waypoint_parameters(sc: Scenario, n_waypoints: int) -> np.ndarray:
    """Waypoints uniform in parameter, endpoints included; one waypoint sits mid-range."""
    lo, hi = sc.param_range
    if n_waypoints == 1:
        return np.array([0.5 * (lo + hi)])
    return np.linspace(lo, hi, n_waypoints)


def density_peak_in_disk(precision, center, radius) -> np.ndarray:
    """Point of ``|x - center| <= radius`` closest to the origin in the metric ``precision``.

    For an outside origin the minimizer lies on the circle and solves
    ``(precision + lam I) x = lam * center`` for some ``lam > 0``; ``lam`` is
    found by bracketing the circle constraint.
    """
    c = np.asarray(center, dtype=float)
    dist = math.hypot(*c)
    if dist <= radius:
        return np.zeros(2)
    A = np.asarray(precision, dtype=float)
    if A[0, 1] == 0.0 and A[0, 0] == A[1, 1]:
        return c * (1.0 - radius / dist)

    def point(lam):
        return np.linalg.solve(A + lam * np.eye(2), lam * c)

    def gap(lam):
        return math.hypot(*(point(lam) - c)) - radius

    # gap -> |c| - r > 0 as lam -> 0 and -> -r as lam -> inf.
    hi = max(np.linalg.eigvalsh(A)[-1], 1.0)
    while gap(hi) > 0:
        hi *= 4.0
    lam = brentq(gap, 0.0, hi, xtol=1e-14, rtol=1e-14)
    return point(lam)


def stagewise_estimate(sc: Scenario, n_waypoints: int = 50, bound_mode: str = "center") -> Estimate:
    if int(n_waypoints) < 1:
        raise ValueError("n_waypoints must be >= 1")
    if bound_mode not in BOUND_MODES:
        raise ValueError(f"bound_mode must be one of {BOUND_MODES}")
    g = sc.sigma_t
    with stopwatch() as t:
        d = sc.offset(waypoint_parameters(sc, int(n_waypoints)))
        if bound_mode == "max_point":
            d = np.array([density_peak_in_disk(g.precision, c, sc.radius) for c in d])
        terms = sc.body.area * g.pdf_xy(d[:, 0], d[:, 1])
        raw = float(terms.sum())
    return Estimate.from_raw("stagewise", raw, t[0], n_waypoints=int(n_waypoints),
                             bound_mode=bound_mode)
