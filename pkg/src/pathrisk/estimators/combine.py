"""Per-configuration probabilities and their discrete combinations.

``combine_h1`` treats configurations as independent events.
``combine_h2_discrete`` charges each new configuration only with the part
of its disk not already covered by the previous one.
"""

from __future__ import annotations

import math

import numpy as np

from ..gauss import integrate_disk
from ..quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_2d
from .scenario import Scenario


def p_config(sc: Scenario, s: float, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Gaussian mass of the combined disk placed at configuration ``s``."""
    sc.check_param(s)
    return integrate_disk(sc.sigma_t, sc.offset(float(s)), sc.radius, q)


def combine_h1(probs) -> float:
    """Union probability of independent events, ``1 - prod(1 - p)``."""
    p = np.asarray(list(probs), dtype=float)
    if p.size == 0:
        return 0.0
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    if np.any(p == 1.0):
        return 1.0
    return float(-math.expm1(np.log1p(-p).sum()))


def _critical_angles(c_new, c_old, radius):
    """Ray directions from ``c_new`` where the clipped radial range changes form."""
    w = np.asarray(c_old) - np.asarray(c_new)
    dist = math.hypot(*w)
    if dist == 0.0:
        return []
    base = math.atan2(w[1], w[0])
    out = []
    if dist < 2.0 * radius:
        # Circle-circle intersection points, seen from c_new.
        out += [base + math.acos(dist / (2.0 * radius)), base - math.acos(dist / (2.0 * radius))]
    if dist > radius:
        half = math.asin(min(radius / dist, 1.0))
        out += [base + half, base - half]
    return [a % (2.0 * math.pi) for a in out]


def lune_mass(g, c_new, c_old, radius, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Mass of ``disk(c_new) minus disk(c_old)`` (equal radii) under ``g``.

    Polar coordinates about ``c_new``. Along each ray the part inside the
    old disk is an interval found in closed form, and the remaining one or
    two radial pieces are mapped onto ``t`` in [0, 1].
    """
    c_new = np.asarray(c_new, dtype=float)
    c_old = np.asarray(c_old, dtype=float)
    R = float(radius)
    w = c_new - c_old
    cc = float(w @ w) - R * R
    if float(w @ w) == 0.0:
        return 0.0
    if float(w @ w) > 4.0 * R * R:
        return integrate_disk(g, c_new, R, q)

    def integrand(phi, t):
        ux, uy = np.cos(phi), np.sin(phi)
        b = ux * w[0] + uy * w[1]
        disc = b * b - cc
        root = np.sqrt(np.maximum(disc, 0.0))
        hit = disc > 0
        first_end = np.where(hit, np.clip(-b - root, 0.0, R), R)
        second_start = np.where(hit, np.clip(-b + root, 0.0, R), R)
        rho1 = first_end * t
        rho2 = second_start + (R - second_start) * t
        f1 = g.pdf_xy(c_new[0] + rho1 * ux, c_new[1] + rho1 * uy) * rho1 * first_end
        f2 = g.pdf_xy(c_new[0] + rho2 * ux, c_new[1] + rho2 * uy) * rho2 * (R - second_start)
        return f1 + f2

    value, _ = integrate_2d(integrand, (0.0, 2.0 * math.pi), (0.0, 1.0), q,
                            x_breaks=_critical_angles(c_new, c_old, R), panels=(8, 2))
    return float(min(max(value, 0.0), 1.0))


def combine_h2_discrete(sc: Scenario, configs, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Markov combination over an ordered list of configurations.

    The first factor is the unconditioned probability of the first
    configuration; every later one contributes the mass of the area its
    disk adds relative to its predecessor.
    """
    s = np.asarray(list(configs), dtype=float)
    if s.size == 0:
        return 0.0
    sc.check_param(s)
    if np.any(np.diff(s) < 0):
        raise ValueError("configurations must be sorted")
    centers = sc.offset(s)
    probs = [integrate_disk(sc.sigma_t, centers[0], sc.radius, q)]
    for prev, new in zip(centers[:-1], centers[1:]):
        probs.append(lune_mass(sc.sigma_t, new, prev, sc.radius, q))
    return combine_h1(probs)
