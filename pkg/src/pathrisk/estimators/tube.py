"""Swept-tube integrals: naive parametrization, Volterra form, risk density.

All of them integrate the relative-position density over the tube
``Phi(s, theta)``, ``theta`` in ``[-T, T]``, or over its centerline.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from ..path import tube_points
from ..quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_1d, integrate_2d
from .scenario import Estimate, Scenario, stopwatch

HYPOTHESES = ("H2", "H3")
UPDATE_MODES = ("sensitivity_h2", "sensitivity_h3", "risk_density")


def _tube_density(sc: Scenario, s, theta):
    pts, gamma = tube_points(sc.trajectory, s, theta)
    mu = sc.obstacle_mean
    return sc.sigma_t.pdf_xy(pts[..., 0] - mu[0], pts[..., 1] - mu[1]) * gamma


def _fold_offset(sc: Scenario, s, T):
    """Offset ``1 / kappa(s)`` where the tube Jacobian vanishes, clipped to ``[-T, T]``."""
    _, d1, d2 = sc.trajectory.evaluate(s)
    cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    speed3 = np.hypot(d1[..., 0], d1[..., 1]) ** 3
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        fold = np.where(cross != 0.0, speed3 / cross, np.inf)
    return np.clip(fold, -T, T)


def _fold_breaks(sc: Scenario, T, samples=513):
    """Parameters where the fold line enters or leaves the tube (``T |kappa| = 1``)."""
    lo, hi = sc.param_range
    s = np.linspace(lo, hi, samples)
    g = np.abs(_fold_offset(sc, s, 2.0 * T)) - T
    flips = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
    return [brentq(lambda x: abs(float(_fold_offset(sc, x, 2.0 * T))) - T, s[k], s[k + 1])
            for k in flips]


def tube_integral(sc: Scenario, T: float | None = None, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Density integrated over the naive tube of half-width ``T`` (default: body radius).

    Where the curvature radius drops below ``T`` the map folds and the
    Jacobian has a kink along ``theta = 1 / kappa(s)``. The offset is
    therefore integrated in two pieces split at that line, each mapped
    onto a unit interval, so the kink sits on a panel edge.
    """
    T = sc.radius if T is None else float(T)
    if T < 0:
        raise ValueError("tube half-width must be non-negative")
    lo, hi = sc.param_range
    if T == 0.0 or lo == hi:
        return 0.0

    def integrand(s, u):
        fold = _fold_offset(sc, s, T)
        first = u <= 1.0
        theta = np.where(first, -T + (fold + T) * u, fold + (T - fold) * (u - 1.0))
        jac = np.where(first, fold + T, T - fold)
        return _tube_density(sc, s, theta) * jac

    breaks = [sc.peak_parameter()] + _fold_breaks(sc, T)
    value, _ = integrate_2d(integrand, (lo, hi), (0.0, 2.0), q, x_breaks=breaks,
                            y_breaks=(1.0,), panels=(8, 2))
    return max(value, 0.0)


def naive_param_h3(sc: Scenario, q: QuadratureSpec = DEFAULT_SPEC) -> Estimate:
    with stopwatch() as t:
        raw = tube_integral(sc, sc.radius, q)
    return Estimate.from_raw("parametrization", raw, t[0], T=sc.radius,
                             rel_tol=q.rel_tol, abs_tol=q.abs_tol)


def volterra_h2(sc: Scenario, q: QuadratureSpec = DEFAULT_SPEC) -> Estimate:
    """``1 - exp(-I)`` with ``I`` the naive tube integral."""
    with stopwatch() as t:
        integral = tube_integral(sc, sc.radius, q)
        value = -math.expm1(-integral)
    return Estimate.from_raw("volterra", value, t[0], tube_integral=integral, T=sc.radius)


def risk_density(sc: Scenario, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Twice the speed-weighted line integral of the density along the path."""
    lo, hi = sc.param_range
    if lo == hi:
        return 0.0
    traj = sc.trajectory
    mu = sc.obstacle_mean
    g = sc.sigma_t

    def integrand(s):
        # Quadrature nodes stay inside param_range, so validation is skipped.
        pos, d1, _ = traj._eval(s)
        speed = np.hypot(d1[..., 0], d1[..., 1])
        return 2.0 * g.pdf_xy(pos[..., 0] - mu[0], pos[..., 1] - mu[1]) * speed

    value, _ = integrate_1d(integrand, lo, hi, q, breakpoints=(sc.peak_parameter(),))
    return max(value, 0.0)


def risk_density_estimate(sc: Scenario, scale: float | None = None,
                          q: QuadratureSpec = DEFAULT_SPEC) -> Estimate:
    """Linear estimate ``risk_density * scale``; ``scale`` defaults to the body radius."""
    scale = sc.radius if scale is None else float(scale)
    if not scale > 0:
        raise ValueError("scale must be positive")
    with stopwatch() as t:
        rd = risk_density(sc, q)
    return Estimate.from_raw("risk_density", rd * scale, t[0], risk_density=rd, scale=scale)


def sensitivity(sc: Scenario, T: float, hypothesis: str = "H3",
                q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Derivative of the tube probability with respect to the half-width at ``T``.

    Under H3 this is the density integrated along both tube edges. Under H2
    the same edge integral is damped by ``exp(-tube_integral(T))``.
    """
    if hypothesis not in HYPOTHESES:
        raise ValueError(f"hypothesis must be one of {HYPOTHESES}")
    T = float(T)
    if T < 0:
        raise ValueError("T must be non-negative")
    lo, hi = sc.param_range
    if lo == hi:
        return 0.0

    def edges(s):
        return _tube_density(sc, s, T) + _tube_density(sc, s, -T)

    value, _ = integrate_1d(edges, lo, hi, q, breakpoints=(sc.peak_parameter(),))
    value = max(value, 0.0)
    if hypothesis == "H2" and T > 0:
        value *= math.exp(-tube_integral(sc, T, q))
    return value


def cp_update(p_prev: float, sc: Scenario, T_prev: float, dT: float,
              mode: str = "sensitivity_h3", q: QuadratureSpec = DEFAULT_SPEC,
              rd: float | None = None) -> float:
    """First-order update of a known collision probability after a radius change.

    ``rd`` may carry a precomputed risk density for the ``risk_density``
    mode, which is the point of that mode: one line integral serves every
    step of a radius sweep.
    """
    if not 0.0 <= p_prev <= 1.0:
        raise ValueError("p_prev must be a probability")
    if mode not in UPDATE_MODES:
        raise ValueError(f"mode must be one of {UPDATE_MODES}")
    if dT == 0:
        return float(p_prev)
    if mode == "risk_density":
        slope = risk_density(sc, q) if rd is None else rd
    else:
        slope = sensitivity(sc, T_prev, "H2" if mode == "sensitivity_h2" else "H3", q)
    return float(min(max(p_prev + slope * dT, 0.0), 1.0))
