"""Bivariate normal distributions: density, sampling and integration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import CovarianceError
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_1d, integrate_2d

__all__ = [
    "Gaussian2",
    "QuadratureSpec",
    "combine_covariance",
    "pdf_eval",
    "integrate_disk",
    "integrate_rect",
    "interval_mass",
    "sample",
    "sample_n",
]


def _as_spd(cov, name="cov"):
    c = np.asarray(cov, dtype=float)
    if c.shape != (2, 2):
        raise CovarianceError(f"{name} must be 2x2, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise CovarianceError(f"{name} has non-finite entries")
    if not np.allclose(c, c.T, rtol=1e-12, atol=0.0):
        raise CovarianceError(f"{name} is not symmetric")
    try:
        np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        raise CovarianceError(f"{name} is not positive definite") from None
    return 0.5 * (c + c.T)


@dataclass(frozen=True, eq=False)
class Gaussian2:
    """Normal distribution on the plane with an SPD covariance."""

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray = field(init=False, repr=False)
    precision: np.ndarray = field(init=False, repr=False)
    log_norm: float = field(init=False, repr=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        if not np.all(np.isfinite(mean)):
            raise CovarianceError("mean must be finite")
        cov = _as_spd(self.cov)
        chol = np.linalg.cholesky(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "precision", np.linalg.inv(cov))
        object.__setattr__(
            self, "log_norm", -math.log(2.0 * math.pi) - math.log(chol[0, 0] * chol[1, 1])
        )

    @classmethod
    def isotropic(cls, variance, mean=(0.0, 0.0)):
        return cls(np.asarray(mean, dtype=float), float(variance) * np.eye(2))

    @property
    def is_diagonal(self) -> bool:
        return self.cov[0, 1] == 0.0

    @property
    def is_isotropic(self) -> bool:
        return self.is_diagonal and self.cov[0, 0] == self.cov[1, 1]

    def shifted(self, mean):
        return Gaussian2(np.asarray(mean, dtype=float), self.cov)

    def mahalanobis_sq(self, x):
        d = np.asarray(x, dtype=float) - self.mean
        p = self.precision
        dx, dy = d[..., 0], d[..., 1]
        return p[0, 0] * dx * dx + 2.0 * p[0, 1] * dx * dy + p[1, 1] * dy * dy

    def pdf(self, x):
        """Density at ``x`` (shape ``(..., 2)``)."""
        return np.exp(self.log_norm - 0.5 * self.mahalanobis_sq(x))

    def pdf_xy(self, x, y):
        """Density at separate coordinate arrays; avoids stacking in hot loops."""
        p = self.precision
        dx = x - self.mean[0]
        dy = y - self.mean[1]
        q = p[0, 0] * dx * dx + 2.0 * p[0, 1] * dx * dy + p[1, 1] * dy * dy
        return np.exp(self.log_norm - 0.5 * q)


def combine_covariance(cov_r, cov_o) -> np.ndarray:
    """Covariance of the difference of two independent Gaussian positions."""
    return _as_spd(_as_spd(cov_r, "cov_r") + _as_spd(cov_o, "cov_o"), "combined cov")


def pdf_eval(g: Gaussian2, x) -> float:
    return float(g.pdf(np.asarray(x, dtype=float)))


def integrate_disk(g: Gaussian2, center, radius, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Probability mass of the disk ``|x - center| <= radius``.

    Integrates in polar coordinates about the disk center.
    """
    radius = float(radius)
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    cx, cy = np.asarray(center, dtype=float)
    # Aim an angular breakpoint at the direction of the mean.
    toward = math.atan2(g.mean[1] - cy, g.mean[0] - cx) % (2.0 * math.pi)

    def integrand(rho, phi):
        return g.pdf_xy(cx + rho * np.cos(phi), cy + rho * np.sin(phi)) * rho

    value, _ = integrate_2d(integrand, (0.0, radius), (0.0, 2.0 * math.pi), q,
                            y_breaks=(toward,), panels=(2, 4))
    return float(min(max(value, 0.0), 1.0))


def interval_mass(a, b):
    """Standard normal mass of ``[a, b]``, accurate deep in either tail."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    upper = a > 0
    # Reflect intervals in the right tail so both CDF values stay small.
    out = np.where(upper, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))
    return np.maximum(out, 0.0)


def integrate_rect(g: Gaussian2, lo, hi, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Mass of the axis-aligned rectangle ``[lo, hi]``; infinite bounds allowed."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(hi < lo):
        raise ValueError("rectangle must satisfy lo <= hi componentwise")
    if np.any(hi == lo):
        return 0.0
    sd = np.sqrt(np.diag(g.cov))
    if g.is_diagonal:
        zl = (lo - g.mean) / sd
        zh = (hi - g.mean) / sd
        return float(interval_mass(zl[0], zh[0]) * interval_mass(zl[1], zh[1]))
    # Outer integral over x of the marginal density times the conditional
    # mass of [lo_y, hi_y]; beyond 40 standard deviations nothing is left.
    x0 = max(lo[0], g.mean[0] - 40.0 * sd[0])
    x1 = min(hi[0], g.mean[0] + 40.0 * sd[0])
    if x1 <= x0:
        return 0.0
    slope = g.cov[0, 1] / g.cov[0, 0]
    cond_sd = math.sqrt(g.cov[1, 1] - slope * g.cov[0, 1])

    def integrand(x):
        m = g.mean[1] + slope * (x - g.mean[0])
        dens = np.exp(-0.5 * ((x - g.mean[0]) / sd[0]) ** 2) / (sd[0] * math.sqrt(2.0 * math.pi))
        return dens * interval_mass((lo[1] - m) / cond_sd, (hi[1] - m) / cond_sd)

    value, _ = integrate_1d(integrand, x0, x1, q, breakpoints=(g.mean[0],))
    return float(min(max(value, 0.0), 1.0))


def sample(g: Gaussian2, rng: np.random.Generator) -> np.ndarray:
    """One draw from ``g``: Cholesky factor applied to two standard normals."""
    return g.mean + g.chol @ rng.standard_normal(2)


def sample_n(g: Gaussian2, rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.standard_normal((int(n), 2))
    return g.mean + z @ g.chol.T
