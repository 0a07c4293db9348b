import math

import numpy as np
import pytest
from scipy import integrate

from pathrisk.errors import QuadratureError
from pathrisk.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, QuadratureSpec, integrate_1d, integrate_2d


def test_rule_weights():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    # Kronrod rule is exact up to degree 22 on [-1, 1].
    for k in range(0, 23, 2):
        assert KRONROD_WEIGHTS @ NODES**k == pytest.approx(2.0 / (k + 1), abs=1e-14)


def test_polynomial_exact():
    v, _ = integrate_1d(lambda x: 3 * x**2 - x + 1, -1.0, 2.0)
    assert v == pytest.approx(9 - 1.5 + 3, rel=1e-14)


def test_narrow_peak_with_breakpoint():
    f = lambda x: np.exp(-0.5 * ((x - 0.3137) / 1e-4) ** 2) / (1e-4 * math.sqrt(2 * math.pi))
    v, _ = integrate_1d(f, 0.0, 1.0, breakpoints=(0.3137,))
    assert v == pytest.approx(1.0, rel=1e-9)


def test_matches_scipy_quad():
    f = lambda x: np.sin(30 * x) * np.exp(-x)
    v, _ = integrate_1d(f, 0.0, 3.0)
    ref, _ = integrate.quad(lambda x: math.sin(30 * x) * math.exp(-x), 0, 3, epsabs=1e-14, limit=200)
    assert v == pytest.approx(ref, rel=1e-9)


def test_reversed_limits_flip_sign():
    a, _ = integrate_1d(np.exp, 0.0, 1.0)
    b, _ = integrate_1d(np.exp, 1.0, 0.0)
    assert a == -b


def test_2d_matches_dblquad():
    f = lambda x, y: np.exp(-(x**2) - 3 * y**2) * np.cos(x * y)
    v, _ = integrate_2d(f, (-1, 2), (0, 1.5))
    ref, _ = integrate.dblquad(lambda y, x: math.exp(-x * x - 3 * y * y) * math.cos(x * y),
                               -1, 2, 0, 1.5, epsabs=1e-13, epsrel=1e-12)
    assert v == pytest.approx(ref, rel=1e-9)


def test_non_convergence_carries_estimate():
    spec = QuadratureSpec(rel_tol=1e-15, abs_tol=1e-300, max_subdivisions=2)
    with pytest.raises(QuadratureError) as info:
        integrate_1d(lambda x: np.abs(x - 0.123456) ** 0.5, 0.0, 1.0, spec)
    assert info.value.estimate == pytest.approx(
        (0.123456**1.5 + (1 - 0.123456) ** 1.5) / 1.5, rel=1e-3)


@pytest.mark.parametrize("kw", [dict(rel_tol=0), dict(abs_tol=-1), dict(max_subdivisions=0)])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        QuadratureSpec(**kw)
