import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats
from shapely.geometry import LineString, box

from pathrisk import (
    Estimate,
    Gaussian2,
    Quadratic,
    QuadratureSpec,
    Scenario,
    Segment,
    combine_h1,
    combine_h2_discrete,
    cp_update,
    density_peak_in_disk,
    grid_estimate,
    grid_probability,
    lune_mass,
    mc_ground_truth,
    naive_param_h3,
    p_config,
    rasterize_swept_set,
    risk_density,
    risk_density_estimate,
    sensitivity,
    stagewise_estimate,
    tube_integral,
    volterra_h2,
)
from pathrisk.errors import DomainError, ResourceError
from pathrisk.gauss import integrate_disk

from conftest import scenario
from strategies import PROPS, point, quadratics, variance


def strip_mass(r, sigma):
    return 2 * stats.norm.cdf(r / math.sqrt(sigma)) - 1


# ------------------------------------------------------------------ p_config

def test_p_config_closed_form(paths):
    assert p_config(scenario(paths[0], 0.01), 0.5) == pytest.approx(1 - math.exp(-0.5), rel=1e-9)


def test_p_config_far(paths):
    sc = scenario(paths[0], 0.01, mean=(2.5, 10.0))
    assert p_config(sc, 0.5) < 1e-12


def test_p_config_offset_matches_ncx2(paths):
    ref = stats.ncx2.cdf(0.01 / 0.01, 2, 0.25**2 / 0.01)
    assert p_config(scenario(paths[2], 0.01), 0.5) == pytest.approx(ref, rel=1e-8)


def test_p_config_outside_range(paths):
    sc = scenario(paths[0], 0.01).with_range(0.5, 1.0)
    with pytest.raises(DomainError):
        p_config(sc, 0.25)


# -------------------------------------------------------------- combiners

def test_combine_h1_values():
    assert combine_h1([0.1, 0.1, 0.7]) == pytest.approx(0.757, abs=1e-12)
    assert combine_h1([0.5, 0.5]) == 0.75
    assert combine_h1([]) == 0.0
    assert combine_h1([0.2, 1.0]) == 1.0
    with pytest.raises(ValueError):
        combine_h1([1.2])


def test_h2_single_and_repeated(paths):
    sc = scenario(paths[2], 0.01)
    single = combine_h2_discrete(sc, [0.5])
    assert single == pytest.approx(p_config(sc, 0.5), rel=1e-12)
    assert combine_h2_discrete(sc, [0.5, 0.5]) == pytest.approx(single, rel=1e-12)


def test_h2_disjoint_equals_h1(paths):
    sc = scenario(paths[0], 0.5)
    s = [0.3, 0.7]
    ref = combine_h1([p_config(sc, x) for x in s])
    assert combine_h2_discrete(sc, s) == pytest.approx(ref, rel=1e-12)


def test_h2_requires_sorted(paths):
    with pytest.raises(ValueError):
        combine_h2_discrete(scenario(paths[0], 0.01), [0.6, 0.4])


@pytest.mark.parametrize("shift", [(0.05, 0.0), (0.13, 0.07), (0.001, 0.0), (0.19, -0.02)])
def test_lune_against_brute_force(shift):
    g = Gaussian2((0.03, -0.04), [[0.01, 0.003], [0.003, 0.02]])
    c_old = np.array([0.0, 0.0])
    c_new = np.array(shift)
    R = 0.1
    n = 1500
    rho = np.sqrt((np.arange(n) + 0.5) / n) * R  # equal-area rings
    phi = (np.arange(n) + 0.5) / n * 2 * math.pi
    P, F = np.meshgrid(rho, phi, indexing="ij")
    x = c_new[0] + P * np.cos(F)
    y = c_new[1] + P * np.sin(F)
    outside = np.hypot(x - c_old[0], y - c_old[1]) > R
    ref = (g.pdf_xy(x, y) * outside).sum() * math.pi * R * R / n**2
    assert lune_mass(g, c_new, c_old, R) == pytest.approx(ref, rel=2e-3, abs=1e-9)


def test_lune_complement_identity():
    g = Gaussian2.isotropic(0.02, (0.05, 0.01))
    a, b = np.array([0.0, 0.0]), np.array([0.07, 0.02])
    # mass(A \ B) + mass(B) == mass(B \ A) + mass(A)
    lhs = lune_mass(g, a, b, 0.1) + integrate_disk(g, b, 0.1)
    rhs = lune_mass(g, b, a, 0.1) + integrate_disk(g, a, 0.1)
    assert lhs == pytest.approx(rhs, rel=1e-9)


# ------------------------------------------------------------- Monte Carlo

def test_mc_far_is_zero(paths):
    assert mc_ground_truth(scenario(paths[0], 0.01, mean=(2.5, 10.0)), 2000).value == 0.0


def test_mc_strip(paths):
    est = mc_ground_truth(scenario(paths[0], 0.01), 10_000, seed=3)
    assert abs(est.value - strip_mass(0.1, 0.01)) <= 3 * est.meta["std_error"]


def test_mc_deterministic_and_worker_independent(paths):
    sc = scenario(paths[1], 0.05)
    a = mc_ground_truth(sc, 20_000, seed=42)
    b = mc_ground_truth(sc, 20_000, seed=42, workers=4)
    assert a.value == b.value and a.meta["hits"] == b.meta["hits"]


def test_mc_step_bias_below_noise(paths):
    sc = scenario(paths[2], 0.01)
    a = mc_ground_truth(sc, 10_000, seed=5)
    b = mc_ground_truth(sc, 10_000, ds_max=sc.radius / 20, seed=5)
    assert abs(a.value - b.value) <= a.meta["std_error"]


def test_mc_argument_checks(paths):
    with pytest.raises(ValueError):
        mc_ground_truth(scenario(paths[0], 0.01), 0)
    with pytest.raises(ValueError):
        mc_ground_truth(scenario(paths[0], 0.01), 10, ds_max=0.0)


# -------------------------------------------------------------- tube family

def test_tube_empty():
    sc = scenario(Segment((0, 0), (5, 0)), 0.01)
    assert tube_integral(sc, 0.0) == 0.0


def test_naive_strip(paths):
    est = naive_param_h3(scenario(paths[0], 0.01))
    assert est.raw == pytest.approx(strip_mass(0.1, 0.01), abs=1e-8)


def test_naive_overestimates_curved_low_variance(paths):
    sc = scenario(paths[2], 1e-3)
    assert naive_param_h3(sc).value >= mc_ground_truth(sc, 10_000).value


def test_volterra_consistency(paths):
    for traj in paths:
        sc = scenario(traj, 0.01)
        naive = naive_param_h3(sc)
        vol = volterra_h2(sc)
        assert vol.value == -math.expm1(-naive.raw)
        assert vol.value <= min(naive.raw, 1.0)


def test_volterra_zero():
    sc = scenario(Segment((0, 0), (5, 0)), 0.01, mean=(2.5, 50.0))
    assert volterra_h2(sc).value == pytest.approx(0.0, abs=1e-300)


def test_risk_density_line(paths):
    assert risk_density(scenario(paths[0], 0.01)) == pytest.approx(2 / math.sqrt(2 * math.pi * 0.01), rel=1e-9)
    est = risk_density_estimate(scenario(paths[0], 0.01))
    assert est.value == pytest.approx(0.7978845608, rel=1e-9)


def test_risk_density_far(paths):
    assert risk_density(scenario(paths[0], 0.01, mean=(2.5, 10.0))) < 1e-12
    est = risk_density_estimate(scenario(paths[0], 0.01, mean=(2.5, 100.0)))
    assert est.value == 0.0


def test_risk_density_reparametrization():
    squared = Quadratic((0, 0), (0, 0), (5, 0))  # same segment traversed as s^2
    a = risk_density(scenario(Segment((0, 0), (5, 0)), 0.01))
    b = risk_density(scenario(squared, 0.01))
    assert b == pytest.approx(a, rel=1e-8)


def test_risk_density_scale_linear(paths):
    sc = scenario(paths[1], 0.1)
    a = risk_density_estimate(sc, 0.05)
    b = risk_density_estimate(sc, 0.1)
    assert b.raw == 2 * a.raw
    with pytest.raises(ValueError):
        risk_density_estimate(sc, 0.0)


def test_probability_to_go(paths):
    sc = scenario(paths[0], 0.01)
    half = risk_density(sc.with_range(0.5, 1.0))
    assert half == pytest.approx(0.5 * risk_density(sc), rel=1e-9)


@pytest.mark.parametrize("idx", [0, 1, 2])
def test_sensitivity_zero_width(paths, idx):
    sc = scenario(paths[idx], 0.01)
    rd = risk_density(sc)
    assert sensitivity(sc, 0.0, "H2") == pytest.approx(rd, rel=1e-8)
    assert sensitivity(sc, 0.0, "H3") == pytest.approx(rd, rel=1e-8)


def test_sensitivity_h2_below_h3(paths):
    sc = scenario(paths[2], 0.05)
    for T in (0.01, 0.1, 0.3):
        assert sensitivity(sc, T, "H2") <= sensitivity(sc, T, "H3")


def test_sensitivity_finite_difference(paths):
    sc = scenario(paths[0], 0.01)
    h = 1e-4
    fd = (tube_integral(sc, 0.05 + h) - tube_integral(sc, 0.05 - h)) / (2 * h)
    assert sensitivity(sc, 0.05, "H3") == pytest.approx(fd, rel=1e-3)


def test_sensitivity_argument_checks(paths):
    sc = scenario(paths[0], 0.01)
    with pytest.raises(ValueError):
        sensitivity(sc, 0.1, "H1")
    with pytest.raises(ValueError):
        sensitivity(sc, -0.1)


def test_cp_update(paths):
    sc = scenario(paths[0], 0.01)
    assert cp_update(0.3, sc, 0.1, 0.0) == 0.3
    rd = risk_density(sc)
    assert cp_update(0.3, sc, 0.1, 0.01, "risk_density") == pytest.approx(0.3 + rd * 0.01, rel=1e-12)
    assert cp_update(0.9, sc, 0.1, 1.0, "risk_density") == 1.0
    assert cp_update(0.1, sc, 0.1, -1.0, "risk_density") == 0.0
    with pytest.raises(ValueError):
        cp_update(1.5, sc, 0.1, 0.01)
    with pytest.raises(ValueError):
        cp_update(0.5, sc, 0.1, 0.01, "newton")


# ---------------------------------------------------------------- stagewise

def test_stagewise_single_waypoint():
    sc = scenario(Segment((0, 0), (5, 0)), 0.01)
    assert stagewise_estimate(sc, 1).raw == pytest.approx(0.5, rel=1e-14)


def test_stagewise_max_point_dominates(paths):
    for traj in paths:
        for sigma in (1e-3, 0.1):
            sc = scenario(traj, sigma)
            assert stagewise_estimate(sc, 50, "max_point").raw >= stagewise_estimate(sc, 50).raw


def test_stagewise_saturates(paths):
    est = stagewise_estimate(scenario(paths[2], 0.1), 300)
    assert est.value == 1.0 and est.raw > 1.0


def test_stagewise_checks(paths):
    with pytest.raises(ValueError):
        stagewise_estimate(scenario(paths[0], 0.1), 0)
    with pytest.raises(ValueError):
        stagewise_estimate(scenario(paths[0], 0.1), 5, "corner")


def test_density_peak_anisotropic_brute_force():
    prec = np.linalg.inv(np.array([[0.02, 0.012], [0.012, 0.05]]))
    c = np.array([0.3, -0.1])
    R = 0.1
    x = density_peak_in_disk(prec, c, R)
    phi = np.linspace(0, 2 * np.pi, 200_001)
    ring = c + R * np.stack([np.cos(phi), np.sin(phi)], axis=1)
    q = np.einsum("ij,jk,ik->i", ring, prec, ring)
    assert x @ prec @ x == pytest.approx(q.min(), rel=1e-8)
    assert np.linalg.norm(x - c) == pytest.approx(R, rel=1e-10)


def test_density_peak_inside():
    np.testing.assert_array_equal(density_peak_in_disk(np.eye(2), (0.01, 0.0), 0.1), [0, 0])


# -------------------------------------------------------------------- grid

def test_grid_probability_degenerate():
    assert grid_probability([0.37]) == pytest.approx(0.37)
    assert grid_probability([0.0] * 5) == 0.0


def test_grid_zero_mass():
    sc = scenario(Segment((0, 0), (1, 0)), 1e-3, mean=(0.5, 50.0))
    assert grid_estimate(sc, 0.05).value == 0.0


def test_rasterization_against_shapely():
    traj = Quadratic((0, 0), (1, 0.5), (0, -0.5))
    sc = scenario(traj, 0.01, radius=0.07)
    h = 0.02
    mask, j0, i0 = rasterize_swept_set(sc, h)
    line = LineString(traj.position(np.linspace(0, 1, 4001)))
    mismatches = 0
    for (a, b), sel in np.ndenumerate(mask):
        x0, y0 = (j0 + a) * h, (i0 + b) * h
        d = line.distance(box(x0, y0, x0 + h, y0 + h))
        if abs(d - 0.07) < 1e-4:
            continue  # within the centerline sampling tolerance
        mismatches += sel != (d <= 0.07)
    assert mismatches == 0
    assert mask.sum() > 0


def test_grid_resource_cap(paths):
    with pytest.raises(ResourceError):
        grid_estimate(scenario(paths[0], 0.01), 1e-4, max_cells=10_000)


def test_grid_converges_but_not_to_mc(paths):
    sc = scenario(paths[0], 0.01)
    vals = [grid_estimate(sc, 2.0**-k).value for k in range(5, 10)]
    steps = np.abs(np.diff(vals))
    assert steps[-1] < steps[0]
    mc = mc_ground_truth(sc, 10_000)
    assert abs(vals[-1] - mc.value) > 5 * mc.meta["std_error"]


# ---------------------------------------------------------------- invariants

def test_estimate_saturation():
    e = Estimate.from_raw("x", 1.7, 0.0)
    assert e.value == 1.0 and e.raw == 1.7


def test_scenario_validation(paths):
    with pytest.raises(ValueError):
        Scenario(paths[0], (0, 0), scenario(paths[0], 0.1).body, Gaussian2.isotropic(0.1, (1, 0)))
    with pytest.raises(DomainError):
        scenario(paths[0], 0.1).with_range(0.6, 0.4)


def test_rotation_invariance():
    ang = 0.7
    rot = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    c0, c1, c2 = np.zeros(2), np.array([5.0, 1.0]), np.array([0.0, -1.0])
    base = scenario(Quadratic(c0, c1, c2), 0.01)
    turned = scenario(Quadratic(rot @ c0, rot @ c1, rot @ c2), 0.01, mean=rot @ np.array([2.5, 0.0]))
    assert p_config(turned, 0.4) == pytest.approx(p_config(base, 0.4), rel=1e-8)
    assert risk_density(turned) == pytest.approx(risk_density(base), rel=1e-8)
    assert naive_param_h3(turned).raw == pytest.approx(naive_param_h3(base).raw, rel=1e-7)
    a = mc_ground_truth(base, 10_000, seed=1).value
    b = mc_ground_truth(turned, 10_000, seed=1).value
    assert abs(a - b) <= 3 * math.sqrt(2 * a * (1 - a) / 10_000)


@PROPS
@given(quadratics(), point, point, variance, st.floats(0, 1))
def test_p_config_translation_property(traj, mean, shift, sigma, s):
    shift = np.array(shift)
    a = Scenario.isotropic(traj, mean, 0.1, sigma)
    b = Scenario.isotropic(Quadratic(traj.c0 + shift, traj.c1, traj.c2), np.array(mean) + shift,
                           0.1, sigma)
    assert math.isclose(p_config(a, s), p_config(b, s), rel_tol=1e-7, abs_tol=1e-13)


@PROPS
@given(quadratics(), st.floats(-0.5, 0.5), variance, st.floats(0.005, 0.3))
def test_volterra_shares_tube_integral_property(traj, dy, sigma, r):
    sc = Scenario.isotropic(traj, traj.position(0.5) + np.array([0.0, dy]), r, sigma)
    q = QuadratureSpec(rel_tol=1e-7)
    naive = naive_param_h3(sc, q)
    vol = volterra_h2(sc, q)
    assert vol.value == -math.expm1(-naive.raw) and vol.value <= min(naive.raw, 1.0)
