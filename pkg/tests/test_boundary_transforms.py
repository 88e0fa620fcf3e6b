import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_ball_points
from roe_lab.boundary_transforms import (
    PoissonField,
    PoissonKernelParams,
    abel_transform,
    hardy_norm,
    poisson_kernel,
    poisson_transform_at,
    recover_boundary_data,
    slice_projection_check,
    zonal_multipliers,
)
from roe_lab.errors import DomainError, InsufficientDecayError
from roe_lab.space_core import BoundaryFunction, RadialFunction, RadialGrid, SpaceParams, radius
from roe_lab.spherical_analysis import SpectralGrid, heat_kernel, spherical_function, spherical_function_table


def _unit(rng, n, count):
    b = rng.normal(size=(count, n))
    return b / np.linalg.norm(b, axis=1, keepdims=True)


# --- Poisson kernel ------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_kernel_is_one_at_origin(n, rng):
    pk = PoissonKernelParams(SpaceParams(n), 0.8)
    np.testing.assert_allclose(poisson_kernel(pk, np.zeros(n), _unit(rng, n, 20)), 1.0, atol=1e-15)


def test_kernel_closed_form_h3(h3):
    # at x = t e_3 and b = e_3 the base is (1 + t) / (1 - t) = e^r
    t = 0.4
    r = 2 * math.atanh(t)
    val = poisson_kernel(PoissonKernelParams(h3, 0.5), [0, 0, t], [0, 0, 1])
    assert val == pytest.approx(np.exp((1 + 0.5j) * r), rel=1e-13)


def test_kernel_domain(h3):
    pk = PoissonKernelParams(h3, 1.0)
    with pytest.raises(DomainError):
        poisson_kernel(pk, [0, 0, 1.0], [1, 0, 0])
    with pytest.raises(DomainError):
        poisson_kernel(pk, [0, 0, 0.1], [0.5, 0, 0])


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("lam", [0.0, 1.0, 0.7 + 0.2j])
def test_constant_data_gives_spherical_function(n, lam, rng):
    p = SpaceParams(n)
    size = 256 if n == 2 else (48, 96)
    F = BoundaryFunction.from_function(p, lambda b: np.ones(len(b)), size)
    x = random_ball_points(rng, n, 25, 0.7)
    got = poisson_transform_at(F, lam, x)
    want = spherical_function(p, lam, radius(p, x))
    np.testing.assert_allclose(got, want, atol=1e-8)


def test_first_harmonic_vanishes_at_origin_for_lambda_zero(h3):
    F = BoundaryFunction.from_function(h3, lambda b: b[:, 2])
    assert abs(poisson_transform_at(F, 0.0, np.zeros((1, 3)))[0]) < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_poisson_linearity(a, c):
    p = SpaceParams(2)
    x = np.array([[0.1, 0.2], [-0.5, 0.3], [0.0, -0.7]])
    F1 = BoundaryFunction.from_function(p, lambda b: b[:, 0] ** 2)
    F2 = BoundaryFunction.from_function(p, lambda b: np.exp(b[:, 1]))
    lhs = poisson_transform_at(F1.with_values(a * F1.values + c * F2.values), 1.2, x)
    rhs = a * poisson_transform_at(F1, 1.2, x) + c * poisson_transform_at(F2, 1.2, x)
    np.testing.assert_allclose(lhs, rhs, atol=1e-11 * (1 + abs(a) + abs(c)))


@pytest.mark.parametrize("n", [2, 3])
def test_funk_hecke_field_matches_direct_quadrature(n, rng):
    p = SpaceParams(n)
    size = 256 if n == 2 else (48, 96)
    F = BoundaryFunction.from_function(p, lambda b: 1 + 0.5 * b[:, 0] - b[:, -1] ** 2 + 0.3 * b[:, 0] * b[:, 1], size)
    pf = PoissonField(F, 1.0, 3)
    x = random_ball_points(rng, n, 20, 0.6)
    np.testing.assert_allclose(pf(x), poisson_transform_at(F, 1.0, x), atol=1e-8)


def test_zonal_multiplier_degree_zero_is_spherical_function(h3):
    r = np.linspace(0, 3, 7)
    m = zonal_multipliers(h3, 0.9, [0, 1, 2], r)
    np.testing.assert_allclose(m[0], spherical_function(h3, 0.9, r), atol=1e-9)
    np.testing.assert_allclose(m[1:, 0], 0.0, atol=1e-12)


def test_recover_boundary_data_round_trip(h3):
    F = BoundaryFunction.from_function(h3, lambda b: 0.3 + b[:, 0] - 0.5 * b[:, 2] ** 2, (32, 64))
    pf = PoissonField(F, 0.0, 3)
    G = recover_boundary_data(h3, pf, 0.0, 1.0, 3, size=(32, 64))
    np.testing.assert_allclose(G.values, F.values, atol=1e-10)


# --- Hardy-type norms ----------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_hardy_ratio_of_phi0_is_one(n):
    p = SpaceParams(n)
    g = RadialGrid(8.0, 81)
    phi0 = RadialFunction(g, spherical_function_table(p, [0.0], g.r)[0].real)
    rep = hardy_norm(phi0, p=2.0, params=p)
    np.testing.assert_allclose(rep.ratios, 1.0, atol=1e-12)
    assert rep.nondecreasing and not rep.unbounded_trend


def test_hardy_flags_complex_parameter_outside_tube(h3):
    g = RadialGrid(12.0, 121)
    f = RadialFunction(g, spherical_function_table(h3, [1 + 1.5j], g.r)[0])
    assert hardy_norm(f, p=math.inf, params=h3).unbounded_trend
    # inside the tube the function stays bounded, yet the phi_0-normalised ratio still grows
    inside = RadialFunction(g, spherical_function_table(h3, [1 + 0.5j], g.r)[0])
    assert np.max(np.abs(inside.values)) <= 1.5
    assert hardy_norm(inside, p=math.inf, params=h3).growth_ratio > 10
    real = RadialFunction(g, spherical_function_table(h3, [1.0], g.r)[0])
    assert not hardy_norm(real, p=math.inf, params=h3).unbounded_trend


def test_hardy_norm_monotone_in_p(h3):
    F = BoundaryFunction.from_function(h3, lambda b: np.exp(0.8 * b[:, 0]) + b[:, 2])
    pf = PoissonField(F, 1.0, 6)
    radii = np.linspace(0, 3, 7)
    sups = [hardy_norm(pf, p, radii=radii, params=h3).ratios for p in (1.0, 2.0, 4.0, math.inf)]
    for lo, hi in zip(sups, sups[1:]):
        assert np.all(lo <= hi * (1 + 1e-12))


def test_hardy_weight_and_domain(h3):
    g = RadialGrid(5.0, 51)
    phi0 = RadialFunction(g, spherical_function_table(h3, [0.0], g.r)[0].real)
    rep = hardy_norm(phi0, p=1.0, M=1.0, params=h3)
    np.testing.assert_allclose(rep.ratios, 1.0 + g.r, rtol=1e-12)
    with pytest.raises(DomainError):
        hardy_norm(phi0, p=0.5, params=h3)
    with pytest.raises(DomainError):
        hardy_norm(phi0, M=-1.0, params=h3)


# --- Abel transform and slice projection ----------------------------------------


@pytest.fixture(scope="module")
def heat3():
    p = SpaceParams(3)
    g = RadialGrid(15.0, 1201)
    return {t: heat_kernel(p, t, g) for t in (0.2, 0.3, 0.5)}


def test_abel_even_positive_and_linear(h3, heat3):
    h = heat3[0.5]
    s = np.linspace(-4, 4, 41)
    a = abel_transform(h3, h, s)
    np.testing.assert_allclose(a, a[::-1], rtol=1e-13)
    assert np.all(a > 0)
    zero = RadialFunction(h.grid, np.zeros(h.grid.num_points))
    assert np.all(abel_transform(h3, zero, s) == 0)
    np.testing.assert_allclose(abel_transform(h3, 2.5 * h, s), 2.5 * a, rtol=1e-13)


def test_abel_of_heat_kernel_is_euclidean_gaussian(h3, heat3):
    # for H^3 the weighted horocyclic integral of h_t is e^{-t - s^2/4t} / sqrt(4 pi t)
    t = 0.5
    s = np.linspace(-3, 3, 13)
    want = np.exp(-t - s**2 / (4 * t)) / math.sqrt(4 * math.pi * t)
    np.testing.assert_allclose(abel_transform(h3, heat3[t], s), want, atol=1e-7)


def test_abel_rejects_slow_decay(h3):
    g = RadialGrid(5.0, 501)
    with pytest.raises(InsufficientDecayError):
        abel_transform(h3, RadialFunction.from_function(g, lambda r: np.exp(-0.2 * r)), [0.0])


@pytest.mark.parametrize("case", ["single", "product", "difference"])
def test_slice_projection(h3, heat3, case):
    h2_, h3_, h5 = heat3[0.2], heat3[0.3], heat3[0.5]
    f = {"single": h5, "product": h3_ * h2_, "difference": h2_ - h5}[case]
    grid = SpectralGrid.with_step(5.0, 0.05)
    dev, abel_side, sph_side = slice_projection_check(h3, f, grid)
    assert dev < 1e-4
    assert abel_side.grid is grid and sph_side.grid is grid


def test_slice_projection_stable_under_larger_support(h3, heat3):
    grid = SpectralGrid.with_step(5.0, 0.05)
    small = heat3[0.5]
    g = RadialGrid(30.0, 2401)
    big = heat_kernel(h3, 0.5, g)
    d1 = slice_projection_check(h3, small, grid)[1].values
    d2 = slice_projection_check(h3, big, grid)[1].values
    assert np.max(np.abs(d1 - d2)) < 1e-6


def test_poisson_kernel_eigen_check_fourth_order(h3):
    from roe_lab.experiments import kernel_eigen_check

    coarse, fine = kernel_eigen_check(h3, 1.0)
    assert fine < 1e-4
    assert abs(math.log2(coarse / fine) - 4.0) < 1.0


def test_poisson_transform_on_lattice(h3):
    from roe_lab.boundary_transforms import poisson_transform
    from roe_lab.space_core import BallField

    F = BoundaryFunction.from_function(h3, lambda b: np.ones(len(b)))
    out = BallField.from_function(h3, lambda x: np.zeros(len(x)), 21)
    field = poisson_transform(F, 0.5, out)
    # the kernel sharpens near the sphere, so direct quadrature is checked on |x| <= 0.9
    m = field.valid & (np.linalg.norm(field.coords, axis=-1) <= 0.9)
    want = spherical_function(h3, 0.5, radius(h3, field.coords[m]))
    assert np.max(np.abs(field.values[m] - want)) / np.max(np.abs(want)) < 1e-4
