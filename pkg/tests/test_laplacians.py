import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roe_lab.errors import DomainError, GridMismatchError
from roe_lab.laplacians import (
    IDENTITY,
    SolvableField,
    SolvablePoint,
    ball_laplacian,
    calibrate_kappa,
    delta_bar,
    delta_half,
    delta_one,
    distinguished_laplacian_via_relation,
    distinguished_laplacian_via_stencil,
    half_plane_distance,
    half_plane_laplacian,
    k_average_commutator,
    laplace_beltrami,
    masked_sup,
    radial_laplacian,
    reflect,
)
from roe_lab.roe_strichartz_engine import SequenceSpec, _psi_one
from roe_lab.space_core import BallField, RadialFunction, RadialGrid, SpaceParams
from roe_lab.spherical_analysis import spherical_function_table

coords = st.floats(-3, 3)
heights = st.floats(0.2, 5)
LATTICE = ((-1.0, 1.0), (-0.6, 0.6), 81, 49)


def point(b, y):
    return SolvablePoint(b, y)


# --- the group S and its modular function --------------------------------------------


def test_modular_function_values():
    assert delta_bar(point(3.0, math.e)) == pytest.approx(math.exp(-1))
    assert delta_bar(IDENTITY) == 1.0
    assert delta_half(point(0.0, 4.0)) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        SolvablePoint(0.0, 0.0)
    with pytest.raises(DomainError):
        delta_bar(np.array([1.0, -1.0]))


@given(coords, heights, coords, heights)
def test_modular_function_is_a_homomorphism(b1, y1, b2, y2):
    s, t = point(b1, y1), point(b2, y2)
    assert delta_bar(s * t) == pytest.approx(delta_bar(s) * delta_bar(t), rel=1e-12)


@given(coords, heights, coords, heights, coords, heights)
def test_group_axioms(b1, y1, b2, y2, b3, y3):
    s, t, u = point(b1, y1), point(b2, y2), point(b3, y3)
    a, b = (s * t) * u, s * (t * u)
    assert a.b == pytest.approx(b.b, abs=1e-9) and a.y == pytest.approx(b.y, rel=1e-12)
    e = s * s.inverse()
    assert e.b == pytest.approx(0.0, abs=1e-12) and e.y == pytest.approx(1.0)
    assert (IDENTITY * s) == s and (s * IDENTITY) == s


@settings(max_examples=50)
@given(coords, heights, coords, heights, coords, heights)
def test_distance_is_left_invariant(b1, y1, b2, y2, bg, yg):
    g = point(bg, yg)
    z, w = g * point(b1, y1), g * point(b2, y2)
    assert half_plane_distance(z.b, z.y, w.b, w.y) == pytest.approx(
        half_plane_distance(b1, y1, b2, y2), rel=1e-9, abs=1e-9)


# --- Laplace-Beltrami stencils --------------------------------------------------------


def test_half_plane_laplacian_on_powers_of_y():
    s = 0.7
    f = SolvableField.from_function(lambda b, y: y**s + 0 * b, *LATTICE)
    lap = half_plane_laplacian(f).values
    _, Y = f.mesh
    m = np.isfinite(lap)
    assert np.max(np.abs(lap[m] - s * (s - 1) * Y[m] ** s)) < 1e-6


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("lam", [0.5, 1.5])
def test_radial_laplacian_eigenfunction(n, lam):
    p = SpaceParams(n)
    g = RadialGrid(8.0, 801)
    phi = RadialFunction(g, spherical_function_table(p, [lam], g.r)[0].real)
    lap = radial_laplacian(p, phi)
    assert lap.grid.num_points == g.num_points - 2
    res = lap.values + (lam**2 + p.rho**2) * phi.values[:-2]
    assert np.max(np.abs(res)) < 1e-7


def test_radial_laplacian_fourth_order(h3):
    errs = []
    for h in (0.1, 0.05):
        g = RadialGrid(4.0, int(round(4 / h)) + 1)
        phi = RadialFunction(g, spherical_function_table(h3, [1.0], g.r)[0].real)
        lap = radial_laplacian(h3, phi)
        errs.append(np.max(np.abs(lap.values + 2.0 * phi.values[:-2])))
    assert abs(math.log2(errs[0] / errs[1]) - 4) < 0.5


def test_delta_one_of_phi_two_rho_on_h2(h2):
    g = RadialGrid(6.0, 601)
    phi = RadialFunction(g, spherical_function_table(h2, [1.0], g.r)[0].real)
    d = delta_one(phi, h2)
    np.testing.assert_allclose(d.values, phi.values[:-2], atol=1e-7)


@pytest.mark.parametrize("n", [2, 3])
def test_ball_laplacian_radial_eigenfunction(n):
    p = SpaceParams(n)
    num = 161 if n == 2 else 61
    g = RadialGrid(8.0, 801)
    phi = RadialFunction(g, spherical_function_table(p, [1.0], g.r)[0].real)
    f = BallField.from_radial(p, phi, num)
    lap = ball_laplacian(f)
    near = np.sqrt(np.sum(f.coords**2, axis=-1)) <= 0.5
    m = near & lap.valid
    assert np.max(np.abs(lap.values[m] + (1 + p.rho**2) * f.values[m])) < 1e-4


def test_k_average_commutes_with_laplacian(h3):
    assert k_average_commutator(h3) < 1e-4


def test_laplace_beltrami_dispatch(h3):
    with pytest.raises(DomainError):
        laplace_beltrami(RadialFunction(RadialGrid(1.0, 11), np.zeros(11)))
    with pytest.raises(TypeError):
        laplace_beltrami(np.zeros(5))


def test_lattice_shape_mismatch():
    with pytest.raises(GridMismatchError):
        SolvableField((-1, 1), (-1, 1), 5, 5, np.zeros((4, 5)))
    with pytest.raises(DomainError):
        SolvableField((1, -1), (-1, 1), 5, 5, np.zeros((5, 5)))


# --- the distinguished Laplacian ------------------------------------------------------


@pytest.fixture(scope="module")
def psi1_field():
    spec = SequenceSpec("distinguished_eigen", b_range=LATTICE[0], u_range=LATTICE[1],
                        num_b=LATTICE[2], num_u=LATTICE[3])
    return SolvableField.from_function(_psi_one(spec), *LATTICE)


def _rel_masked(a, b):
    m = np.isfinite(a) & np.isfinite(b)
    return np.max(np.abs(a[m] - b[m])) / np.max(np.abs(b[m]))


def test_constant_is_eigenfunction_with_minus_one():
    one = SolvableField.from_function(lambda b, y: np.ones_like(b), *LATTICE)
    out = distinguished_laplacian_via_relation(one).values
    m = np.isfinite(out)
    assert m.sum() > 0.3 * m.size
    assert np.max(np.abs(out[m] + 1.0)) < 1e-8


def test_psi1_is_eigenfunction_with_plus_one(psi1_field):
    out = distinguished_laplacian_via_relation(psi1_field).values
    assert _rel_masked(out, psi1_field.values) < 1e-5


def test_psi1_bounded():
    # the sup saturates as the lattice widens in log y
    sups = []
    for U in (2.0, 4.0, 6.0):
        lat = ((-1.0, 1.0), (-U, U), 41, 61)
        spec = SequenceSpec("distinguished_eigen", b_range=lat[0], u_range=lat[1], num_b=41, num_u=61)
        sups.append(masked_sup(SolvableField.from_function(_psi_one(spec), *lat).values))
    assert max(sups) < 1.25
    assert abs(sups[2] - sups[1]) < 1e-6 * sups[1]


def test_relation_path_is_linear(psi1_field):
    one = psi1_field.like(np.ones(psi1_field.values.shape))
    a = distinguished_laplacian_via_relation(psi1_field.like(2.0 * psi1_field.values - 3.0 * one.values)).values
    b = 2.0 * distinguished_laplacian_via_relation(psi1_field).values - 3.0 * distinguished_laplacian_via_relation(one).values
    m = np.isfinite(a) & np.isfinite(b)
    assert np.max(np.abs(a[m] - b[m])) < 1e-9


def test_stencil_with_unit_kappa_matches_relation(psi1_field):
    field = psi1_field.like(psi1_field.values + 0.5)
    st_ = distinguished_laplacian_via_stencil(field, kappa=1.0).values
    rel = distinguished_laplacian_via_relation(field).values
    assert _rel_masked(st_, rel) < 1e-4


def test_bare_sum_of_squares_kills_constants():
    one = SolvableField.from_function(lambda b, y: np.ones_like(b), *LATTICE)
    out = distinguished_laplacian_via_stencil(one, kappa=0.5, shift=0.0).values
    assert masked_sup(out) < 1e-12


def test_kappa_calibration_recovers_one(psi1_field):
    B, Y = psi1_field.mesh
    bump = psi1_field.like(np.exp(-((B - 0.1) ** 2 + np.log(Y) ** 2) / 0.1))
    cal = calibrate_kappa([psi1_field, bump])
    assert abs(cal.kappa - 1.0) < 1e-3
    assert cal.max_relative_residual < 1e-3


def test_reflection_is_an_involution(psi1_field):
    B, Y = psi1_field.mesh
    f = psi1_field.like(np.exp(-(B**2 + np.log(Y) ** 2)))
    twice = reflect(reflect(f)).values
    m = np.isfinite(twice)
    assert m.sum() > 0.3 * m.size
    assert np.max(np.abs(twice[m] - f.values[m])) < 1e-4


def test_stencil_operator_commutes_with_right_translation():
    lat = ((-1.5, 1.5), (-1.0, 1.0), 121, 81)

    def f(b, y):
        return np.exp(-(b**2 + np.log(y) ** 2))

    s = SolvablePoint(0.3, math.exp(0.25))

    def f_shifted(b, y):  # f o R_s, x s = (b + y b_s, y y_s)
        return f(b + y * s.b, y * s.y)

    base = SolvableField.from_function(f, *lat)
    moved = SolvableField.from_function(f_shifted, *lat)
    L_base = distinguished_laplacian_via_stencil(base, kappa=1.0)
    L_moved = distinguished_laplacian_via_stencil(moved, kappa=1.0).values
    B, Y = base.mesh
    translated = L_base(B + Y * s.b, Y * s.y)
    assert _rel_masked(L_moved, translated) < 1e-3
