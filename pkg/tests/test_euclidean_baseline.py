import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roe_lab.errors import DomainError, GridMismatchError
from roe_lab.euclidean_baseline import (
    EuclideanField,
    annulus_localization,
    euclid_laplacian,
    euclid_sequence_check,
    predicted_rate,
    two_frequency_sequence,
)
from roe_lab.roe_strichartz_engine import HYPOTHESIS_VIOLATED, THEOREM_CONFIRMED

BOX = 2 * math.pi * 16
N = 256
ALPHA = 1.0


def field(func, d=1, box=BOX, n=N):
    return EuclideanField.from_function(d, box, n, func)


def test_grid_validation():
    with pytest.raises(DomainError):
        EuclideanField(1, BOX, 100, np.zeros(100))
    with pytest.raises(DomainError):
        EuclideanField(3, BOX, 8, np.zeros((8, 8, 8)))
    with pytest.raises(GridMismatchError):
        EuclideanField(2, BOX, 8, np.zeros(8))


def test_laplacian_of_cosine_is_exact():
    f = field(lambda x: np.cos(ALPHA * x))
    assert np.max(np.abs(euclid_laplacian(f).values + ALPHA**2 * f.values)) < 1e-12


def test_laplacian_of_constant_vanishes():
    f = field(lambda x: np.full_like(x, 3.0))
    assert np.max(np.abs(euclid_laplacian(f).values)) < 1e-12


def test_laplacian_of_gaussian_matches_analytic():
    f = field(lambda x: np.exp(-x**2), box=40.0, n=512)
    x = f.axis
    assert np.max(np.abs(euclid_laplacian(f).values - (4 * x**2 - 2) * np.exp(-x**2))) < 1e-8


def test_laplacian_2d_plane_wave():
    f = field(lambda x, y: np.exp(1j * (2 * x / 16 + 3 * y / 16)), d=2, n=64)
    mu = (2 / 16) ** 2 + (3 / 16) ** 2
    assert np.max(np.abs(euclid_laplacian(f).values + mu * f.values)) < 1e-12


def test_self_adjoint(rng):
    a = EuclideanField(1, BOX, N, rng.normal(size=N) + 1j * rng.normal(size=N))
    b = EuclideanField(1, BOX, N, rng.normal(size=N) + 1j * rng.normal(size=N))
    lhs = np.vdot(euclid_laplacian(a).values, b.values)
    rhs = np.vdot(a.values, euclid_laplacian(b).values)
    scale = np.linalg.norm(euclid_laplacian(a).values) * np.linalg.norm(b.values)
    assert abs(lhs - rhs) / scale < 1e-12


def eigen_sequence(J=10, d=1):
    if d == 1:
        return [field(lambda x, j=j: (-1.0) ** j * np.cos(ALPHA * x)) for j in range(-J, J + 1)]
    return [field(lambda x, y, j=j: (-1.0) ** j * (np.cos(ALPHA * x) + np.sin(ALPHA * y)), d=2, n=64)
            for j in range(-J, J + 1)]


@pytest.mark.parametrize("d", [1, 2])
def test_eigen_sequence_confirmed(d):
    rep = euclid_sequence_check(eigen_sequence(d=d), ALPHA, 0.0)
    assert np.max(rep.recursion_residuals) < 1e-12
    assert rep.conclusion_residual < 1e-12
    assert rep.verdict == THEOREM_CONFIRMED


def test_eigen_sequence_with_shift():
    rep = euclid_sequence_check(eigen_sequence(), ALPHA, rho_sq=0.25)
    assert rep.max_recursion_relative < 1e-12
    assert rep.verdict == THEOREM_CONFIRMED


def test_growing_sequence_flagged():
    beta = 1.25
    q = -(beta**2) / ALPHA**2
    seq = [field(lambda x, j=j: q**j * np.cos(beta * x)) for j in range(-8, 9)]
    rep = euclid_sequence_check(seq, ALPHA, 0.0)
    assert rep.max_recursion_relative < 1e-12
    assert not rep.size_bounded
    assert rep.uniform_bound > 10 * rep.sup_norms[8]
    assert rep.verdict == HYPOTHESIS_VIOLATED


def test_sequence_check_errors():
    seq = eigen_sequence(J=2)
    with pytest.raises(GridMismatchError):
        euclid_sequence_check(seq[:-1] + [field(lambda x: np.cos(x), n=128)], ALPHA)
    with pytest.raises(DomainError):
        euclid_sequence_check(seq, 0.0, 0.0)
    with pytest.raises(DomainError):
        euclid_sequence_check(seq[:1], ALPHA)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 2 * math.pi))
def test_conclusion_phase_invariant(theta):
    seq = eigen_sequence(J=3)
    rot = [f.like(np.exp(1j * theta) * f.values) for f in seq]
    a = euclid_sequence_check(seq, ALPHA)
    b = euclid_sequence_check(rot, ALPHA)
    assert abs(a.conclusion_relative - b.conclusion_relative) < 1e-12
    assert a.verdict == b.verdict


def test_annulus_mass_of_eigen_sequence():
    ann = annulus_localization(eigen_sequence(), ALPHA, 0.25)
    assert np.all(ann.outer_mass >= 0) and np.all(ann.inner_mass >= 0)
    assert max(ann.outer_mass.max(), ann.inner_mass.max()) < 1e-12


def test_two_frequency_rate():
    eps = 0.25
    seq = two_frequency_sequence(ALPHA, ALPHA + eps, 0.7, 10, BOX, N)
    ann = annulus_localization(seq, ALPHA, eps)
    assert ann.rate_relative_error < 0.1
    assert max(np.max(np.abs(f.values)) for f in seq) <= 2 + 1e-12


def test_two_frequency_rate_beyond_annulus():
    # a component further out decays faster than the bound, never slower
    eps = 0.25
    seq = two_frequency_sequence(ALPHA, ALPHA + 2 * eps, 0.4, 10, BOX, N)
    ann = annulus_localization(seq, ALPHA, eps)
    assert ann.fitted_rate <= ann.predicted_rate + 1e-12


def test_rate_formula_limits():
    assert predicted_rate(1.0, 0.0) == 1.0
    assert predicted_rate(1.0, 0.5, 0.25) == pytest.approx(1.25 / 2.5)
    with pytest.raises(DomainError):
        annulus_localization(eigen_sequence(J=2), ALPHA, 0.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.floats(0.3, 3.0))
def test_outer_mass_bounded_by_rate(k, scale):
    # bounded recursion-satisfying family: mass at index j <= M * rate^j
    eps = 0.25 * k
    beta = ALPHA + eps
    seq = two_frequency_sequence(ALPHA, beta, 1.1, 8, BOX, N)
    seq = [f.like(scale * f.values) for f in seq]
    ann = annulus_localization(seq, ALPHA, eps)
    M = max(np.linalg.norm(f.spectrum()) for f in seq)
    js = ann.indices[ann.indices >= 0]
    bound = M * predicted_rate(ALPHA, eps) ** js
    assert np.all(ann.outer_mass[ann.indices >= 0] <= bound * (1 + 1e-10))
