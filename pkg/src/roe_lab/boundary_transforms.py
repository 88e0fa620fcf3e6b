"""Poisson kernels and transforms, Hardy-type norms and the Abel transform.

The Poisson kernel is used in its ball-model closed form
``e_{lambda,b}(x) = ((1 - |x|^2) / |x - b|^2)^(rho + i lambda)``; no Iwasawa
projection is ever computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_legendre, roots_legendre

from ._numerics import simpson_weights
from .errors import DomainError, InsufficientDecayError
from .space_core import (
    BallField,
    BoundaryFunction,
    RadialFunction,
    SpaceParams,
    harmonic,
    harmonic_indices,
    sphere_area,
)
from .spherical_analysis import SpectralFunction, SpectralGrid, spherical_function_table, spherical_transform

# --- Poisson kernel --------------------------------------------------------------


@dataclass(frozen=True)
class PoissonKernelParams:
    params: SpaceParams
    lam: complex

    @property
    def exponent(self) -> complex:
        return self.params.rho + 1j * complex(self.lam)


def poisson_kernel(pk: PoissonKernelParams, x, b) -> np.ndarray:
    """Kernel value(s) at ball points ``x`` and boundary points ``b`` (broadcasting)."""
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    sx = np.sum(x**2, axis=-1)
    if np.any(sx >= 1.0):
        raise DomainError("Poisson kernel needs |x| < 1")
    if not np.allclose(np.sum(b**2, axis=-1), 1.0, atol=1e-12):
        raise DomainError("boundary points must lie on the unit sphere")
    base = (1.0 - sx) / np.sum((x - b) ** 2, axis=-1)
    return np.exp(pk.exponent * np.log(base))


def _kernel_matrix(exponent: complex, x: np.ndarray, b: np.ndarray) -> np.ndarray:
    sx = np.sum(x**2, axis=1)[:, None]
    dist2 = sx + 1.0 - 2.0 * (x @ b.T)
    return np.exp(exponent * np.log((1.0 - sx) / dist2))


def poisson_transform_at(F: BoundaryFunction, lam, points, chunk: int = 2048) -> np.ndarray:
    """Direct quadrature ``sum_b w_b e_{lambda,b}(x) F(b)`` at arbitrary ball points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(np.sum(pts**2, axis=1) >= 1.0):
        raise DomainError("Poisson transform needs points inside the ball")
    pk = PoissonKernelParams(F.params, lam)
    wf = F.weights * F.values
    out = np.empty(len(pts), dtype=complex)
    for start in range(0, len(pts), chunk):
        sl = slice(start, start + chunk)
        out[sl] = _kernel_matrix(pk.exponent, pts[sl], F.points) @ wf
    return out


def poisson_transform(F: BoundaryFunction, lam, out: BallField) -> BallField:
    """P_lambda F sampled at every valid node of the lattice ``out``."""
    if F.params != out.params:
        raise DomainError("boundary data and lattice belong to different spaces")
    vals = np.full(out.values.shape, np.nan, dtype=complex)
    mask = out.inside
    vals[mask] = poisson_transform_at(F, lam, out.coords[mask])
    return out.like(vals)


# --- harmonic (Funk-Hecke) representation ----------------------------------------

_ZONAL_NODES = 4000


@lru_cache(maxsize=4)
def _zonal_rule(n: int):
    if n == 3:
        t, w = roots_legendre(_ZONAL_NODES)
        return t, w / 2.0
    theta = 2.0 * np.pi * np.arange(_ZONAL_NODES) / _ZONAL_NODES
    return np.cos(theta), np.full(_ZONAL_NODES, 1.0 / _ZONAL_NODES)


def zonal_multipliers(params: SpaceParams, lam, degrees, r) -> np.ndarray:
    """Funk-Hecke multipliers Phi_l(r) of the Poisson kernel, shape (len(degrees), len(r)).

    ``P_lambda Y = Phi_l(r) Y`` on the sphere of geodesic radius r for every
    harmonic Y of degree l. Phi_0 is the spherical function.
    """
    if params.n not in (2, 3):
        raise DomainError("zonal multipliers are implemented for n = 2, 3")
    t, w = _zonal_rule(params.n)
    degrees = np.atleast_1d(degrees)
    s = np.tanh(np.atleast_1d(np.asarray(r, dtype=float)) / 2.0)[:, None]
    base = (1.0 - s**2) / (1.0 + s**2 - 2.0 * s * t[None, :])
    kern = np.exp((params.rho + 1j * complex(lam)) * np.log(base)) * w[None, :]
    if params.n == 3:
        poly = np.stack([eval_legendre(int(l), t) for l in degrees])
    else:
        theta = 2.0 * np.pi * np.arange(len(t)) / len(t)
        poly = np.stack([np.cos(int(l) * theta) for l in degrees])
    return poly @ kern.T


def harmonic_coefficients(F: BoundaryFunction, max_degree: int) -> dict:
    """Coefficients against harmonics orthonormal for the standard surface measure."""
    area = sphere_area(F.params.n - 1)
    coeffs = {}
    for l, m in harmonic_indices(F.params, max_degree):
        y = harmonic(F.params, l, m, F.points)
        coeffs[(l, m)] = complex(area * np.sum(F.weights * F.values * np.conj(y)))
    return coeffs


def boundary_from_coefficients(params: SpaceParams, coeffs: dict, size=None) -> BoundaryFunction:
    q = BoundaryFunction.quadrature(params, size)
    vals = np.zeros(len(q.weights), dtype=complex)
    for (l, m), c in coeffs.items():
        vals += c * harmonic(params, l, m, q.points)
    return q.with_values(vals)


class PoissonField:
    """Callable P_lambda F for boundary data of bounded harmonic degree.

    Evaluates through the Funk-Hecke expansion, which is exact for data that
    is a finite sum of harmonics and stays accurate near the boundary where
    the direct quadrature would need very fine boundary grids.
    """

    def __init__(self, F: BoundaryFunction, lam, max_degree: int):
        self.params = F.params
        self.lam = complex(lam)
        self.max_degree = int(max_degree)
        self.coeffs = harmonic_coefficients(F, max_degree)

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        norm = np.sqrt(np.sum(pts**2, axis=1))
        if np.any(norm >= 1.0):
            raise DomainError("Poisson transform needs points inside the ball")
        r = 2.0 * np.arctanh(norm)
        safe = np.where(norm[:, None] > 0, pts / np.where(norm > 0, norm, 1.0)[:, None], 0.0)
        safe[norm == 0, -1] = 1.0
        degrees = np.arange(self.max_degree + 1)
        # points are typically whole spheres, so only a few distinct radii occur
        radii, inverse = np.unique(np.round(r, 11), return_inverse=True)
        mult = np.concatenate(
            [
                zonal_multipliers(self.params, self.lam, degrees, radii[k : k + 256])
                for k in range(0, len(radii), 256)
            ],
            axis=1,
        )[:, inverse]
        out = np.zeros(len(pts), dtype=complex)
        for (l, m), c in self.coeffs.items():
            out += c * mult[l] * harmonic(self.params, l, m, safe)
        return out


def recover_boundary_data(
    params: SpaceParams, f, lam, r: float, max_degree: int, size=None
) -> BoundaryFunction:
    """Boundary data F with f = P_lambda F, read off the sphere of radius r.

    ``f`` is a BallField or a callable on ball points. Each harmonic
    coefficient of f on the sphere is divided by the Funk-Hecke multiplier.
    """
    q = BoundaryFunction.quadrature(params, size)
    vals = f(math.tanh(r / 2.0) * q.points)
    if not np.all(np.isfinite(vals)):
        raise DomainError(f"sphere of radius {r:g} is not covered by the field")
    sampled = harmonic_coefficients(q.with_values(vals), max_degree)
    mult = zonal_multipliers(params, lam, np.arange(max_degree + 1), [r])[:, 0]
    if np.any(np.abs(mult) < 1e-12):
        raise DomainError("a Funk-Hecke multiplier vanishes at this radius; pick another r")
    coeffs = {lm: c / mult[lm[0]] for lm, c in sampled.items()}
    return boundary_from_coefficients(params, coeffs, size)


# --- Hardy-type norms --------------------------------------------------------------

GROWTH_FACTOR = 10.0


@dataclass
class HardyNormReport:
    p: float
    M: float
    radii: np.ndarray
    ratios: np.ndarray
    supremum: float
    growth_ratio: float
    unbounded_trend: bool

    @property
    def nondecreasing(self) -> bool:
        """True if the ratio profile never drops by more than 1e-9 relative."""
        d = np.diff(self.ratios)
        return bool(np.all(d >= -1e-9 * max(self.supremum, 1e-300)))


def _sphere_means(field, params: SpaceParams, radii, p, quadrature):
    if isinstance(field, RadialFunction):
        if radii.shape == field.r.shape and np.array_equal(radii, field.r):
            return np.abs(field.values)  # the nodes themselves; no interpolation needed
        return np.abs(field(radii))
    q = quadrature or BoundaryFunction.quadrature(params)
    out = np.empty(len(radii))
    for i, r in enumerate(radii):
        vals = field(math.tanh(r / 2.0) * q.points)
        if not np.all(np.isfinite(vals)):
            raise DomainError(f"geodesic sphere of radius {r:g} leaves the lattice")
        a = np.abs(vals)
        out[i] = a.max() if math.isinf(p) else np.sum(q.weights * a**p) ** (1.0 / p)
    return out


def hardy_norm(
    field,
    p: float = 2.0,
    M: float = 0.0,
    radii=None,
    params: SpaceParams | None = None,
    quadrature: BoundaryFunction | None = None,
    growth_factor: float = GROWTH_FACTOR,
) -> HardyNormReport:
    """Weighted ratio ``(1 + r)^M phi_0(r)^-1 ||f(r .)||_{L^p(K)}`` over sampled radii.

    Args:
        field: BallField, RadialFunction, or a callable on ball points (then
            ``params`` is required).
        p: exponent in ``[1, inf]``.
        M: polynomial weight exponent.
        radii: radii to sample; defaults to the lattice's usable range (or the
            radial grid).
        growth_factor: the profile is flagged as trending unbounded when the
            last ratio exceeds ``growth_factor`` times the first one.
    """
    if not p >= 1:
        raise DomainError("p must be >= 1")
    if M < 0:
        raise DomainError("weight exponent M must be >= 0")
    if isinstance(field, BallField):
        params = field.params
        if radii is None:
            r_max = field.r_limit
            radii = np.linspace(0.0, r_max, max(int(r_max / field.step), 2) + 1)
    elif isinstance(field, RadialFunction):
        if params is None:
            raise DomainError("params are required for a radial profile")
        if radii is None:
            radii = field.r
    elif params is None or radii is None:
        raise DomainError("callable fields need params and radii")
    radii = np.asarray(radii, dtype=float)
    means = _sphere_means(field, params, radii, p, quadrature)
    phi0 = spherical_function_table(params, [0.0], radii)[0].real
    ratios = (1.0 + radii) ** M * means / phi0
    first = ratios[0]
    growth = float(ratios[-1] / first) if first > 0 else math.inf
    return HardyNormReport(
        p=p,
        M=M,
        radii=radii,
        ratios=ratios,
        supremum=float(ratios.max()),
        growth_ratio=growth,
        unbounded_trend=bool(growth > growth_factor),
    )


# --- Abel transform ------------------------------------------------------------------

ABEL_NODES = 1601
ABEL_DECAY_TOL = 1e-14


def abel_transform(params: SpaceParams, f: RadialFunction, s_grid, nodes: int = ABEL_NODES):
    """Horocyclic integral with the e^{rho s}-type weight, at the points ``s_grid``.

    With the horosphere through height e^s in the upper half-space, the
    weighted integral reduces to
    ``Omega_{n-2} 2^rho int_0^inf f(arccosh(cosh s + w^2)) w^(n-2) dw``,
    which is manifestly even in s. The substitution ``w = sinh(tau)`` and a
    cut-off where the argument reaches ``f.grid.r_max`` give a smooth integral
    on a finite interval, evaluated by composite Simpson.
    """
    if params.n < 2:
        raise DomainError("dimension must be >= 2")
    s = np.abs(np.asarray(s_grid, dtype=float))
    vals = np.asarray(f.values)
    scale = np.max(np.abs(vals))
    if scale == 0:
        return np.zeros(s.shape, dtype=vals.dtype)
    if np.max(np.abs(vals[-3:])) > ABEL_DECAY_TOL**0.5 * scale:
        raise InsufficientDecayError("radial profile has not decayed by r_max")

    # stay two cells inside the grid so the cubic interpolation stencil is defined
    r_max = f.grid.r_max - 2.0 * f.grid.step
    flat = s.ravel()
    out = np.zeros(flat.shape, dtype=np.result_type(vals.dtype, float))
    live = flat < r_max
    sl = flat[live]
    tau_max = np.arcsinh(np.sqrt(np.cosh(r_max) - np.cosh(sl)))
    u = np.linspace(0.0, 1.0, nodes)
    tau = tau_max[:, None] * u[None, :]
    arg = np.cosh(sl)[:, None] + np.sinh(tau) ** 2
    rr = np.minimum(np.arccosh(arg), r_max)
    integrand = f(rr.ravel()).reshape(rr.shape) * np.sinh(tau) ** (params.n - 2) * np.cosh(tau)
    w = simpson_weights(nodes, 1.0)
    integral = (integrand @ w) * tau_max / (nodes - 1)
    out[live] = sphere_area(params.n - 2) * 2.0**params.rho * integral
    return out.reshape(s.shape)


def euclidean_fourier_even(s_grid, g, lam) -> np.ndarray:
    """``int g(s) e^{-i lam s} ds`` for an even g sampled on a symmetric uniform grid."""
    s = np.asarray(s_grid, dtype=float)
    h = s[1] - s[0]
    w = simpson_weights(len(s), h)
    return np.cos(np.outer(np.asarray(lam), s)) @ (w * g)


def default_s_grid(f: RadialFunction) -> np.ndarray:
    r_max = f.grid.r_max
    k = int(round(r_max / f.grid.step))
    return np.linspace(-r_max, r_max, 2 * k + 1)


def slice_projection_check(params: SpaceParams, f: RadialFunction, grid: SpectralGrid, s_grid=None):
    """Max over the lambda grid of |FT(A f) - f^| / max |f^|.

    Returns ``(deviation, abel_side, spherical_side)`` so callers can inspect both.
    """
    s = default_s_grid(f) if s_grid is None else np.asarray(s_grid, dtype=float)
    g = abel_transform(params, f, s)
    ft = euclidean_fourier_even(s, g, grid.lam)
    sph = spherical_transform(params, f, grid).values
    scale = np.max(np.abs(sph))
    dev = float(np.max(np.abs(ft - sph)) / scale) if scale > 0 else float(np.max(np.abs(ft)))
    return dev, SpectralFunction(grid, ft), SpectralFunction(grid, sph)


__all__ = [
    "PoissonKernelParams",
    "poisson_kernel",
    "poisson_transform",
    "poisson_transform_at",
    "PoissonField",
    "zonal_multipliers",
    "harmonic_coefficients",
    "boundary_from_coefficients",
    "recover_boundary_data",
    "HardyNormReport",
    "hardy_norm",
    "abel_transform",
    "euclidean_fourier_even",
    "slice_projection_check",
]
