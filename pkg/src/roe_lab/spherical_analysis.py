"""Elementary spherical functions, the spherical Fourier transform and its
inverse, heat kernels and radial convolution on H^n.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import loggamma, roots_jacobi

from ._numerics import simpson_weights
from .errors import CalibrationError, DomainError, InsufficientDecayError
from .space_core import RadialFunction, RadialGrid, SpaceParams, volume_density

ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
ODE_METHOD = "DOP853"
SERIES_RADIUS = 0.05
TAIL_TOL = 1e-10
ROUND_TRIP_TOL = 1e-4


@dataclass(frozen=True)
class SpectralGrid:
    lambda_max: float
    num_points: int

    def __post_init__(self):
        if not self.lambda_max > 0:
            raise DomainError("lambda_max must be positive")
        if self.num_points < 3:
            raise DomainError("a spectral grid needs at least three nodes")

    @classmethod
    def with_step(cls, lambda_max: float, step: float) -> "SpectralGrid":
        return cls(lambda_max, int(math.ceil(lambda_max / step)) + 1)

    @property
    def step(self) -> float:
        return self.lambda_max / (self.num_points - 1)

    @property
    def lam(self) -> np.ndarray:
        return np.linspace(0.0, self.lambda_max, self.num_points)


@dataclass
class SpectralFunction:
    """Even function of lambda stored on lambda >= 0."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.num_points,):
            raise DomainError("values do not match the spectral grid")

    @classmethod
    def from_function(cls, grid: SpectralGrid, func) -> "SpectralFunction":
        return cls(grid, np.asarray(func(grid.lam)))

    @property
    def lam(self) -> np.ndarray:
        return self.grid.lam

    def __call__(self, lam) -> np.ndarray:
        # evenness: F(-lambda) = F(lambda)
        lam = np.abs(np.asarray(lam, dtype=float))
        return np.interp(lam, self.lam, self.values.real) + 1j * np.interp(
            lam, self.lam, self.values.imag
        )


# --- spherical functions --------------------------------------------------------


def _hypergeometric_start(params: SpaceParams, lams: np.ndarray, r: np.ndarray):
    """phi and d(phi)/dr from 2F1((rho+i lam)/2, (rho-i lam)/2; n/2; -sinh^2 r).

    Only used for small r, where -sinh^2 r is tiny and the series converges fast.
    """
    lams = np.asarray(lams, dtype=complex)[:, None]
    r = np.asarray(r, dtype=float)[None, :]
    a = (params.rho + 1j * lams) / 2
    b = (params.rho - 1j * lams) / 2
    c = params.n / 2
    z = -np.sinh(r) ** 2
    term = np.ones(np.broadcast_shapes(lams.shape, r.shape), dtype=complex)
    total = term.copy()
    dtotal = np.zeros_like(total)
    for k in range(200):
        term = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total = total + term
        # d/dz z^{k+1} = (k+1) z^k
        with np.errstate(invalid="ignore", divide="ignore"):
            dtotal = dtotal + np.where(z != 0, term * (k + 1) / z, 0.0)
        if np.max(np.abs(term)) < 1e-18 * np.max(np.abs(total)):
            break
    else:  # pragma: no cover - guarded by SERIES_RADIUS
        raise RuntimeError("hypergeometric start-up series did not converge")
    dz = -2.0 * np.sinh(r) * np.cosh(r)
    # term at k = 0 of the derivative is a*b/c
    dtotal = np.where(z != 0, dtotal, a * b / c)
    return total, dtotal * dz


def spherical_function_table(
    params: SpaceParams, lams, r, *, rtol=ODE_RTOL, atol=ODE_ATOL, method=ODE_METHOD
) -> np.ndarray:
    """phi_lambda(r) for every lambda in ``lams`` and every r, shape (len(lams), len(r)).

    Solves u'' + (n-1) coth(r) u' + (lambda^2 + rho^2) u = 0 in the Liouville
    form v = sinh(r)^rho u, v'' + (lambda^2 - rho (rho - 1) / sinh^2 r) v = 0,
    started from the hypergeometric series at a small radius.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    rho = params.rho
    out = np.empty((len(lams), len(r)), dtype=complex)

    near = r <= SERIES_RADIUS
    if np.any(near):
        out[:, near] = _hypergeometric_start(params, lams, r[near])[0]
    far = ~near
    if not np.any(far):
        return out

    r0 = SERIES_RADIUS
    u0, du0 = _hypergeometric_start(params, lams, np.array([r0]))
    u0, du0 = u0[:, 0], du0[:, 0]
    s0 = math.sinh(r0)
    v0 = s0**rho * u0
    dv0 = s0**rho * (du0 + rho / math.tanh(r0) * u0)
    lam2 = lams**2
    m = len(lams)
    shift = rho * (rho - 1.0)

    def rhs(t, y):
        v = y[:m]
        return np.concatenate([y[m:], -(lam2 - shift / math.sinh(t) ** 2) * v])

    # the integrator wants strictly increasing output times
    targets, inverse = np.unique(r[far], return_inverse=True)
    sol = solve_ivp(
        rhs,
        (r0, float(targets[-1])),
        np.concatenate([v0, dv0]),
        method=method,
        t_eval=targets,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:  # pragma: no cover
        raise RuntimeError(f"radial ODE failed: {sol.message}")
    v = sol.y[:m] / np.sinh(targets) ** rho
    out[:, far] = v[:, inverse.ravel()]
    return out


def spherical_function(params: SpaceParams, lam, r):
    """phi_lambda(r); scalar r gives a complex scalar, array r an array."""
    scalar = np.ndim(r) == 0
    vals = spherical_function_table(params, [lam], np.atleast_1d(r))[0]
    return complex(vals[0]) if scalar else vals


def spherical_function_h3(lam, r):
    """Closed form sin(lambda r) / (lambda sinh r) on H^3, with its limits."""
    lam = complex(lam)
    r = np.asarray(r, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        if lam == 0:
            vals = np.where(r == 0, 1.0, r / np.sinh(r))
        else:
            vals = np.where(r == 0, 1.0, np.sin(lam * r) / (lam * np.sinh(r)))
    return vals.astype(complex)


def spherical_function_integral(params: SpaceParams, lam, r, nodes: int = 400):
    """phi_lambda(r) from the K-integral of the Poisson kernel power.

    The integrand depends only on t = <x/|x|, b>, so the integral reduces to
    Gauss-Jacobi quadrature on [-1, 1] with weight (1 - t^2)^((n-3)/2).
    """
    alpha = (params.n - 3) / 2
    t, w = roots_jacobi(nodes, alpha, alpha)
    w = w / w.sum()
    r = np.atleast_1d(np.asarray(r, dtype=float))
    s = np.tanh(r / 2)[:, None]
    kern = (1 - s**2) / (1 + s**2 - 2 * s * t[None, :])
    return (kern ** (params.rho + 1j * complex(lam))) @ w


# --- tables and the Plancherel density ----------------------------------------

_TABLE_CACHE: OrderedDict = OrderedDict()
_TABLE_CACHE_SIZE = 8


def _table(params: SpaceParams, lam: np.ndarray, r: np.ndarray) -> np.ndarray:
    key = (params.n, lam.tobytes(), r.tobytes())
    hit = _TABLE_CACHE.get(key)
    if hit is not None:
        _TABLE_CACHE.move_to_end(key)
        return hit
    table = spherical_function_table(params, lam, r).real
    table.setflags(write=False)
    _TABLE_CACHE[key] = table
    if len(_TABLE_CACHE) > _TABLE_CACHE_SIZE:
        _TABLE_CACHE.popitem(last=False)
    return table


def plancherel_density(params: SpaceParams, lam) -> np.ndarray:
    """|Gamma(rho + i lambda) / Gamma(i lambda)|^2, up to the inversion constant.

    Reduces to lambda^2 on H^3 and lambda tanh(pi lambda) on H^2.
    """
    lam = np.abs(np.asarray(lam, dtype=float))
    out = np.zeros_like(lam)
    nz = lam > 0
    z = 1j * lam[nz]
    out[nz] = np.exp(2.0 * (loggamma(params.rho + z) - loggamma(z)).real)
    return out


def reference_inversion_constant(params: SpaceParams) -> float:
    """Known inversion constant for n = 2, 3 (used only to audit calibration)."""
    if params.n == 3:
        return 1.0 / (2.0 * math.pi**2)
    if params.n == 2:
        return 1.0 / (2.0 * math.pi)
    raise DomainError("reference constant is tabulated for n = 2, 3 only")


@dataclass(frozen=True)
class PlancherelDensity:
    params: SpaceParams
    grid: SpectralGrid
    values: np.ndarray
    c_inv: float


# --- transforms -------------------------------------------------------------------


def _spectral_step_for(r_max: float) -> float:
    # Simpson's coarse sub-rule (step 2h) aliases at frequency pi/h; the H^2
    # density has poles at +-i/2, so its error is ~exp(-pi / (2h)).
    return min(0.025, math.pi / (4.0 * (r_max + 1.0)))


def default_spectral_grid(t_min: float, r_max: float) -> SpectralGrid:
    """lambda_max = 12 / sqrt(t_min), step fine enough to resolve radius r_max."""
    return SpectralGrid.with_step(12.0 / math.sqrt(t_min), _spectral_step_for(r_max))


def spherical_transform(
    params: SpaceParams, f: RadialFunction, grid: SpectralGrid, tail_tol: float = TAIL_TOL
) -> SpectralFunction:
    """f^(lambda) = Omega_{n-1} int_0^r_max f(r) phi_lambda(r) sinh^{n-1}(r) dr."""
    r = f.grid.r
    w = simpson_weights(len(r), f.grid.step) * params.sphere_area * volume_density(params, r)
    weighted = w * f.values
    phi = _table(params, grid.lam, r)

    # tail estimate: mass in the last 5% of the radial range against the total
    absw = np.abs(weighted) * np.abs(phi[0])
    k = max(int(0.05 * len(r)), 2)
    tail, total = absw[-k:].sum(), absw.sum()
    if total > 0 and tail > tail_tol * total:
        raise InsufficientDecayError(
            f"radial tail carries {tail / total:.2e} of the mass; increase r_max"
        )
    values = phi @ weighted
    if params.n % 2 == 0:
        values = values + _odd_endpoint_correction(params, f, grid.lam)
    return SpectralFunction(grid, values)


def _odd_endpoint_correction(params: SpaceParams, f: RadialFunction, lam) -> np.ndarray:
    """Leading Euler-Maclaurin term of composite Simpson at r = 0.

    For even n the integrand f phi_lambda sinh^{n-1} is odd in r, so its third
    derivative at the origin does not vanish and Simpson carries an
    ``h^4 g'''(0) / 180`` error that grows like lambda^2. Only n = 2 has a
    non-zero term of this order (sinh^{n-1} vanishes to order n - 1).
    """
    if params.n != 2:
        return np.zeros(len(lam))
    h = f.grid.step
    v = f.values
    # f''(0) from the even extension, fourth order
    f2 = (-2.0 * v[2] + 32.0 * v[1] - 30.0 * v[0]) / (12.0 * h * h)
    phi2 = -(np.asarray(lam) ** 2 + params.rho**2) / params.n
    g3 = params.sphere_area * (3.0 * (f2 + v[0] * phi2) + v[0])
    return h**4 / 180.0 * g3


_CALIBRATION: dict = {}


def calibrate_inversion(params: SpaceParams, grid: SpectralGrid, t_ref: float | None = None):
    """Calibrate the inversion constant on a Gaussian spectral profile.

    Inverts exp(-t_ref (lambda^2 + rho^2)) with unit constant, transforms back,
    and fits the scalar that restores the profile. Returns a PlancherelDensity.
    Raises CalibrationError if the fitted round trip misses by more than 1e-4.
    """
    if t_ref is None:
        t_ref = (12.0 / grid.lambda_max) ** 2
    key = (params.n, grid, t_ref)
    if key not in _CALIBRATION:
        r_max = 2.0 * params.rho * t_ref + math.sqrt(160.0 * t_ref) + 2.0
        step = min(0.0125, math.sqrt(t_ref) / 40.0)
        rgrid = RadialGrid(r_max, int(math.ceil(r_max / step)) + 1)
        target = SpectralFunction.from_function(
            grid, lambda l: np.exp(-t_ref * (l**2 + params.rho**2))
        )
        try:
            f = inverse_spherical_transform(params, target, rgrid, c_inv=1.0)
            back = spherical_transform(params, f, grid).values.real
        except InsufficientDecayError as exc:
            raise CalibrationError(
                f"inversion calibration round trip failed: {exc}",
                {"n": params.n, "c_inv": float("nan"), "error": float("inf"), "t_ref": t_ref},
            ) from exc
        tv = target.values.real
        c_inv = float(np.dot(back, tv) / np.dot(back, back))
        err = float(np.max(np.abs(c_inv * back - tv)) / np.max(np.abs(tv)))
        if err > ROUND_TRIP_TOL:
            raise CalibrationError(
                f"inversion calibration round trip error {err:.2e}",
                {"n": params.n, "c_inv": c_inv, "error": err, "t_ref": t_ref},
            )
        dens = plancherel_density(params, grid.lam)
        _CALIBRATION[key] = PlancherelDensity(params, grid, dens, c_inv)
    return _CALIBRATION[key]


def inverse_spherical_transform(
    params: SpaceParams,
    F: SpectralFunction,
    grid: RadialGrid,
    c_inv: float | None = None,
    decay_tol: float = 1e-5,
) -> RadialFunction:
    """f(r) = c_inv int_0^lambda_max F(lambda) phi_lambda(r) nu(lambda) d lambda."""
    lam = F.grid.lam
    dens = plancherel_density(params, lam)
    scale = np.max(np.abs(F.values) * (1.0 + dens))
    if scale > 0:
        k = max(int(0.05 * len(lam)), 2)
        if np.max(np.abs(F.values[-k:]) * (1.0 + dens[-k:])) > decay_tol * scale:
            raise InsufficientDecayError("spectral profile has not decayed by lambda_max")
    if c_inv is None:
        c_inv = calibrate_inversion(params, F.grid).c_inv
    w = simpson_weights(len(lam), F.grid.step) * dens
    phi = _table(params, lam, grid.r)
    vals = c_inv * ((F.values * w) @ phi)
    if np.isrealobj(F.values) or np.all(F.values.imag == 0):
        vals = vals.real
    return RadialFunction(grid, vals)


def heat_multiplier(params: SpaceParams, t: float, lam) -> np.ndarray:
    return np.exp(-t * (np.asarray(lam) ** 2 + params.rho**2))


def heat_kernel(
    params: SpaceParams, t: float, grid: RadialGrid, spectral: SpectralGrid | None = None,
    c_inv: float | None = None,
) -> RadialFunction:
    """h_t as the inverse spherical transform of exp(-t (lambda^2 + rho^2))."""
    if not t > 0:
        raise DomainError("heat kernel time must be positive")
    spectral = spectral or default_spectral_grid(t, grid.r_max)
    F = SpectralFunction.from_function(spectral, lambda l: heat_multiplier(params, t, l))
    return inverse_spherical_transform(params, F, grid, c_inv=c_inv)


def heat_kernel_h3(t: float, r) -> np.ndarray:
    """Closed form (4 pi t)^(-3/2) e^(-t) (r / sinh r) e^(-r^2 / 4t) on H^3."""
    r = np.asarray(r, dtype=float)
    with np.errstate(invalid="ignore"):
        ratio = np.where(r == 0, 1.0, r / np.sinh(r))
    return (4 * math.pi * t) ** -1.5 * math.exp(-t) * ratio * np.exp(-(r**2) / (4 * t))


def total_mass(params: SpaceParams, f: RadialFunction) -> complex:
    w = simpson_weights(f.grid.num_points, f.grid.step)
    return complex(params.sphere_area * np.sum(w * volume_density(params, f.r) * f.values))


def radial_convolve(
    params: SpaceParams, f: RadialFunction, g: RadialFunction,
    spectral: SpectralGrid | None = None, c_inv: float | None = None,
) -> RadialFunction:
    """f * g through the product of spherical transforms."""
    if f.grid != g.grid:
        raise DomainError("convolution operands must share a radial grid")
    spectral = spectral or SpectralGrid.with_step(30.0, _spectral_step_for(f.grid.r_max))
    fh = spherical_transform(params, f, spectral)
    gh = spherical_transform(params, g, spectral)
    prod = SpectralFunction(spectral, fh.values * gh.values)
    return inverse_spherical_transform(params, prod, f.grid, c_inv=c_inv)
