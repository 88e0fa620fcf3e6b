"""Geometry of real hyperbolic space in the ball model: grids, distances,
volume density, boundary quadrature and averages over geodesic spheres.

Curvature is fixed at -1; the ball metric is ``4|dx|^2 / (1 - |x|^2)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, sph_harm_y

from ._numerics import cubic_interpolate
from .errors import DomainError, GridMismatchError

BALL = "ball"
HALF_SPACE = "half_space"


@dataclass(frozen=True)
class SpaceParams:
    """Dimension and derived constants of H^n."""

    n: int
    model: str = BALL

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n}")
        if self.model not in (BALL, HALF_SPACE):
            raise DomainError(f"unknown model {self.model!r}")

    @property
    def rho(self) -> float:
        return (self.n - 1) / 2

    @property
    def multiplicity(self) -> int:
        return self.n - 1

    @property
    def sphere_area(self) -> float:
        """Area of the unit Euclidean (n-1)-sphere."""
        return sphere_area(self.n - 1)


def sphere_area(k: int) -> float:
    """Area of the unit k-sphere in R^{k+1}."""
    return 2.0 * math.pi ** ((k + 1) / 2) / math.exp(gammaln((k + 1) / 2))


@dataclass(frozen=True)
class RadialGrid:
    r_max: float
    num_points: int

    def __post_init__(self):
        if not self.r_max > 0:
            raise DomainError("r_max must be positive")
        if self.num_points < 2:
            raise DomainError("a radial grid needs at least two nodes")

    @property
    def step(self) -> float:
        return self.r_max / (self.num_points - 1)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.num_points)


@dataclass
class RadialFunction:
    """Samples of a K-invariant function on a geodesic-radius grid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.num_points,):
            raise GridMismatchError(
                f"expected {self.grid.num_points} values, got {self.values.shape}"
            )

    @classmethod
    def from_function(cls, grid: RadialGrid, func) -> "RadialFunction":
        return cls(grid, np.asarray(func(grid.r)))

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def __call__(self, r) -> np.ndarray:
        """Cubic interpolation in r using the even extension across r = 0."""
        r = np.abs(np.asarray(r, dtype=float))
        h = self.grid.step
        ext = np.concatenate([self.values[:0:-1], self.values])
        out = cubic_interpolate(ext, -self.grid.r_max, h, r.reshape(-1, 1))
        return out.reshape(r.shape)

    def _combine(self, other, op):
        if isinstance(other, RadialFunction):
            if other.grid != self.grid:
                raise GridMismatchError("radial functions live on different grids")
            other = other.values
        return RadialFunction(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return RadialFunction(self.grid, -self.values)


def _check_in_ball(x: np.ndarray) -> np.ndarray:
    sq = np.sum(np.square(x), axis=-1)
    if np.any(sq >= 1.0):
        raise DomainError("point on or outside the unit sphere")
    return sq


def geodesic_distance(params: SpaceParams, x, y) -> np.ndarray:
    """Hyperbolic distance between ball points (broadcasts over leading axes).

    Uses ``sinh(d/2) = |x - y| / sqrt((1 - |x|^2)(1 - |y|^2))``, which is the
    cosh-form closed formula rewritten to stay accurate for nearby points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != params.n or y.shape[-1] != params.n:
        raise DomainError(f"points must have {params.n} coordinates")
    sx = _check_in_ball(x)
    sy = _check_in_ball(y)
    diff = np.sqrt(np.sum(np.square(x - y), axis=-1))
    return 2.0 * np.arcsinh(diff / np.sqrt((1.0 - sx) * (1.0 - sy)))


def radius(params: SpaceParams, x) -> np.ndarray:
    """Distance from the base point, sigma(x) = d(x, 0)."""
    x = np.asarray(x, dtype=float)
    return geodesic_distance(params, x, np.zeros(params.n))


def volume_density(params: SpaceParams, r) -> np.ndarray:
    """Polar volume density sinh(r)^(n-1) (normalising constant 1)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    return np.sinh(r) ** (params.n - 1)


# --- boundary sphere ---------------------------------------------------------

DEFAULT_CIRCLE_NODES = 256
DEFAULT_SPHERE_NODES = (64, 128)


@dataclass
class BoundaryFunction:
    """Samples on S^{n-1} with quadrature weights for the normalised measure."""

    params: SpaceParams
    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        self.values = np.asarray(self.values)
        if np.any(self.weights <= 0):
            raise DomainError("quadrature weights must be positive")
        if not math.isclose(self.weights.sum(), 1.0, rel_tol=1e-12):
            raise DomainError("quadrature weights must sum to 1")
        if self.values.shape != self.weights.shape:
            raise GridMismatchError("values and weights differ in length")

    @classmethod
    def quadrature(cls, params: SpaceParams, size=None) -> "BoundaryFunction":
        """Quadrature nodes with all values set to 1.

        n = 2 uses ``size`` equispaced angles; n = 3 a Gauss-Legendre grid in
        cos(theta) times ``size[1]`` equispaced longitudes.
        """
        if params.n == 2:
            m = size or DEFAULT_CIRCLE_NODES
            ang = 2.0 * np.pi * np.arange(m) / m
            pts = np.column_stack([np.cos(ang), np.sin(ang)])
            w = np.full(m, 1.0 / m)
        elif params.n == 3:
            nt, nphi = size or DEFAULT_SPHERE_NODES
            ct, wt = np.polynomial.legendre.leggauss(nt)
            phi = 2.0 * np.pi * np.arange(nphi) / nphi
            CT, PHI = np.meshgrid(ct, phi, indexing="ij")
            st = np.sqrt(1.0 - CT**2)
            pts = np.column_stack(
                [(st * np.cos(PHI)).ravel(), (st * np.sin(PHI)).ravel(), CT.ravel()]
            )
            w = np.repeat(wt / 2.0, nphi) / nphi
        else:
            raise DomainError("boundary quadrature is implemented for n = 2, 3")
        return cls(params, pts, w, np.ones(len(w), dtype=complex))

    @classmethod
    def from_function(cls, params: SpaceParams, func, size=None) -> "BoundaryFunction":
        q = cls.quadrature(params, size)
        q.values = np.asarray(func(q.points), dtype=complex)
        return q

    def with_values(self, values) -> "BoundaryFunction":
        return BoundaryFunction(self.params, self.points, self.weights, values)

    def mean(self) -> complex:
        return complex(np.sum(self.weights * self.values))

    def norm(self, p: float) -> float:
        """L^p norm with respect to the normalised measure."""
        a = np.abs(self.values)
        if math.isinf(p):
            return float(a.max())
        return float(np.sum(self.weights * a**p) ** (1.0 / p))


def harmonic(params: SpaceParams, degree: int, order: int, points) -> np.ndarray:
    """Orthonormal harmonic of given degree on S^{n-1} (standard surface measure).

    n = 2: ``e^{i k theta} / sqrt(2 pi)`` with k = order (degree is |k|).
    n = 3: complex spherical harmonic Y_l^m.
    """
    pts = np.asarray(points, dtype=float)
    if params.n == 2:
        ang = np.arctan2(pts[:, 1], pts[:, 0])
        return np.exp(1j * order * ang) / np.sqrt(2.0 * np.pi)
    if params.n == 3:
        theta = np.arccos(np.clip(pts[:, 2], -1.0, 1.0))
        phi = np.arctan2(pts[:, 1], pts[:, 0])
        return sph_harm_y(degree, order, theta, phi)
    raise DomainError("harmonics are implemented for n = 2, 3")


def harmonic_indices(params: SpaceParams, max_degree: int):
    """All (degree, order) pairs up to ``max_degree``."""
    if params.n == 2:
        return [(abs(k), k) for k in range(-max_degree, max_degree + 1)]
    return [(l, m) for l in range(max_degree + 1) for m in range(-l, l + 1)]


# --- lattice fields on the ball ------------------------------------------------

DEFAULT_MARGIN = 0.02


@dataclass
class BallField:
    """Samples of a function on a uniform Cartesian lattice in the open ball.

    ``values`` has shape ``(N,) * n`` over ``[-1, 1]^n``; nodes with
    ``|x| > 1 - margin`` (and nodes dropped by stencils) hold NaN.
    """

    params: SpaceParams
    num_points: int
    values: np.ndarray
    margin: float = DEFAULT_MARGIN
    _coords: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.margin > 0:
            raise DomainError("boundary margin must be positive")
        if self.params.n not in (2, 3):
            raise DomainError("lattice fields are implemented for n = 2, 3")
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.num_points,) * self.params.n:
            raise GridMismatchError("values do not match the lattice shape")
        self.values[~self.inside] = np.nan

    @property
    def step(self) -> float:
        return 2.0 / (self.num_points - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.num_points)

    @property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``(N,) * n + (n,)``."""
        if self._coords is None:
            axes = np.meshgrid(*([self.axis] * self.params.n), indexing="ij")
            self._coords = np.stack(axes, axis=-1)
        return self._coords

    @property
    def inside(self) -> np.ndarray:
        return np.sum(self.coords**2, axis=-1) <= (1.0 - self.margin) ** 2

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def r_limit(self) -> float:
        """Largest geodesic radius whose sphere has full interpolation support."""
        s = 1.0 - self.margin - 2.0 * self.step * math.sqrt(self.params.n)
        return 2.0 * math.atanh(max(s, 0.0))

    @classmethod
    def from_function(cls, params, func, num_points, margin=DEFAULT_MARGIN):
        """Sample ``func(points) -> values`` at the lattice nodes inside the ball."""
        empty = cls(params, num_points, np.zeros((num_points,) * params.n), margin)
        inside = empty.inside
        vals = np.full(inside.shape, np.nan, dtype=complex)
        vals[inside] = func(empty.coords[inside])
        empty.values = vals
        return empty

    @classmethod
    def from_radial(cls, params, func, num_points, margin=DEFAULT_MARGIN):
        """Sample a radial profile ``func(r)`` at every node."""
        return cls.from_function(
            params, lambda x: func(radius(params, x)), num_points, margin
        )

    def like(self, values) -> "BallField":
        out = BallField(self.params, self.num_points, values, self.margin)
        out._coords = self._coords
        return out

    def same_lattice(self, other: "BallField") -> bool:
        return (
            self.params == other.params
            and self.num_points == other.num_points
            and self.margin == other.margin
        )

    def __call__(self, points) -> np.ndarray:
        return cubic_interpolate(self.values, -1.0, self.step, points)


def sphere_points(field: BallField, r: float, quadrature: BoundaryFunction | None = None):
    q = quadrature or BoundaryFunction.quadrature(field.params)
    return q, math.tanh(r / 2.0) * q.points


def _sphere_values(field: BallField, r: float, quadrature=None):
    if r < 0:
        raise DomainError("radius must be non-negative")
    q, pts = sphere_points(field, r, quadrature)
    vals = field(pts)
    if not np.all(np.isfinite(vals)):
        raise DomainError(
            f"geodesic sphere of radius {r:g} leaves the lattice "
            f"(usable radius ~{field.r_limit:.3f})"
        )
    return q, vals


def sphere_average(field: BallField, r: float, p: float = 2.0, quadrature=None) -> float:
    """p-mean of |field| over the geodesic sphere of radius r about the origin.

    ``p = inf`` returns the maximum over the quadrature nodes.
    """
    if not p >= 1:
        raise DomainError("p must be >= 1")
    q, vals = _sphere_values(field, r, quadrature)
    a = np.abs(vals)
    if math.isinf(p):
        return float(a.max())
    return float(np.sum(q.weights * a**p) ** (1.0 / p))


def k_average(field: BallField, grid: RadialGrid | None = None, quadrature=None) -> RadialFunction:
    """Signed spherical mean of ``field`` as a function of geodesic radius."""
    if grid is None:
        r_max = field.r_limit
        grid = RadialGrid(r_max, max(int(r_max / field.step) + 1, 2))
    out = np.empty(grid.num_points, dtype=complex)
    for i, r in enumerate(grid.r):
        q, vals = _sphere_values(field, r, quadrature)
        out[i] = np.sum(q.weights * vals)
    return RadialFunction(grid, out)
