"""Periodic spectral baseline on R^d (d = 1, 2): the Laplacian, sequence checks
and localisation of the Fourier support onto the sphere |xi| = alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridMismatchError
from .roe_strichartz_engine import SequenceReport, assign_verdict, best_fit_eigenvalue


@dataclass
class EuclideanField:
    """Samples on the periodic box ``[-L/2, L/2)^d`` with N points per axis."""

    d: int
    box: float
    num_points: int
    values: np.ndarray

    def __post_init__(self):
        if self.d not in (1, 2):
            raise DomainError("dimension must be 1 or 2")
        n = self.num_points
        if n < 2 or n & (n - 1):
            raise DomainError("samples per axis must be a power of two")
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (n,) * self.d:
            raise GridMismatchError("values do not match the grid shape")

    @property
    def axis(self) -> np.ndarray:
        return -self.box / 2 + self.box * np.arange(self.num_points) / self.num_points

    @property
    def coords(self):
        return np.meshgrid(*([self.axis] * self.d), indexing="ij")

    @property
    def frequencies(self) -> np.ndarray:
        """|xi| on the FFT grid (angular frequencies)."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.num_points, self.box / self.num_points)
        ks = np.meshgrid(*([k] * self.d), indexing="ij")
        return np.sqrt(sum(kk**2 for kk in ks))

    @classmethod
    def from_function(cls, d, box, num_points, func) -> "EuclideanField":
        empty = cls(d, box, num_points, np.zeros((num_points,) * d))
        return empty.like(func(*empty.coords))

    def like(self, values) -> "EuclideanField":
        return EuclideanField(self.d, self.box, self.num_points, values)

    def same_grid(self, other: "EuclideanField") -> bool:
        return (self.d, self.box, self.num_points) == (other.d, other.box, other.num_points)

    def spectrum(self) -> np.ndarray:
        """Normalised DFT coefficients (Fourier-series amplitudes)."""
        return np.fft.fftn(self.values) / self.values.size


def euclid_laplacian(f: EuclideanField) -> EuclideanField:
    """Spectral Laplacian: multiplier -|xi|^2."""
    xi = f.frequencies
    return f.like(np.fft.ifftn(-(xi**2) * np.fft.fftn(f.values)))


def _sup(a) -> float:
    return float(np.max(np.abs(a)))


def _check_grids(seq) -> None:
    first = seq[0]
    for f in seq[1:]:
        if not first.same_grid(f):
            raise GridMismatchError("sequence fields live on different grids")


def euclid_sequence_check(
    seq, alpha: float, rho_sq: float = 0.0, indices=None, pass_tol: float = 1e-3,
    counterexample_tol: float = 0.1, growth_factor: float = 10.0,
) -> SequenceReport:
    """Hypothesis and conclusion check for ``(L - rho^2) f_j = (alpha^2 + rho^2) f_{j+1}``.

    Args:
        seq: fields f_j for consecutive indices.
        indices: the j labels (default centred, ``-J..J``).
    """
    seq = list(seq)
    if len(seq) < 2:
        raise DomainError("need at least two fields")
    _check_grids(seq)
    c = alpha**2 + rho_sq
    if not c > 0:
        raise DomainError("alpha^2 + rho^2 must be positive")
    J = (len(seq) - 1) // 2
    indices = list(range(-J, -J + len(seq))) if indices is None else list(indices)
    if 0 not in indices:
        raise DomainError("index 0 must be present")

    A = [euclid_laplacian(f).values - rho_sq * f.values for f in seq]
    rec_abs, rec_rel = [], []
    for k in range(len(seq) - 1):
        res = _sup(A[k] - c * seq[k + 1].values)
        rec_abs.append(res)
        scale = c * _sup(seq[k + 1].values)
        rec_rel.append(res / scale if scale > 0 else (0.0 if res == 0 else math.inf))
    sups = np.array([_sup(f.values) for f in seq])

    i0 = indices.index(0)
    f0 = seq[i0].values
    Af0 = A[i0]
    conc_abs = _sup(Af0 + c * f0)
    f0_sup = _sup(f0)
    kappa, kres = best_fit_eigenvalue(Af0, f0)
    bounded = bool(sups.max() <= growth_factor * max(f0_sup, 1e-300))
    report = SequenceReport(
        kind="euclidean",
        indices=indices,
        coefficient=c,
        predicted_eigenvalue=-c,
        recursion_residuals=np.array(rec_abs),
        recursion_relative=np.array(rec_rel),
        size_norms=sups,
        uniform_bound=float(sups.max()),
        sup_norms=sups,
        size_bounded=bounded,
        plain_bounded=bounded,
        conclusion_residual=conc_abs,
        conclusion_relative=conc_abs / (c * f0_sup) if f0_sup > 0 else 0.0,
        best_fit_eigenvalue=kappa,
        best_fit_residual=kres,
        degenerate=f0_sup == 0,
    )
    return assign_verdict(report, pass_tol, counterexample_tol)


@dataclass
class AnnulusReport:
    alpha: float
    epsilon: float
    rho_sq: float
    indices: np.ndarray
    outer_mass: np.ndarray
    inner_mass: np.ndarray
    fitted_rate: float
    predicted_rate: float

    @property
    def rate_relative_error(self) -> float:
        return abs(self.fitted_rate - self.predicted_rate) / self.predicted_rate


def predicted_rate(alpha: float, epsilon: float, rho_sq: float = 0.0) -> float:
    """Decay factor ``(alpha^2 + rho^2) / ((alpha + eps)^2 + rho^2)`` per index step."""
    return (alpha**2 + rho_sq) / ((alpha + epsilon) ** 2 + rho_sq)


def _fit_rate(js, masses) -> float:
    js = np.asarray(js, dtype=float)
    m = np.asarray(masses, dtype=float)
    keep = m > 0
    if keep.sum() < 2:
        return 0.0
    slope = np.polyfit(js[keep], np.log(m[keep]), 1)[0]
    return float(math.exp(slope))


def annulus_localization(
    seq, alpha: float, epsilon: float, rho_sq: float = 0.0, indices=None, j_min: int = 4
) -> AnnulusReport:
    """Spectral mass of ``m(xi)^j f_j^`` off the annulus ``alpha - eps < |xi| < alpha + eps``.

    ``m = (alpha^2 + rho^2) / (|xi|^2 + rho^2)``. For j >= 0 the mass is taken
    on ``|xi| >= alpha + eps`` and for j <= 0 on ``|xi| <= alpha - eps``
    (the ell^2 norm of the Fourier-series amplitudes). The fitted rate uses
    the outer masses for ``j >= j_min``.
    """
    seq = list(seq)
    _check_grids(seq)
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    J = (len(seq) - 1) // 2
    indices = np.arange(-J, -J + len(seq)) if indices is None else np.asarray(indices)
    xi = seq[0].frequencies
    with np.errstate(divide="ignore"):
        mult = (alpha**2 + rho_sq) / (xi**2 + rho_sq)
    outer = xi >= alpha + epsilon - 1e-12
    inner = xi <= alpha - epsilon + 1e-12
    out_m = np.zeros(len(seq))
    in_m = np.zeros(len(seq))
    for k, (j, f) in enumerate(zip(indices, seq)):
        spec = f.spectrum()
        if j >= 0:
            out_m[k] = math.sqrt(np.sum(np.abs(mult[outer] ** j * spec[outer]) ** 2))
        if j <= 0 and inner.any():
            # the multiplier can be infinite at xi = 0 when rho = 0; m^j with j <= 0 is then 0
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                w = np.where(np.isfinite(mult[inner]), mult[inner] ** float(j), 0.0)
            in_m[k] = math.sqrt(np.sum(np.abs(w * spec[inner]) ** 2))
    sel = indices >= j_min
    return AnnulusReport(
        alpha=alpha,
        epsilon=epsilon,
        rho_sq=rho_sq,
        indices=indices,
        outer_mass=out_m,
        inner_mass=in_m,
        fitted_rate=_fit_rate(indices[sel], out_m[sel]),
        predicted_rate=predicted_rate(alpha, epsilon, rho_sq),
    )


def two_frequency_sequence(alpha, beta, theta, J, box, num_points, d=1):
    """``f_j = e^{i theta j} cos(alpha x) + e^{-i theta j} cos(beta x)``, j = -J..J.

    A bounded sequence that is not an eigen-chain: the cos(beta x) component
    sits off the sphere |xi| = alpha.
    """
    def make(j):
        return EuclideanField.from_function(
            d, box, num_points,
            lambda x, *rest: np.exp(1j * theta * j) * np.cos(alpha * x)
            + np.exp(-1j * theta * j) * np.cos(beta * x),
        )

    return [make(j) for j in range(-J, J + 1)]
