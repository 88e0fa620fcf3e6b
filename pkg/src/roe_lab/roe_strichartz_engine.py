"""Doubly-infinite eigen-chains ``A f_j = c f_{j+1}``: builders, hypothesis and
conclusion checks, and verdicts.

A built sequence is stored as fixed coefficients over a few "atoms",
``f_j = sum_k C[j, k] g_k``. Operators and sphere samples are computed once
per atom and combined per index, which keeps long chains cheap while every
``f_j`` remains available as an ordinary field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .space_core import BallField, BoundaryFunction, RadialFunction, RadialGrid, SpaceParams

THEOREM_CONFIRMED = "theorem_confirmed"
HYPOTHESIS_VIOLATED = "hypothesis_violated"
COUNTEREXAMPLE_CONFIRMED = "counterexample_confirmed"
THEOREM_VIOLATED = "theorem_violated"
INCONCLUSIVE = "inconclusive"

EIGEN_SPHERICAL = "eigen_spherical"
POISSON = "poisson"
COMPLEX_SPECTRUM_PAIR = "complex_spectrum_pair"
DISTINGUISHED_COUNTEREXAMPLE = "distinguished_counterexample"
DISTINGUISHED_EIGEN = "distinguished_eigen"
KINDS = (EIGEN_SPHERICAL, POISSON, COMPLEX_SPECTRUM_PAIR, DISTINGUISHED_COUNTEREXAMPLE, DISTINGUISHED_EIGEN)

PASS_TOL = 1e-3
COUNTEREXAMPLE_TOL = 0.1
GROWTH_FACTOR = 10.0
SIZE_SLOPE_TOL = 0.5
NORM_FLOOR = 1e-12


# --- reports and verdicts ------------------------------------------------------------


@dataclass
class SequenceReport:
    kind: str
    indices: list
    coefficient: float
    predicted_eigenvalue: float
    recursion_residuals: np.ndarray = None
    recursion_relative: np.ndarray = None
    size_norms: np.ndarray = None
    uniform_bound: float = math.nan
    sup_norms: np.ndarray = None
    size_bounded: bool = True
    plain_bounded: bool = True
    conclusion_residual: float = math.nan
    conclusion_relative: float = math.nan
    best_fit_eigenvalue: complex = math.nan
    best_fit_residual: float = math.nan
    degenerate: bool = False
    verdict: str = ""
    p: float = math.inf
    M: float = 0.0
    growth_ratio: float = math.nan
    size_profile: tuple | None = None
    reproduction_error: float | None = None
    notes: list = field(default_factory=list)

    @property
    def max_recursion_relative(self) -> float:
        r = self.recursion_relative
        return float(np.max(r)) if r is not None and len(r) else 0.0

    @property
    def recursion_ok(self) -> bool:
        return self.max_recursion_relative < PASS_TOL

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "coefficient": self.coefficient,
            "max_recursion_relative": self.max_recursion_relative,
            "uniform_bound": self.uniform_bound,
            "size_bounded": self.size_bounded,
            "plain_bounded": self.plain_bounded,
            "growth_ratio": self.growth_ratio,
            "conclusion_relative": self.conclusion_relative,
            "best_fit_eigenvalue": self.best_fit_eigenvalue,
            "best_fit_residual": self.best_fit_residual,
        }


def best_fit_eigenvalue(Af: np.ndarray, f: np.ndarray):
    """kappa* minimising ||A f - kappa f||_2 and the residual relative to ||A f||_2."""
    Af = np.asarray(Af).ravel()
    f = np.asarray(f).ravel()
    keep = np.isfinite(Af) & np.isfinite(f)
    Af, f = Af[keep], f[keep]
    ff = np.vdot(f, f).real
    if ff == 0:
        return 0.0, 0.0
    kappa = complex(np.vdot(f, Af) / ff)
    nAf = np.linalg.norm(Af)
    res = float(np.linalg.norm(Af - kappa * f) / nAf) if nAf > 0 else 0.0
    return kappa, res


def assign_verdict(report: SequenceReport, pass_tol=PASS_TOL, counterexample_tol=COUNTEREXAMPLE_TOL):
    """Verdict from measured residuals.

    Hypotheses hold when the recursion passes and the theorem's size
    condition holds. Then the conclusion must hold (theorem_confirmed); a
    clear failure would contradict the theorem (theorem_violated). When the
    size condition fails but the recursion holds, the sequence is uniformly
    bounded and f_0 is clearly not an eigenfunction, the family is a
    certified counterexample to the naive sup-norm statement.
    """
    recursion_ok = report.max_recursion_relative < pass_tol
    hypotheses = recursion_ok and report.size_bounded
    if report.degenerate:
        v = INCONCLUSIVE
    elif hypotheses:
        if report.conclusion_relative < pass_tol:
            v = THEOREM_CONFIRMED
        elif report.conclusion_relative > counterexample_tol:
            v = THEOREM_VIOLATED
        else:
            v = INCONCLUSIVE
    elif recursion_ok and report.plain_bounded and report.best_fit_residual > counterexample_tol:
        v = COUNTEREXAMPLE_CONFIRMED
    elif recursion_ok and report.plain_bounded and report.best_fit_residual >= pass_tol:
        v = INCONCLUSIVE
    else:
        v = HYPOTHESIS_VIOLATED
    report.verdict = v
    return report


# --- specifications and built sequences --------------------------------------------


@dataclass
class SequenceSpec:
    """What to build.

    Attributes:
        kind: one of ``KINDS``.
        params: the space; the distinguished kinds always use H^2.
        lam: spectral parameter (real for eigen/poisson, complex for the pair).
        boundary: boundary data for ``poisson``.
        max_degree: harmonic degree bound of the boundary data.
        J: indices run over ``-J..J``.
        r_max, radial_step: radial grid for radial kinds (the operator output
            is trimmed by two cells, so the usable range ends at ``r_max``).
        lattice_points: ball lattice size for ``poisson``.
        interior_radius: Euclidean radius of the ball region used in residuals.
        hardy_radii: radii where Hardy ratios of ball fields are sampled.
        b_range, u_range, num_b, num_u: the S-lattice for distinguished kinds.
        operator: ``"relation"`` or ``"stencil"`` for the distinguished Laplacian.
        kappa: stencil normalisation when ``operator == "stencil"``.
    """

    kind: str
    params: SpaceParams = field(default_factory=lambda: SpaceParams(3))
    lam: complex | None = None
    boundary: BoundaryFunction | None = None
    max_degree: int = 4
    J: int = 10
    r_max: float = 12.0
    radial_step: float = 0.01
    lattice_points: int = 41
    interior_radius: float = 0.5
    hardy_radii: np.ndarray | None = None
    b_range: tuple = (-2.0, 2.0)
    u_range: tuple = (-1.0, 1.0)
    num_b: int = 161
    num_u: int = 81
    operator: str = "relation"
    kappa: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown sequence kind {self.kind!r}")
        if self.J < 1:
            raise DomainError("J must be >= 1")
        if self.kind in (DISTINGUISHED_COUNTEREXAMPLE, DISTINGUISHED_EIGEN):
            self.params = SpaceParams(2, "half_space")
            return
        if self.lam is None:
            raise DomainError(f"kind {self.kind} needs lambda")
        lam = complex(self.lam)
        if self.kind == COMPLEX_SPECTRUM_PAIR:
            if abs(lam.imag) >= self.params.rho:
                raise DomainError("|Im lambda| >= rho gives an unbounded family; rejected")
            if lam.imag == 0:
                raise DomainError("the complex pair needs Im lambda != 0")
            mu = -(lam**2 + self.params.rho**2)
            if abs(mu) < self.params.rho**2:
                raise DomainError("|mu| must be at least rho^2")
        elif lam.imag != 0:
            raise DomainError(f"kind {self.kind} needs real lambda")
        if self.kind == POISSON and self.boundary is None:
            raise DomainError("poisson sequences need boundary data")
        if self.kind == POISSON and self.params.n != self.boundary.params.n:
            raise DomainError("boundary data belong to another dimension")


@dataclass
class BuiltSequence:
    spec: SequenceSpec
    indices: np.ndarray
    coefficients: np.ndarray  # (len(indices), len(atoms))
    atoms: list
    samplers: list | None
    constant: float
    predicted_eigenvalue: float
    space: str  # "radial", "ball" or "solvable"
    notes: list = field(default_factory=list)
    _applied: list | None = field(default=None, repr=False)

    def combine(self, k: int, arrays) -> np.ndarray:
        return sum(self.coefficients[k, a] * arrays[a] for a in range(len(arrays)))

    def field(self, j: int):
        k = int(np.flatnonzero(self.indices == j)[0])
        vals = self.combine(k, [a.values for a in self.atoms])
        return _like(self.atoms[0], vals)

    @property
    def fields(self) -> list:
        return [self.field(int(j)) for j in self.indices]

    def applied(self) -> list:
        """The operator applied to each atom (cached)."""
        if self._applied is None:
            self._applied = [apply_operator(self, a) for a in self.atoms]
        return self._applied

    def region(self, values: np.ndarray, *others) -> np.ndarray:
        """Values restricted to the region where residuals and norms are measured.

        ``others`` share the mask: a node counts only if it is finite in every
        array passed.
        """
        arrays = [np.asarray(values)] + [np.asarray(o) for o in others]
        if self.space == "radial":
            m = self.applied()[0].grid.num_points
            return arrays[0][:m]
        mask = np.ones(arrays[0].shape, dtype=bool)
        for a in arrays:
            mask &= np.isfinite(a)
        if self.space == "ball":
            coords = self.atoms[0].coords
            mask &= np.sqrt(np.sum(coords**2, axis=-1)) <= self.spec.interior_radius
        return arrays[0][mask]


def _like(template, values):
    if isinstance(template, RadialFunction):
        return RadialFunction(template.grid, values)
    return template.like(values)


def apply_operator(seq: BuiltSequence, atom):
    from .laplacians import (
        ball_laplacian,
        distinguished_laplacian_via_relation,
        distinguished_laplacian_via_stencil,
        radial_laplacian,
    )

    if seq.space == "radial":
        return radial_laplacian(seq.spec.params, atom)
    if seq.space == "ball":
        return ball_laplacian(atom)
    if seq.spec.operator == "stencil":
        return distinguished_laplacian_via_stencil(atom, kappa=seq.spec.kappa)
    return distinguished_laplacian_via_relation(atom)


def _radial_grid(spec: SequenceSpec) -> RadialGrid:
    # two extra cells so the stencil output still reaches r_max
    n = int(round(spec.r_max / spec.radial_step)) + 3
    return RadialGrid(spec.radial_step * (n - 1), n)


def _psi_one(spec: SequenceSpec):
    from .laplacians import SolvableField, delta_half, radius_s
    from .spherical_analysis import spherical_function_table

    params = SpaceParams(2)
    # phi_{2 rho} on H^2 (2 rho = 1) tabulated finely enough for cubic interpolation
    B, Y = SolvableField(spec.b_range, spec.u_range, spec.num_b, spec.num_u,
                         np.zeros((spec.num_b, spec.num_u))).mesh
    sigma_max = float(np.max(radius_s(B, Y))) + 0.1
    grid = RadialGrid(sigma_max, int(sigma_max / 0.0025) + 2)
    phi = RadialFunction(grid, spherical_function_table(params, [2 * params.rho], grid.r)[0].real)

    def psi1(b, y):
        return delta_half(y) * phi(radius_s(b, y))

    return psi1


def build_sequence(spec: SequenceSpec) -> BuiltSequence:
    """Construct the chain for ``spec`` and verify its recursion numerically."""
    from .spherical_analysis import spherical_function_table

    J = spec.J
    idx = np.arange(-J, J + 1)
    params = spec.params
    rho = params.rho

    if spec.kind == EIGEN_SPHERICAL:
        lam = float(np.real(spec.lam))
        grid = _radial_grid(spec)
        atom = RadialFunction(grid, spherical_function_table(params, [lam], grid.r)[0].real)
        c = lam**2 + rho**2
        seq = BuiltSequence(spec, idx, ((-1.0) ** idx)[:, None].astype(complex), [atom], None,
                            c, -c, "radial")

    elif spec.kind == COMPLEX_SPECTRUM_PAIR:
        lam = complex(spec.lam)
        grid = _radial_grid(spec)
        phi = spherical_function_table(params, [lam], grid.r)[0]
        mu = -(lam**2 + rho**2)
        c = abs(mu)
        w = mu / c
        coeffs = np.column_stack([w**idx, np.conj(w) ** idx])
        atoms = [RadialFunction(grid, phi), RadialFunction(grid, np.conj(phi))]
        seq = BuiltSequence(spec, idx, coeffs, atoms, None, c, -c, "radial",
                            notes=["constructive stand-in for the bounded non-eigen family"])

    elif spec.kind == POISSON:
        from .boundary_transforms import PoissonField

        lam = float(np.real(spec.lam))
        pf = PoissonField(spec.boundary, lam, spec.max_degree)
        atom = BallField.from_function(params, pf, spec.lattice_points)
        c = lam**2 + rho**2
        seq = BuiltSequence(spec, idx, ((-1.0) ** idx)[:, None].astype(complex), [atom], [pf],
                            c, -c, "ball")

    else:
        from .laplacians import RHO_H2, SolvableField

        psi1 = _psi_one(spec)
        lat = (spec.b_range, spec.u_range, spec.num_b, spec.num_u)
        a1 = SolvableField.from_function(psi1, *lat)
        a2 = SolvableField.from_function(lambda b, y: np.ones_like(b), *lat)
        c = 4 * RHO_H2**2
        probe = BuiltSequence(spec, idx, np.ones((len(idx), 2)), [a1, a2], None, c, c, "solvable")
        e1, _ = best_fit_eigenvalue(probe.applied()[0].values, a1.values)
        e2, _ = best_fit_eigenvalue(probe.applied()[1].values, a2.values)
        # L f_j = c f_{j+1} with f_j = s1^j psi1 + s2^j psi2 requires s_i = e_i / c
        signs = []
        for e in (e1, e2):
            s = e.real / c
            if abs(abs(s) - 1.0) > 1e-2:
                raise DomainError(f"eigenvalue {e:.4g} is not +-{c}; cannot form the chain")
            signs.append(math.copysign(1.0, s))
        s1, s2 = signs
        if spec.kind == DISTINGUISHED_EIGEN:
            coeffs = np.column_stack([s1**idx, np.zeros(len(idx))]).astype(complex)
        else:
            coeffs = np.column_stack([s1**idx, s2**idx]).astype(complex)
        seq = BuiltSequence(spec, idx, coeffs, [a1, a2], None, c, c, "solvable",
                            notes=[f"chain signs derived from eigenvalues {e1.real:.6f}, {e2.real:.6f}"])
        seq._applied = probe._applied

    if spec.kind in (DISTINGUISHED_COUNTEREXAMPLE, DISTINGUISHED_EIGEN):
        rel = recursion_residuals(seq)[1]
        if np.max(rel) > PASS_TOL:
            raise DomainError(f"built chain fails its recursion (max relative {np.max(rel):.2e})")
    return seq


# --- checks ----------------------------------------------------------------------------


def recursion_residuals(seq: BuiltSequence):
    """Absolute and relative sup residuals of ``A f_j - c f_{j+1}`` for consecutive j."""
    applied = [a.values for a in seq.applied()]
    raw = [a.values for a in seq.atoms]
    if seq.space == "radial":
        m = seq.applied()[0].grid.num_points
        raw = [r[:m] for r in raw]
    c = seq.constant
    ab, rel = [], []
    for k in range(len(seq.indices) - 1):
        Af = seq.combine(k, applied)
        nxt = seq.combine(k + 1, raw)
        res = seq.region(Af - c * nxt)
        scale = c * np.max(np.abs(seq.region(nxt, Af)))
        r = float(np.max(np.abs(res))) if res.size else 0.0
        ab.append(r)
        rel.append(r / scale if scale > NORM_FLOOR else (0.0 if r <= NORM_FLOOR else math.inf))
    return np.array(ab), np.array(rel)


def _default_hardy_radii(seq: BuiltSequence) -> np.ndarray:
    if seq.spec.hardy_radii is not None:
        return np.asarray(seq.spec.hardy_radii, dtype=float)
    r_lim = min(seq.atoms[0].r_limit, 4.5)
    return np.linspace(0.0, r_lim, 19)


def _size_profiles(seq: BuiltSequence, p: float, M: float):
    """Per-j profiles of the size functional and the radii/heights they are sampled at."""
    from .spherical_analysis import spherical_function_table

    params = seq.spec.params
    if seq.space == "radial":
        m = seq.applied()[0].grid.num_points
        r = seq.atoms[0].r[:m]
        phi0 = spherical_function_table(params, [0.0], r)[0].real
        weight = (1.0 + r) ** M / phi0
        prof = [np.abs(seq.combine(k, [a.values[:m] for a in seq.atoms])) * weight
                for k in range(len(seq.indices))]
        return r, np.array(prof)
    if seq.space == "ball":
        radii = _default_hardy_radii(seq)
        q = BoundaryFunction.quadrature(params)
        phi0 = spherical_function_table(params, [0.0], radii)[0].real
        prof = np.empty((len(seq.indices), len(radii)))
        for i, r in enumerate(radii):
            pts = math.tanh(r / 2.0) * q.points
            samples = [s(pts) for s in seq.samplers]
            for k in range(len(seq.indices)):
                a = np.abs(seq.combine(k, samples))
                mean = a.max() if math.isinf(p) else np.sum(q.weights * a**p) ** (1.0 / p)
                prof[k, i] = (1.0 + r) ** M * mean / phi0[i]
        return radii, np.array(prof)
    # solvable: |f_j / delta| = y |f_j|, maximised over b for every height
    from .laplacians import delta_bar

    B, Y = seq.atoms[0].mesh
    u = np.log(Y[0])
    prof = []
    for k in range(len(seq.indices)):
        v = np.abs(seq.combine(k, [a.values for a in seq.atoms]) / delta_bar(Y))
        prof.append(np.nanmax(v, axis=0))
    return u, np.array(prof)


def check_hypotheses(
    seq: BuiltSequence, p: float = math.inf, M: float = 0.0, growth_factor: float = GROWTH_FACTOR,
    size_slope_tol: float = SIZE_SLOPE_TOL,
) -> SequenceReport:
    """Recursion residuals, per-j size norms and boundedness flags.

    On X the size norm is the weighted Hardy-type ratio; the profile (max over
    j) is flagged as unbounded when its last sample exceeds ``growth_factor``
    times its first. On S it is ``sup |f_j / delta|``; it is flagged when its
    logarithm rises faster than ``size_slope_tol`` per unit of log y over the
    upper half of the lattice.
    """
    if not p >= 1:
        raise DomainError("p must be >= 1")
    ab, rel = recursion_residuals(seq)
    xs, prof = _size_profiles(seq, p, M)
    envelope = prof.max(axis=0)
    size_norms = prof.max(axis=1)
    if seq.space == "solvable":
        half = xs >= 0.5 * (xs[0] + xs[-1])
        slope = float(np.polyfit(xs[half], np.log(np.maximum(envelope[half], 1e-300)), 1)[0])
        growth = slope
        size_ok = slope <= size_slope_tol
    else:
        if not np.any(envelope):
            growth = 0.0  # the zero sequence
        else:
            growth = float(envelope[-1] / envelope[0]) if envelope[0] > 0 else math.inf
        size_ok = growth <= growth_factor
    raw = [a.values for a in seq.atoms]
    sups = np.array([
        float(np.max(np.abs(seq.region(seq.combine(k, raw))))) for k in range(len(seq.indices))
    ])
    i0 = int(np.flatnonzero(seq.indices == 0)[0])
    plain = bool(sups.max() <= growth_factor * max(sups[i0], NORM_FLOOR))
    return SequenceReport(
        kind=seq.spec.kind,
        indices=[int(j) for j in seq.indices],
        coefficient=seq.constant,
        predicted_eigenvalue=seq.predicted_eigenvalue,
        recursion_residuals=ab,
        recursion_relative=rel,
        size_norms=size_norms,
        uniform_bound=float(size_norms.max()),
        sup_norms=sups,
        size_bounded=bool(size_ok),
        plain_bounded=plain,
        p=p,
        M=M,
        growth_ratio=growth,
        size_profile=(xs, envelope),
        notes=list(seq.notes),
    )


def check_conclusion(
    seq: BuiltSequence, report: SequenceReport | None = None, pass_tol: float = PASS_TOL,
    counterexample_tol: float = COUNTEREXAMPLE_TOL, recover_radius: float = 1.0,
) -> SequenceReport:
    """Conclusion residual against the predicted eigenvalue, best fit and verdict."""
    if report is None:
        report = check_hypotheses(seq)
    i0 = int(np.flatnonzero(seq.indices == 0)[0])
    raw = [a.values for a in seq.atoms]
    if seq.space == "radial":
        m = seq.applied()[0].grid.num_points
        raw = [r[:m] for r in raw]
    f0_full = seq.combine(i0, raw)
    Af0_full = seq.combine(i0, [a.values for a in seq.applied()])
    f0 = seq.region(f0_full, Af0_full)
    Af0 = seq.region(Af0_full, f0_full)
    e = seq.predicted_eigenvalue
    f0_sup = float(np.max(np.abs(f0))) if f0.size else 0.0
    report.degenerate = f0_sup < NORM_FLOOR
    res = float(np.max(np.abs(Af0 - e * f0))) if f0.size else 0.0
    report.conclusion_residual = res
    report.conclusion_relative = res / (abs(e) * f0_sup) if f0_sup > NORM_FLOOR else 0.0
    report.best_fit_eigenvalue, report.best_fit_residual = best_fit_eigenvalue(Af0, f0)

    if seq.spec.kind == POISSON and complex(seq.spec.lam) == 0:
        report.reproduction_error = _poisson_reproduction(seq, i0, recover_radius)
    return assign_verdict(report, pass_tol, counterexample_tol)


def _poisson_reproduction(seq: BuiltSequence, i0: int, r: float) -> float:
    """Recover boundary data from f_0 and compare f_0 with a fresh Poisson transform."""
    from .boundary_transforms import poisson_transform, recover_boundary_data

    f0 = seq.field(0)
    F = recover_boundary_data(seq.spec.params, f0, 0.0, r, seq.spec.max_degree, size=(32, 64))
    fresh = poisson_transform(F, 0.0, f0)
    a = seq.region(f0.values)
    b = seq.region(fresh.values)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(a)))


def run_sequence(spec: SequenceSpec, p: float = math.inf, M: float = 0.0, **kw) -> SequenceReport:
    seq = build_sequence(spec)
    return check_conclusion(seq, check_hypotheses(seq, p, M), **kw)
