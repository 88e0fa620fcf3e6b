"""Numerical checks of eigenfunction characterisations by two-sided Laplacian sequences on H^n and R^d.

Modules:
    space_core: spaces, radial grids, ball lattices, boundary quadrature.
    euclidean_baseline: periodic spectral checks on R^d.
    spherical_analysis: spherical functions and the spherical Fourier transform.
    boundary_transforms: Poisson transforms, Hardy-type norms, the Abel transform.
    laplacians: Laplace-Beltrami stencils and the distinguished Laplacian on S = NA.
    roe_strichartz_engine: eigen-chains, hypothesis/conclusion checks, verdicts.
    cli: the ``roe-lab`` command line.
"""

from .config import RunConfig, load_config
from .errors import CalibrationError, DomainError, GridMismatchError, InsufficientDecayError
from .roe_strichartz_engine import (
    SequenceReport,
    SequenceSpec,
    build_sequence,
    check_conclusion,
    check_hypotheses,
    run_sequence,
)
from .space_core import BallField, BoundaryFunction, RadialFunction, RadialGrid, SpaceParams
from .spherical_analysis import (
    SpectralFunction,
    SpectralGrid,
    heat_kernel,
    inverse_spherical_transform,
    spherical_function,
    spherical_transform,
)

__version__ = "0.1.0"

__all__ = [
    "BallField",
    "BoundaryFunction",
    "CalibrationError",
    "DomainError",
    "GridMismatchError",
    "InsufficientDecayError",
    "RadialFunction",
    "RadialGrid",
    "RunConfig",
    "SequenceReport",
    "SequenceSpec",
    "SpaceParams",
    "SpectralFunction",
    "SpectralGrid",
    "build_sequence",
    "check_conclusion",
    "check_hypotheses",
    "heat_kernel",
    "inverse_spherical_transform",
    "load_config",
    "run_sequence",
    "spherical_function",
    "spherical_transform",
]
