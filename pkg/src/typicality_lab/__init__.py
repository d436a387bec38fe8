"""Desk-scale numerical experiments on typicality in deterministic theories.

The package has three layers. Core numerics (grids, transforms, sampling,
statistics) are shared by everything. Classical modules cover Hamiltonian
dynamics, constant-energy sampling and the velocity-distribution, coin and
projectile experiments. Bohmian modules cover split-step propagation of
gridded wave functions, guided trajectories, subsystem wave functions and
the position-statistics experiments built on them. A harness wraps every
experiment in a reproducible, configurable command-line run.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DegenerateSliceError,
    DomainError,
    IntegrationError,
    ResolutionError,
    SingularityError,
    TypicalityLabError,
)
from .grids import ComplexField, Grid, dft_forward, dft_inverse
from .rng import RngStream
from .sampling import discrete_moments, sample_from_density
from .stats import (
    EmpiricalDistribution,
    TypicalityVerdict,
    classify_typicality,
    l1_distance,
    l1_sampling_noise,
    verdict_from_counts,
    wilson_interval,
)

__all__ = [
    "ComplexField",
    "ConfigurationError",
    "DegenerateSliceError",
    "DomainError",
    "EmpiricalDistribution",
    "Grid",
    "IntegrationError",
    "ResolutionError",
    "RngStream",
    "SingularityError",
    "TypicalityLabError",
    "TypicalityVerdict",
    "classify_typicality",
    "dft_forward",
    "dft_inverse",
    "discrete_moments",
    "l1_distance",
    "l1_sampling_noise",
    "sample_from_density",
    "verdict_from_counts",
    "wilson_interval",
    "__version__",
]
