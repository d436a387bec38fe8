"""Histograms, distribution distance, confidence intervals, typicality verdicts.

Measure estimates throughout the package are fractions of Monte Carlo
draws, reported with Wilson 99% confidence intervals. A property counts
as typical when even the pessimistic end of the interval leaves less than
a threshold ``tau`` of measure on the complement, atypical when the whole
interval sits below ``tau``, and neither otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

# Two-sided 99% standard normal quantile.
Z99 = 2.5758293035489004

TYPICAL = "typical"
ATYPICAL = "atypical"
NEITHER = "neither"


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Binned sample counts with fixed edges.

    Invariants: edges strictly increasing, counts sum to the number of
    samples (construction fails if any sample falls outside the edges).
    """

    edges: np.ndarray
    counts: np.ndarray
    n_samples: int

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise DomainError("bin edges must be 1D and strictly increasing")
        if counts.shape != (edges.size - 1,):
            raise DomainError("counts must have one entry per bin")
        if np.any(counts < 0) or counts.sum() != self.n_samples:
            raise DomainError("counts must be non-negative and sum to the sample count")

    @classmethod
    def from_samples(cls, samples: np.ndarray, edges: np.ndarray) -> "EmpiricalDistribution":
        samples = np.asarray(samples, dtype=float).ravel()
        edges = np.asarray(edges, dtype=float)
        if samples.size and (samples.min() < edges[0] or samples.max() > edges[-1]):
            raise DomainError("samples fall outside the binning range")
        counts, _ = np.histogram(samples, bins=edges)
        return cls(edges=edges, counts=counts, n_samples=samples.size)

    def probabilities(self) -> np.ndarray:
        if self.n_samples == 0:
            raise DomainError("empty distribution has no probabilities")
        return self.counts / self.n_samples


def _bin_masses(dist) -> np.ndarray:
    if isinstance(dist, EmpiricalDistribution):
        return dist.probabilities()
    masses = np.asarray(dist, dtype=float).ravel()
    if np.any(masses < 0) or not np.all(np.isfinite(masses)):
        raise DomainError("bin masses must be finite and non-negative")
    total = masses.sum()
    if total <= 0:
        raise DomainError("bin masses must have positive total")
    return masses / total


def l1_distance(a, b) -> float:
    """Total L1 distance between two binned distributions, in [0, 2].

    Accepts :class:`EmpiricalDistribution` instances or arrays of bin
    masses; masses are normalized before comparison. Both arguments must
    use identical binning.
    """
    if isinstance(a, EmpiricalDistribution) and isinstance(b, EmpiricalDistribution):
        if not np.array_equal(a.edges, b.edges):
            raise DomainError("distributions use different bin edges")
    pa, pb = _bin_masses(a), _bin_masses(b)
    if pa.shape != pb.shape:
        raise DomainError(f"bin count mismatch: {pa.shape} vs {pb.shape}")
    return float(np.sum(np.abs(pa - pb)))


def l1_sampling_noise(masses, n: int) -> tuple[float, float]:
    """Expected value and standard deviation of the L1 distance between
    an ``n``-sample empirical histogram and its own target masses.

    Gaussian approximation per bin; used to set noise floors when an
    empirical distribution is compared against the exact density it was
    drawn from.
    """
    p = _bin_masses(masses)
    if n <= 0:
        raise DomainError("sample count must be positive")
    sigma = np.sqrt(p * (1.0 - p) / n)
    mean = float(np.sqrt(2.0 / np.pi) * sigma.sum())
    sd = float(np.sqrt((1.0 - 2.0 / np.pi) * np.sum(sigma**2)))
    return mean, sd


def wilson_interval(successes: int, trials: int, z: float = Z99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise DomainError("trials must be positive")
    if not 0 <= successes <= trials:
        raise DomainError("successes must lie in [0, trials]")
    p = successes / trials
    denom = 1.0 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class TypicalityVerdict:
    """An estimated measure with its uncertainty and classification."""

    measure: float
    halfwidth: float
    classification: str

    def __post_init__(self):
        if not 0.0 <= self.measure <= 1.0:
            raise DomainError(f"measure must lie in [0, 1], got {self.measure}")
        if self.halfwidth < 0.0:
            raise DomainError("halfwidth must be non-negative")
        if self.classification not in (TYPICAL, ATYPICAL, NEITHER):
            raise ConfigurationError(f"unknown classification {self.classification!r}")


def classify_typicality(measure: float, halfwidth: float, tau: float = 0.01) -> TypicalityVerdict:
    """Classify an estimated measure as typical, atypical or neither.

    Typical means the whole confidence interval sits above ``1 - tau``,
    atypical means it sits below ``tau``. Most properties land in
    neither, which simply says the measure is not extreme at this
    resolution.
    """
    if not 0.0 <= measure <= 1.0:
        raise DomainError(f"measure must lie in [0, 1], got {measure}")
    if not 0.0 < tau < 0.5:
        raise ConfigurationError(f"tau must lie in (0, 0.5), got {tau}")
    if measure - halfwidth > 1.0 - tau:
        label = TYPICAL
    elif measure + halfwidth < tau:
        label = ATYPICAL
    else:
        label = NEITHER
    return TypicalityVerdict(measure=measure, halfwidth=halfwidth, classification=label)


def verdict_from_counts(successes: int, trials: int, tau: float = 0.01) -> TypicalityVerdict:
    """Wilson-interval verdict for a measure estimated by counting."""
    lo, hi = wilson_interval(successes, trials)
    p = successes / trials
    halfwidth = max(p - lo, hi - p)
    return classify_typicality(p, halfwidth, tau)
