"""Distribution distance, confidence intervals and verdict classification."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from typicality_lab import (
    DomainError,
    EmpiricalDistribution,
    classify_typicality,
    l1_distance,
    l1_sampling_noise,
    verdict_from_counts,
    wilson_interval,
)


def test_identical_distributions_have_zero_distance():
    masses = np.array([0.2, 0.3, 0.5])
    assert l1_distance(masses, masses) == 0.0


def test_disjoint_support_distance_is_two():
    a = np.array([1.0, 0.0, 0.0, 0.0])
    b = np.array([0.0, 0.0, 0.5, 0.5])
    assert np.isclose(l1_distance(a, b), 2.0)


def test_shifted_gaussians_match_quadrature_oracle():
    # densities N(0,1) and N(1,1) binned finely; oracle integrates the
    # absolute density difference directly. On the [0, 2] scale used here
    # that integral equals 2 erf(1 / (2 sqrt(2))).
    from scipy.special import erf

    edges = np.linspace(-10, 11, 4201)
    a = np.diff(norm.cdf(edges, loc=0.0))
    b = np.diff(norm.cdf(edges, loc=1.0))
    value = l1_distance(a, b)
    oracle, _ = quad(
        lambda x: abs(norm.pdf(x) - norm.pdf(x, loc=1.0)), -12, 13, limit=200, points=[0.5]
    )
    assert abs(value - oracle) < 1e-4
    assert abs(value - 2 * erf(1 / (2 * np.sqrt(2)))) < 1e-3


def test_l1_requires_identical_binning():
    d1 = EmpiricalDistribution.from_samples(np.array([0.5]), np.array([0.0, 1.0]))
    d2 = EmpiricalDistribution.from_samples(np.array([0.5]), np.array([0.0, 0.5, 1.0]))
    with pytest.raises(DomainError):
        l1_distance(d1, d2)


def test_l1_symmetry_and_triangle_on_random_triples():
    gen = np.random.Generator(np.random.Philox(21))
    for _ in range(50):
        a, b, c = gen.random((3, 16)) + 1e-3
        ab = l1_distance(a, b)
        assert np.isclose(ab, l1_distance(b, a), atol=1e-14)
        assert ab <= l1_distance(a, c) + l1_distance(c, b) + 1e-12


def test_empirical_distribution_invariants():
    samples = np.array([0.1, 0.2, 0.7, 0.9])
    d = EmpiricalDistribution.from_samples(samples, np.array([0.0, 0.5, 1.0]))
    assert d.counts.sum() == d.n_samples == 4
    assert np.allclose(d.probabilities(), [0.5, 0.5])
    with pytest.raises(DomainError):
        EmpiricalDistribution.from_samples(np.array([2.0]), np.array([0.0, 1.0]))
    with pytest.raises(DomainError):
        EmpiricalDistribution(np.array([0.0, 1.0, 0.5]), np.array([1, 1]), 2)


def test_wilson_interval_sanity():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    lo0, hi0 = wilson_interval(0, 100)
    assert lo0 == 0.0 and 0.0 < hi0 < 0.1
    lo1, hi1 = wilson_interval(100, 100)
    assert 0.9 < lo1 < 1.0 and hi1 == 1.0
    # wider confidence at smaller n
    _, hi_small = wilson_interval(0, 10)
    assert hi_small > hi0


def test_classification_trivial_cases():
    assert classify_typicality(0.999, 0.0005, tau=0.01).classification == "typical"
    assert classify_typicality(0.001, 0.0005, tau=0.01).classification == "atypical"
    assert classify_typicality(0.5, 0.01, tau=0.01).classification == "neither"


def test_verdict_from_counts_wraps_wilson():
    v = verdict_from_counts(0, 1000, tau=0.01)
    assert v.classification == "atypical"
    v2 = verdict_from_counts(1000, 1000, tau=0.01)
    assert v2.classification == "typical"
    v3 = verdict_from_counts(500, 1000, tau=0.01)
    assert v3.classification == "neither"


def test_l1_sampling_noise_matches_simulation():
    gen = np.random.Generator(np.random.Philox(5))
    p = np.array([0.5, 0.25, 0.125, 0.125])
    n = 2000
    mean_pred, sd_pred = l1_sampling_noise(p, n)
    draws = []
    for _ in range(400):
        counts = gen.multinomial(n, p)
        draws.append(np.abs(counts / n - p).sum())
    draws = np.asarray(draws)
    assert abs(draws.mean() - mean_pred) < 0.15 * mean_pred
    assert abs(draws.std() - sd_pred) < 0.4 * sd_pred
