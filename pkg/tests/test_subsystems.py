"""Conditional and effective subsystem states plus their statistics."""

import numpy as np
import pytest
from scipy.stats import binom

from typicality_lab import DegenerateSliceError, Grid, RngStream
from typicality_lab.bohmian import (
    WaveFunction,
    binomial_deviation_bounds,
    binomial_deviation_tail,
    bohmian_velocity,
    born_lln_experiment,
    conditional_born_statistics,
    conditional_wavefunction,
    correlated_gaussian_state,
    detect_effective_wavefunction,
    environment_marginal,
    free_gaussian,
    interval_mass_1d,
    product_state,
    two_branch_state,
)
from typicality_lab.bohmian.subsystems import SplitConfiguration
from typicality_lab.grids import ComplexField

GRID2 = Grid(2, 256, 16.0)
C = 8.0


def overlap(a, b, dx):
    return abs(np.sum(np.conj(a) * b) * dx)


def test_product_state_slices_are_y_independent():
    ps = product_state(GRID2, phi_sigma=0.9, chi_sigma=0.7)
    slices = [conditional_wavefunction(ps, y).normalized() for y in (7.0, 8.0, 9.1)]
    for s in slices[1:]:
        assert overlap(slices[0], s, GRID2.dx) > 1.0 - 1e-10


def test_two_branch_slice_recovers_the_local_branch():
    tb = two_branch_state(GRID2, separation=6.0)
    cw = conditional_wavefunction(tb, C - 3.0)
    x = GRID2.axis()
    phi1 = np.exp(-((x - C + 1.0) ** 2) / (4 * 0.5**2))
    phi1 = phi1 / np.sqrt(np.sum(np.abs(phi1) ** 2) * GRID2.dx)
    assert overlap(cw.normalized(), phi1, GRID2.dx) > 1.0 - 1e-9


def test_off_grid_slice_converges_with_resolution():
    # the interpolated slice approaches the fine-grid slice as dy shrinks
    y_off = C + 0.37 * GRID2.length / 256

    def profile(n, take):
        wf = correlated_gaussian_state(Grid(2, n, 16.0), s=0.7, big_s=2.0)
        return conditional_wavefunction(wf, y_off).normalized()[::take]

    p_fine = profile(1024, 4)
    err_coarse = np.abs(profile(256, 1) - p_fine).max()
    err_double = np.abs(profile(512, 2) - p_fine).max()
    assert err_coarse / err_double > 3.0  # second-order interpolation


def test_degenerate_slice_raises():
    ps = product_state(GRID2, phi_sigma=0.5, chi_sigma=0.5)
    with pytest.raises(DegenerateSliceError):
        conditional_wavefunction(ps, 0.5)  # far outside the environment support


def test_marginal_consistency_identity():
    wf = correlated_gaussian_state(GRID2, s=0.6, big_s=1.8)
    dens = wf.density()
    marg_x = dens.sum(axis=1) * GRID2.dx
    recon = sum(np.abs(wf.values[:, j]) ** 2 * GRID2.dx for j in range(GRID2.points))
    assert np.abs(recon - marg_x).max() < 1e-10


def test_detect_product_state_score_one():
    ps = product_state(GRID2, phi_sigma=0.9, chi_sigma=0.7)
    d = detect_effective_wavefunction(ps, C)
    assert d.detected and not d.undecidable
    assert d.score > 1.0 - 1e-12
    assert d.residual_at_y < 1e-12
    assert d.coupling_magnitude == 0.0


def test_detect_two_branch_state():
    tb = two_branch_state(GRID2, separation=6.0)
    d = detect_effective_wavefunction(tb, C - 3.0)
    assert d.detected and d.score > 0.999
    x = GRID2.axis()
    phi1 = np.exp(-((x - C + 1.0) ** 2) / (4 * 0.5**2))
    phi1 = phi1 / np.sqrt(np.sum(np.abs(phi1) ** 2) * GRID2.dx)
    assert overlap(d.phi, phi1, GRID2.dx) > 0.999


def test_detect_correlated_score_falls_with_correlation():
    scores = []
    for ratio in (0.5, 0.25, 0.125):
        wf = correlated_gaussian_state(GRID2, s=ratio * 2.0, big_s=2.0)
        d = detect_effective_wavefunction(wf, C)
        scores.append(d.score)
        assert not d.detected
    assert scores[0] > scores[1] > scores[2]


def test_detection_monotone_in_tolerance():
    wf = correlated_gaussian_state(GRID2, s=1.9, big_s=2.0)  # nearly uncorrelated
    d_tight = detect_effective_wavefunction(wf, C, tol_eff=1e-6)
    d_loose = detect_effective_wavefunction(wf, C, tol_eff=0.1)
    if d_tight.detected:
        assert d_loose.detected
    assert d_loose.detected  # score is high for weak correlation


def test_detect_undecidable_when_neighbourhood_is_empty():
    # environment profile confined to a single grid line: the slice there is
    # fine, but every neighbour is degenerate, so no comparison is possible
    g = Grid(2, 256, 16.0)
    x = g.axis()
    fx = np.exp(-((x - C) ** 2) / (4 * 1.0**2))
    fy = np.zeros(g.points)
    fy[128] = 1.0
    values = np.outer(fx, fy)
    values /= np.sqrt(np.sum(np.abs(values) ** 2) * g.cell_volume)
    wf = WaveFunction(field=ComplexField(g, values), potential=np.zeros(g.shape), masses=(1.0, 1.0))
    d = detect_effective_wavefunction(wf, 128 * g.dx, radius=3)
    assert d.undecidable and not d.detected
    # and slicing where there is no mass at all is a degenerate-slice error
    with pytest.raises(DegenerateSliceError):
        detect_effective_wavefunction(wf, 128 * g.dx + 5 * g.dx, radius=3)


def test_guiding_consistency_product_state():
    ps = product_state(GRID2, phi_sigma=0.9, chi_sigma=0.8, phi_momentum=1.3)
    vf2 = bohmian_velocity(ps)
    j = 128
    cw = conditional_wavefunction(ps, j * GRID2.dx)
    g1 = Grid(1, GRID2.points, GRID2.length)
    wf1 = WaveFunction(
        field=ComplexField(g1, cw.normalized()), potential=np.zeros(g1.shape), masses=(1.0,)
    )
    vf1 = bohmian_velocity(wf1)
    ok = ~vf2.mask[:, j] & ~vf1.mask
    assert np.abs(vf2.components[0][:, j][ok] - vf1.components[0][ok]).max() < 1e-8


def test_split_configuration():
    q = SplitConfiguration(x=1.0, y=2.0)
    assert q.as_pair() == (1.0, 2.0)


def test_environment_marginal_normalized():
    wf = correlated_gaussian_state(GRID2, s=0.5, big_s=2.0)
    marg = environment_marginal(wf)
    assert np.isclose(marg.sum() * GRID2.dx, 1.0, atol=1e-9)


def test_conditional_born_product_state_all_bins_at_noise():
    ps = product_state(GRID2, phi_sigma=1.0, chi_sigma=1.0)
    report = conditional_born_statistics(ps, 50_000, RngStream(3), min_count=1500)
    assert report.metric("max_bin_l1").passed
    assert report.metric("bins_within_noise").passed


def test_conditional_born_two_branch_bins_match_their_branch():
    tb = two_branch_state(GRID2, separation=6.0, widths=0.5)
    report = conditional_born_statistics(tb, 60_000, RngStream(4), y_bins=8, min_count=1500)
    assert report.metric("max_bin_l1").passed
    assert report.metric("bins_within_noise").passed


def test_interval_mass_matches_brute_force():
    g = Grid(1, 256, 20.0)
    x = g.axis()
    rho = np.exp(-((x - 10.0) ** 2) / 2)
    p = interval_mass_1d(g, rho, 3.0, 10.0)
    # brute force: fine subdivision of every cell's wrapped extent
    fine = 0.0
    dx = g.dx
    weights = rho / rho.sum()
    for j in range(g.points):
        for frac in np.linspace(-0.5 + 1e-4, 0.5 - 1e-4, 200):
            pos = np.mod(j * dx + frac * dx, g.length)
            if 3.0 <= pos <= 10.0:
                fine += weights[j] / 200
    assert abs(p - fine) < 1e-3
    # symmetric half-line around the center carries half the mass
    assert abs(interval_mass_1d(g, rho, 0.0, 10.0) - 0.5) < 1e-12


def test_binomial_bounds_and_tail_consistency():
    m, p, eps = 100, 0.5, 0.02
    lo, hi = binomial_deviation_bounds(m, p, eps)
    assert (lo, hi) == (48, 52)
    tail = binomial_deviation_tail(m, p, eps)
    oracle = 1.0 - (binom.cdf(hi, m, p) - binom.cdf(lo - 1, m, p))
    assert np.isclose(tail, oracle, atol=1e-14)


def test_born_lln_single_subsystem_exact_binomial():
    g = Grid(1, 1024, 40.0)
    phi = free_gaussian(g, 1.0)
    report = born_lln_experiment(
        phi, ladder=[1], region=(0.0, 20.0), epsilon=0.3, n_seeds=400, rng=RngStream(5)
    )
    row = report.table("ladder").rows[0]
    # frequency is 0 or 1, both deviate by 0.5 > 0.3, so the tail is 1
    assert row[6] == 1.0
    assert row[3] == 1.0
    assert report.metric("oracle_within_ci").passed


def test_born_lln_full_domain_never_deviates():
    g = Grid(1, 1024, 40.0)
    phi = free_gaussian(g, 1.0)
    report = born_lln_experiment(
        phi, ladder=[10, 50], region=(0.0, 40.0), epsilon=0.01, n_seeds=50, rng=RngStream(6)
    )
    for row in report.table("ladder").rows:
        assert row[2] == 0  # no deviations: frequency is exactly 1, target 1
        assert row[6] < 1e-12  # tail vanishes up to float round-off in the mass


def test_born_lln_unbiased_frequency():
    g = Grid(1, 1024, 40.0)
    phi = free_gaussian(g, 1.0)
    report = born_lln_experiment(
        phi, ladder=[100, 1000], region=(0.0, 20.0), epsilon=0.02, n_seeds=60, rng=RngStream(7)
    )
    p = report.config["target_mass"]
    assert abs(p - 0.5) < 1e-12
    for m, row in zip([100, 1000], report.table("ladder").rows):
        se = np.sqrt(p * (1 - p) / (60 * m))
        assert abs(row[8] - p) < 4 * se
