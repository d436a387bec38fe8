"""Velocity-window statistics, the deterministic coin and the stone throw."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf

from typicality_lab import ConfigurationError, RngStream
from typicality_lab.classical import (
    CoinMachineSpec,
    Microstate,
    StoneThrowSpec,
    ThermalSpec,
    VelocityWindow,
    coin_lln_experiment,
    coin_outcome,
    empirical_velocity_fraction,
    maxwell_lln_experiment,
    maxwell_target_fraction,
    sample_microcanonical_ideal_gas,
    stone_throw_robustness,
)

BOX3 = np.array([[0.0, 1.0]] * 3)
THERMAL = ThermalSpec(kT=1.0, mass=1.0)


def gaussian_quadrature_fraction(window, thermal):
    """Independent quadrature of the limiting velocity density."""
    sigma2 = thermal.kT / thermal.mass
    dens = lambda v: np.exp(-(v**2) / (2 * sigma2)) / np.sqrt(2 * np.pi * sigma2)
    lo = -40.0 if window.lo == -np.inf else window.lo
    hi = 40.0 if window.hi == np.inf else window.hi
    val, _ = quad(dens, lo, hi, limit=200)
    return val


def test_full_line_fraction_is_one():
    w = VelocityWindow(-np.inf, np.inf)
    assert np.isclose(maxwell_target_fraction(w, THERMAL), 1.0)


def test_half_line_fraction_is_half():
    assert np.isclose(maxwell_target_fraction(VelocityWindow(0.0, np.inf), THERMAL), 0.5)


def test_symmetric_window_matches_erf_and_quadrature():
    a = np.sqrt(2 * THERMAL.kT / THERMAL.mass)
    w = VelocityWindow(-a, a)
    value = maxwell_target_fraction(w, THERMAL)
    assert abs(value - erf(1.0)) < 1e-12
    assert abs(value - gaussian_quadrature_fraction(w, THERMAL)) < 1e-10


def test_fraction_monotone_and_additive():
    w_small = VelocityWindow(-0.5, 0.5)
    w_big = VelocityWindow(-1.5, 1.5)
    assert maxwell_target_fraction(w_small, THERMAL) < maxwell_target_fraction(w_big, THERMAL)
    left = maxwell_target_fraction(VelocityWindow(-1.5, 0.0), THERMAL)
    right = maxwell_target_fraction(VelocityWindow(0.0, 1.5), THERMAL)
    assert np.isclose(left + right, maxwell_target_fraction(w_big, THERMAL))


def test_window_around_constructor():
    w = VelocityWindow.around(2.0, 0.5)
    assert (w.lo, w.hi) == (1.5, 2.5)
    with pytest.raises(ConfigurationError):
        VelocityWindow.around(0.0, -1.0)
    with pytest.raises(ConfigurationError):
        VelocityWindow(1.0, 1.0)


def test_empirical_fraction_trivial_cases():
    rest = Microstate(np.zeros((5, 3)), np.zeros((5, 3)))
    assert empirical_velocity_fraction(rest, VelocityWindow(1.0, 2.0), 1.0) == 0.0
    assert empirical_velocity_fraction(rest, VelocityWindow(-1.0, 1.0), 1.0) == 1.0


def test_empirical_fraction_relabeling_invariant():
    gas = sample_microcanonical_ideal_gas(500, BOX3, 1.0, 750.0, RngStream(1))
    w = VelocityWindow(-1.0, 1.0)
    f1 = empirical_velocity_fraction(gas, w, 1.0)
    perm = np.random.Generator(np.random.Philox(2)).permutation(500)
    f2 = empirical_velocity_fraction(Microstate(gas.positions[perm], gas.momenta[perm]), w, 1.0)
    assert f1 == f2


def test_window_concentration_across_seeds():
    # at N = 1e4 the empirical fraction should sit within 0.02 of the target
    # in at least 19 of 20 seeds
    w = VelocityWindow(-1.0, 1.0)
    target = maxwell_target_fraction(w, THERMAL)
    hits = 0
    for seed in range(20):
        gas = sample_microcanonical_ideal_gas(10_000, BOX3, 1.0, 15_000.0, RngStream(seed))
        if abs(empirical_velocity_fraction(gas, w, 1.0) - target) <= 0.02:
            hits += 1
    assert hits >= 19


def test_maxwell_experiment_report_structure():
    report = maxwell_lln_experiment(
        ladder=[100, 1000],
        window=VelocityWindow(-1.0, 1.0),
        thermal=THERMAL,
        epsilon=0.05,
        n_seeds=10,
        rng=RngStream(0),
    )
    assert report.experiment == "maxwell-lln"
    table = report.table("ladder")
    assert [r[0] for r in table.rows] == [100, 1000]
    measures = [r[3] for r in table.rows]
    assert all(0.0 <= m <= 1.0 for m in measures)
    assert report.metric("ladder_monotone_decrease").passed


def test_maxwell_gross_deviation_is_atypical():
    report = maxwell_lln_experiment(
        ladder=[100, 200],
        window=VelocityWindow(-1.0, 1.0),
        thermal=THERMAL,
        epsilon=0.5,
        n_seeds=20,
        rng=RngStream(1),
    )
    assert all(r[2] == 0 for r in report.table("ladder").rows)


def test_coin_outcome_trivial_cases():
    spec = CoinMachineSpec()
    assert coin_outcome(spec, 5.0, 0.0) is True  # no rotation, starts heads
    # exactly one half turn: omega * 2u/g = pi
    u = 5.0
    omega = np.pi * spec.gravity / (2 * u)
    assert coin_outcome(spec, u, omega) is False


def test_coin_outcome_matches_formula_oracle():
    spec = CoinMachineSpec(gravity=9.8, theta0=0.0)
    u, omega = 5.0, 20 * np.pi
    expected = bool(np.cos(2 * u * omega / 9.8) >= 0)
    assert coin_outcome(spec, u, omega) == expected
    gen = np.random.Generator(np.random.Philox(3))
    us = gen.uniform(4, 6, 200)
    ws = gen.uniform(50, 120, 200)
    outcomes = coin_outcome(spec, us, ws)
    oracle = np.cos(2 * us * ws / 9.8) >= 0
    assert np.array_equal(outcomes, oracle)


def test_coin_outcome_is_pure():
    spec = CoinMachineSpec()
    assert coin_outcome(spec, 4.7, 63.0) == coin_outcome(spec, 4.7, 63.0)


def test_coin_spec_validation():
    with pytest.raises(ConfigurationError):
        CoinMachineSpec(launch_speed=(0.0, 1.0))
    with pytest.raises(ConfigurationError):
        CoinMachineSpec(spin=(5.0, 5.0))


def test_coin_frequency_scaling_with_sample_size():
    # |freq - 1/2| should shrink like N^(-1/2); check three ladder points
    spec = CoinMachineSpec()
    report = coin_lln_experiment(spec, [1000, 10_000, 100_000], 0.4, 8, RngStream(2))
    freqs = [abs(r[6] - 0.5) for r in report.table("ladder").rows]
    # allow generous slack over the pure-noise prediction
    for n, dev in zip([1000, 10_000, 100_000], freqs):
        assert dev < 6.0 / np.sqrt(n) + 2e-3


def test_coin_narrow_spin_is_heads_biased():
    spec = CoinMachineSpec(spin=(0.0, 0.1))
    report = coin_lln_experiment(spec, [1000], 0.4, 5, RngStream(3))
    assert "narrow_spin_warning" in report.flags
    assert report.table("ladder").rows[0][6] > 0.9
    assert not report.metric("final_frequency_bias").passed


def test_stone_velocity_jitter_analytic():
    spec = StoneThrowSpec()
    report = stone_throw_robustness(spec, 64, RngStream(4))
    m = report.metric("analytic_jitter_deviation")
    assert m.passed and m.value < 1e-10
    delta = spec.resolved_perturbation()
    sups = [r[0] for r in report.table("deviations").rows]
    assert np.allclose(sups, delta * spec.horizon, atol=1e-10)


def test_stone_zero_jitter_zero_deviation():
    spec = StoneThrowSpec(perturbation_scale=0.0)
    report = stone_throw_robustness(spec, 16, RngStream(5))
    assert max(r[0] for r in report.table("deviations").rows) < 1e-12


def test_stone_deviation_continuous_in_jitter():
    base = 1e-3 * np.linalg.norm([8.0, 0.0, 12.0])
    sups = []
    for k in range(4):
        spec = StoneThrowSpec(perturbation_scale=base / 2**k)
        report = stone_throw_robustness(spec, 8, RngStream(6))
        sups.append(max(r[0] for r in report.table("deviations").rows))
    ratios = [sups[i + 1] / sups[i] for i in range(3)]
    assert all(abs(r - 0.5) < 1e-6 for r in ratios)
    assert sups[-1] < 0.2 * sups[0]  # deviation vanishes with the jitter


def test_stone_third_body_small_but_nonzero():
    spec = StoneThrowSpec(third_body=True, perturbation_scale=1e-6, deviation_threshold=0.01)
    report = stone_throw_robustness(spec, 8, RngStream(7))
    sups = [r[0] for r in report.table("deviations").rows]
    # the weak attractor dominates the tiny jitter but stays far below the
    # explicit failure threshold
    assert all(1e-4 < s < 0.01 for s in sups)
    assert report.metric("deviation_measure").value == 0.0


def test_stone_measure_verdict_atypical():
    report = stone_throw_robustness(StoneThrowSpec(), 1024, RngStream(8))
    m = report.metric("deviation_measure")
    assert m.passed and m.value == 0.0
