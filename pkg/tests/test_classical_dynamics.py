"""Hamiltonian systems, the symplectic integrator and ensemble sampling."""

import numpy as np
import pytest

from typicality_lab import ConfigurationError, DomainError, IntegrationError, RngStream, SingularityError
from typicality_lab.classical import (
    HamiltonianSystem,
    Microstate,
    PhaseSpaceBox,
    hamiltonian_energy,
    integrate,
    integrate_path,
    liouville_volume_check,
    sample_microcanonical_ideal_gas,
    verlet_step,
)
from typicality_lab.classical.dynamics import EnergyShellSpec, flow_backward

BOX3 = np.array([[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]])


def harmonic_1d(mass=1.0, k=1.0):
    return HamiltonianSystem(masses=np.array([mass]), external="harmonic_trap", trap_stiffness=k)


def test_free_particle_energies():
    free = HamiltonianSystem(masses=np.array([1.0]))
    assert hamiltonian_energy(free, Microstate([0.0, 0.0, 0.0], [0.0, 0.0, 0.0])) == 0.0
    assert hamiltonian_energy(free, Microstate([0.0, 0.0, 0.0], [2.0, 0.0, 0.0])) == 2.0


def test_harmonic_pair_energy_direct_evaluation():
    sys2 = HamiltonianSystem(masses=np.array([1.0, 1.0]), pair="harmonic", pair_strength=1.0)
    st = Microstate([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], np.zeros((2, 3)))
    # 0.5 * k * r^2 with k = 1, r = 1
    assert np.isclose(hamiltonian_energy(sys2, st), 0.5)


def test_inverse_distance_singularity():
    sys2 = HamiltonianSystem(masses=np.array([1.0, 1.0]), pair="inverse_distance", pair_strength=1.0)
    st = Microstate([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], np.zeros((2, 3)))
    with pytest.raises(SingularityError):
        hamiltonian_energy(sys2, st)


def test_verlet_exact_for_free_flight():
    free = HamiltonianSystem(masses=np.array([2.0]))
    st = Microstate([[0.1, 0.2, 0.3]], [[1.0, -2.0, 0.5]])
    out = integrate(free, st, 0.05, 40)  # t = 2
    expected = np.array([0.1, 0.2, 0.3]) + 2.0 * np.array([1.0, -2.0, 0.5]) / 2.0
    assert np.allclose(out.positions[0], expected, atol=1e-13)
    assert np.allclose(out.momenta, st.momenta)


def test_verlet_requires_positive_dt():
    with pytest.raises(ConfigurationError):
        verlet_step(harmonic_1d(), Microstate([[1.0]], [[0.0]]), -0.1)


def test_harmonic_period_return():
    # analytic solution (cos t, -sin t); one full period returns the start
    st = Microstate([[1.0]], [[0.0]])
    dt = 1e-3
    out = integrate(harmonic_1d(), st, dt, round(2 * np.pi / dt))
    assert abs(out.positions[0, 0] - 1.0) < 1e-4
    assert abs(out.momenta[0, 0]) < 1e-3


def test_energy_bounded_over_long_run():
    st = Microstate([[1.0]], [[0.0]])
    sysho = harmonic_1d()
    h0 = hamiltonian_energy(sysho, st)
    state = st
    worst = 0.0
    for _ in range(100):
        state = integrate(sysho, state, 1e-3, 1000)
        worst = max(worst, abs(hamiltonian_energy(sysho, state) - h0) / abs(h0))
    assert worst < 1e-6  # bounded oscillation, no secular drift over 1e5 steps


def test_energy_guard_detects_instability():
    # dt far beyond the stability limit of the stiff oscillator
    stiff = HamiltonianSystem(masses=np.array([1.0]), external="harmonic_trap", trap_stiffness=1e6)
    with pytest.raises(IntegrationError):
        integrate(stiff, Microstate([[1.0]], [[0.0]]), 0.5, 10, energy_guard=0.5)


def test_monodromy_determinant_is_one():
    # finite-difference Jacobian of the one-period flow map
    sysho = harmonic_1d()
    dt = 1e-3
    n = round(2 * np.pi / dt)
    eps = 1e-6

    def flow(q, p):
        s = integrate(sysho, Microstate([[q]], [[p]]), dt, n)
        return s.positions[0, 0], s.momenta[0, 0]

    j = np.zeros((2, 2))
    for col, (dq, dp) in enumerate([(eps, 0.0), (0.0, eps)]):
        qp, pp = flow(0.7 + dq, 0.3 + dp)
        qm, pm = flow(0.7 - dq, 0.3 - dp)
        j[:, col] = [(qp - qm) / (2 * eps), (pp - pm) / (2 * eps)]
    assert abs(np.linalg.det(j) - 1.0) < 1e-8


def test_time_reversibility():
    sysho = harmonic_1d()
    st = Microstate([[1.0]], [[0.0]])
    fwd = integrate(sysho, st, 1e-3, 1000)
    back = flow_backward(sysho, fwd, 1e-3, 1000)
    assert abs(back.positions[0, 0] - 1.0) < 1e-10
    assert abs(back.momenta[0, 0]) < 1e-10


def test_hard_wall_reflection_exact_for_free_flight():
    gas = HamiltonianSystem(masses=np.array([1.0]), external="hard_walls", box=BOX3)
    st = Microstate([[0.95, 0.5, 0.5]], [[1.0, 0.0, 0.0]])
    out = integrate(gas, st, 0.01, 20)  # travels 0.2; folds at the wall
    assert np.isclose(out.positions[0, 0], 0.85)
    assert np.isclose(out.momenta[0, 0], -1.0)
    h0 = hamiltonian_energy(gas, st)
    assert np.isclose(hamiltonian_energy(gas, out), h0)


def test_hard_wall_multiple_bounces_stay_inside():
    gas = HamiltonianSystem(masses=np.array([1.0]), external="hard_walls", box=BOX3)
    st = Microstate([[0.5, 0.5, 0.5]], [[7.3, -4.1, 2.9]])
    out = integrate(gas, st, 0.05, 100)
    assert np.all(out.positions >= 0.0) and np.all(out.positions <= 1.0)
    assert np.allclose(np.abs(out.momenta), [[7.3, 4.1, 2.9]])


def test_microcanonical_sample_on_shell():
    gas = sample_microcanonical_ideal_gas(100, BOX3, 1.0, 150.0, RngStream(5))
    sysgas = HamiltonianSystem(masses=np.array([1.0]), external="hard_walls", box=BOX3)
    assert EnergyShellSpec(150.0, 1e-9).contains(hamiltonian_energy(sysgas, gas))
    # single particle: |p| = sqrt(2 m E) exactly
    one = sample_microcanonical_ideal_gas(1, BOX3, 2.0, 3.0, RngStream(6))
    assert np.isclose(np.linalg.norm(one.momenta), np.sqrt(2 * 2.0 * 3.0))


def test_microcanonical_velocity_component_moment():
    # E[v_x^2] = kT/m from the uniform-on-sphere law; kT = 1, m = 1
    n = 10_000
    gas = sample_microcanonical_ideal_gas(n, BOX3, 1.0, 1.5 * n, RngStream(11))
    mean_sq = np.mean(gas.momenta[:, 0] ** 2)
    assert abs(mean_sq - 1.0) < 0.01


def test_microcanonical_rejects_nonpositive_energy():
    with pytest.raises(DomainError):
        sample_microcanonical_ideal_gas(10, BOX3, 1.0, -1.0, RngStream(0))


def test_liouville_free_particle_shear():
    free = HamiltonianSystem(masses=np.array([1.0]))
    region = PhaseSpaceBox(np.array([[0.0, 1.0]]), np.array([[-0.5, 0.5]]))
    res = liouville_volume_check(free, region, t=0.7, n_samples=20_000, rng=RngStream(3), dt_max=5e-3)
    assert res.consistent_with_unity
    assert abs(res.ratio - 1.0) < 0.05


def test_liouville_harmonic_quarter_period():
    res = liouville_volume_check(
        harmonic_1d(),
        PhaseSpaceBox(np.array([[0.3, 0.8]]), np.array([[0.3, 0.8]])),
        t=np.pi / 2,
        n_samples=20_000,
        rng=RngStream(4),
        dt_max=2e-3,
    )
    assert res.consistent_with_unity


def test_liouville_ci_halfwidth_follows_binomial_formula():
    # a half-unit reference cell at 1e5 samples keeps the interval below 0.01
    res = liouville_volume_check(
        harmonic_1d(),
        PhaseSpaceBox(np.array([[0.3, 1.3]]), np.array([[0.3, 0.8]])),
        t=np.pi / 2,
        n_samples=100_000,
        rng=RngStream(5),
        dt_max=2e-3,
    )
    halfwidth = (res.ratio_high - res.ratio_low) / 2
    assert halfwidth < 0.01
    p = res.hits / res.n_samples
    predicted = 2.5758 * np.sqrt(p * (1 - p) / res.n_samples) * (
        res.sampling_volume / res.region_volume
    )
    assert abs(halfwidth - predicted) < 0.3 * predicted


def test_liouville_rejects_singular_interaction():
    bad = HamiltonianSystem(masses=np.array([1.0, 1.0]), pair="inverse_distance", pair_strength=1.0)
    with pytest.raises(ConfigurationError):
        liouville_volume_check(
            bad,
            PhaseSpaceBox(np.array([[0.0, 1.0]]), np.array([[0.0, 1.0]])),
            t=0.1,
            n_samples=100,
            rng=RngStream(0),
        )
