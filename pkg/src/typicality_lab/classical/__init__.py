from .dynamics import (
    EnergyShellSpec,
    HamiltonianSystem,
    LiouvilleResult,
    Microstate,
    PhaseSpaceBox,
    hamiltonian_energy,
    integrate,
    integrate_path,
    liouville_volume_check,
    sample_microcanonical_ideal_gas,
    verlet_step,
)
from .experiments import (
    CoinMachineSpec,
    StoneThrowSpec,
    ThermalSpec,
    VelocityWindow,
    coin_lln_experiment,
    coin_outcome,
    empirical_velocity_fraction,
    maxwell_lln_experiment,
    maxwell_target_fraction,
    stone_throw_robustness,
)

__all__ = [
    "CoinMachineSpec",
    "EnergyShellSpec",
    "HamiltonianSystem",
    "LiouvilleResult",
    "Microstate",
    "PhaseSpaceBox",
    "StoneThrowSpec",
    "ThermalSpec",
    "VelocityWindow",
    "coin_lln_experiment",
    "coin_outcome",
    "empirical_velocity_fraction",
    "hamiltonian_energy",
    "integrate",
    "integrate_path",
    "liouville_volume_check",
    "maxwell_lln_experiment",
    "maxwell_target_fraction",
    "sample_microcanonical_ideal_gas",
    "stone_throw_robustness",
    "verlet_step",
]
