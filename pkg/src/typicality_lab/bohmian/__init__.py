from .equivariance import equivariance_check
from .guidance import (
    BohmianEnsemble,
    FrameHistory,
    QualityFlags,
    TrajectoryBundle,
    VelocityField,
    advance_trajectory,
    bohmian_velocity,
    load_frame_history,
    propagate_history,
    save_frame_history,
)
from .subsystems import (
    ConditionalWaveFunction,
    EffectiveDecomposition,
    SplitConfiguration,
    absolute_uncertainty_experiment,
    binomial_deviation_bounds,
    binomial_deviation_tail,
    born_lln_experiment,
    conditional_born_statistics,
    conditional_wavefunction,
    correlated_gaussian_state,
    detect_effective_wavefunction,
    effective_detection_experiment,
    environment_marginal,
    interval_mass_1d,
    product_state,
    two_branch_state,
)
from .waves import (
    SplitStepPropagator,
    WaveFunction,
    density_moments,
    eigenstate_superposition,
    energy_expectation,
    free_gaussian,
    gaussian_spread_sigma,
    harmonic_eigenstate,
    harmonic_potential,
    plane_wave,
    probability_flux,
    schrodinger_step,
    spectral_tail_fraction,
    trig_interval_integral,
    trig_point_value,
)

__all__ = [
    "BohmianEnsemble",
    "ConditionalWaveFunction",
    "EffectiveDecomposition",
    "FrameHistory",
    "QualityFlags",
    "SplitConfiguration",
    "SplitStepPropagator",
    "TrajectoryBundle",
    "VelocityField",
    "WaveFunction",
    "absolute_uncertainty_experiment",
    "advance_trajectory",
    "binomial_deviation_bounds",
    "binomial_deviation_tail",
    "bohmian_velocity",
    "born_lln_experiment",
    "conditional_born_statistics",
    "conditional_wavefunction",
    "correlated_gaussian_state",
    "density_moments",
    "detect_effective_wavefunction",
    "effective_detection_experiment",
    "eigenstate_superposition",
    "energy_expectation",
    "environment_marginal",
    "equivariance_check",
    "free_gaussian",
    "gaussian_spread_sigma",
    "harmonic_eigenstate",
    "harmonic_potential",
    "interval_mass_1d",
    "load_frame_history",
    "plane_wave",
    "probability_flux",
    "product_state",
    "propagate_history",
    "save_frame_history",
    "schrodinger_step",
    "spectral_tail_fraction",
    "trig_interval_integral",
    "trig_point_value",
    "two_branch_state",
]
