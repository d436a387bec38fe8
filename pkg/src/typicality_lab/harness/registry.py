"""The experiment catalog: names, defaults, runners and artifact output.

Every experiment is registered with a parameter dataclass whose fields
are its documented defaults, a one-line summary and the list of claims
it checks. Runs are dispatched by name, and the resulting report is
written as JSON plus one CSV per data table plus SVG plots.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..bohmian.equivariance import equivariance_check
from ..bohmian.subsystems import (
    absolute_uncertainty_experiment,
    born_lln_experiment,
    conditional_born_statistics,
    correlated_gaussian_state,
    effective_detection_experiment,
    product_state,
)
from ..bohmian.waves import eigenstate_superposition, free_gaussian
from ..classical.dynamics import (
    HamiltonianSystem,
    PhaseSpaceBox,
    liouville_volume_check,
)
from ..classical.experiments import (
    CoinMachineSpec,
    StoneThrowSpec,
    ThermalSpec,
    VelocityWindow,
    coin_lln_experiment,
    maxwell_lln_experiment,
    stone_throw_robustness,
)
from ..errors import ConfigurationError
from ..grids import Grid
from ..reporting import DataTable, ExperimentReport, MetricResult, write_table_csv
from ..rng import RngStream
from ..stats import wilson_interval
from . import plots


@dataclass
class MaxwellParams:
    ladder: list = field(default_factory=lambda: [100, 1000, 10000, 100000])
    window: list = field(default_factory=lambda: [-1.0, 1.0])
    kT: float = 1.0
    mass: float = 1.0
    epsilon: float = 0.02
    n_seeds: int = 100
    tau: float = 0.01


def _run_maxwell(p: MaxwellParams, seed: int, workers: int, tolerances: dict) -> ExperimentReport:
    return maxwell_lln_experiment(
        ladder=p.ladder,
        window=VelocityWindow(p.window[0], p.window[1]),
        thermal=ThermalSpec(kT=p.kT, mass=p.mass),
        epsilon=p.epsilon,
        n_seeds=p.n_seeds,
        rng=RngStream(seed),
        workers=workers,
        tau=p.tau,
        tolerances=tolerances,
    )


@dataclass
class LiouvilleParams:
    omega: float = 1.0
    mass: float = 1.0
    region_q: list = field(default_factory=lambda: [0.3, 0.8])
    region_p: list = field(default_factory=lambda: [0.3, 0.8])
    period_fractions: list = field(default_factory=lambda: [0.25, 1.0])
    n_samples: int = 100000
    dt_max: float = 2e-3
    tau: float = 0.01


def _run_liouville(
    p: LiouvilleParams, seed: int, workers: int, tolerances: dict
) -> ExperimentReport:
    import time

    t0 = time.perf_counter()
    system = HamiltonianSystem(
        masses=np.array([p.mass]),
        external="harmonic_trap",
        trap_stiffness=p.mass * p.omega**2,
    )
    region = PhaseSpaceBox(np.array([p.region_q]), np.array([p.region_p]))
    period = 2.0 * np.pi / p.omega
    rows = []
    all_ok = True
    worst = 0.0
    for i, frac in enumerate(p.period_fractions):
        res = liouville_volume_check(
            system,
            region,
            t=frac * period,
            n_samples=p.n_samples,
            rng=RngStream(seed, i),
            dt_max=p.dt_max,
        )
        ok = res.consistent_with_unity
        all_ok &= ok
        worst = max(worst, abs(res.ratio - 1.0))
        rows.append(
            [frac, frac * period, res.ratio, res.ratio_low, res.ratio_high, res.hits, ok]
        )
    metrics = [
        MetricResult(
            name="volume_ratio_unity",
            value=worst,
            target=0.0,
            tolerance=None,
            ci_low=rows[-1][3],
            ci_high=rows[-1][4],
            passed=all_ok,
            note="flowed-region volume over original volume, interval must cover 1",
        )
    ]
    tables = [
        DataTable(
            name="ratios",
            columns=["period_fraction", "t", "ratio", "ci_low", "ci_high", "hits", "covers_one"],
            rows=rows,
            note="Monte Carlo phase-space volume ratio of a flowed rectangle",
        )
    ]
    return ExperimentReport(
        experiment="liouville-check",
        config={**asdict(p), "seed": seed, "workers": workers},
        metrics=metrics,
        flags={},
        tables=tables,
        wall_time=time.perf_counter() - t0,
    )


@dataclass
class CoinParams:
    gravity: float = 9.8
    launch_speed: list = field(default_factory=lambda: [4.0, 6.0])
    spin: list = field(default_factory=lambda: [50.0, 120.0])
    theta0: float = 0.0
    ladder: list = field(default_factory=lambda: [100, 1000, 10000, 100000])
    epsilon: float = 0.02
    n_seeds: int = 100
    tau: float = 0.01


def _run_coin(p: CoinParams, seed: int, workers: int, tolerances: dict) -> ExperimentReport:
    spec = CoinMachineSpec(
        gravity=p.gravity,
        launch_speed=tuple(p.launch_speed),
        spin=tuple(p.spin),
        theta0=p.theta0,
    )
    return coin_lln_experiment(
        spec,
        ladder=p.ladder,
        epsilon=p.epsilon,
        n_seeds=p.n_seeds,
        rng=RngStream(seed),
        workers=workers,
        tau=p.tau,
        tolerances=tolerances,
    )


@dataclass
class StoneParams:
    position: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    velocity: list = field(default_factory=lambda: [8.0, 0.0, 12.0])
    horizon: float = 2.0
    gravity: list = field(default_factory=lambda: [0.0, 0.0, -9.8])
    dt: float = 1e-3
    perturbation_scale: float = -1.0  # negative means the default 1e-3 |v|
    deviation_threshold: float = -1.0  # negative means 10 * jitter * horizon
    third_body: bool = False
    third_body_distance: float = 50.0
    third_body_coupling: float = 1.0
    n_perturbations: int = 1024
    tau: float = 0.01


def _run_stone(p: StoneParams, seed: int, workers: int, tolerances: dict) -> ExperimentReport:
    spec = StoneThrowSpec(
        position=tuple(p.position),
        velocity=tuple(p.velocity),
        horizon=p.horizon,
        gravity=tuple(p.gravity),
        dt=p.dt,
        perturbation_scale=None if p.perturbation_scale < 0 else p.perturbation_scale,
        deviation_threshold=None if p.deviation_threshold < 0 else p.deviation_threshold,
        third_body=p.third_body,
        third_body_distance=p.third_body_distance,
        third_body_coupling=p.third_body_coupling,
    )
    return stone_throw_robustness(
        spec,
        n_perturbations=p.n_perturbations,
        rng=RngStream(seed),
        workers=workers,
        tau=p.tau,
        tolerances=tolerances,
    )


@dataclass
class EquivarianceParams:
    grid_points: int = 1024
    grid_length: float = 40.0
    omega: float = 1.0
    modes: list = field(default_factory=lambda: [0, 1])
    n_samples: int = 10000
    n_checkpoints: int = 8
    beat_periods: float = 1.0
    steps_per_beat: int = 4096
    frame_stride: int = 4
    bins_per_cell: int = 8
    clamp_rate_threshold: float = 1e-3


def _run_equivariance(
    p: EquivarianceParams, seed: int, workers: int, tolerances: dict
) -> ExperimentReport:
    grid = Grid(1, p.grid_points, p.grid_length)
    amp = 1.0 / np.sqrt(len(p.modes))
    wf = eigenstate_superposition(grid, {int(n): amp for n in p.modes}, omega=p.omega)
    # beat period between adjacent modes: 2 pi / omega
    beat = 2.0 * np.pi / p.omega
    wave_dt = beat / p.steps_per_beat
    total = p.beat_periods * beat
    checkpoints = [total * (k + 1) / p.n_checkpoints for k in range(p.n_checkpoints)]
    return equivariance_check(
        wf,
        n_samples=p.n_samples,
        t_checkpoints=checkpoints,
        rng=RngStream(seed),
        wave_dt=wave_dt,
        frame_stride=p.frame_stride,
        bins_per_cell=p.bins_per_cell,
        workers=workers,
        clamp_rate_threshold=p.clamp_rate_threshold,
        tolerances=tolerances,
    )


@dataclass
class ConditionalBornParams:
    grid_points: int = 256
    grid_length: float = 16.0
    state: str = "correlated"  # or "product"
    s: float = 0.5
    big_s: float = 2.0
    phi_sigma: float = 1.0
    chi_sigma: float = 1.0
    n_samples: int = 100000
    y_bins: int = 16
    x_bins: int = 32
    min_count: int = 2000


def _run_conditional_born(
    p: ConditionalBornParams, seed: int, workers: int, tolerances: dict
) -> ExperimentReport:
    grid = Grid(2, p.grid_points, p.grid_length)
    if p.state == "correlated":
        wf = correlated_gaussian_state(grid, s=p.s, big_s=p.big_s)
    elif p.state == "product":
        wf = product_state(grid, phi_sigma=p.phi_sigma, chi_sigma=p.chi_sigma)
    else:
        raise ConfigurationError(f"unknown state {p.state!r}; use 'correlated' or 'product'")
    report = conditional_born_statistics(
        wf,
        n_samples=p.n_samples,
        rng=RngStream(seed),
        y_bins=p.y_bins,
        x_bins=p.x_bins,
        min_count=p.min_count,
        workers=workers,
        tolerances=tolerances,
    )
    report.config["state"] = p.state
    return report


@dataclass
class EffectiveDetectParams:
    grid_points: int = 256
    grid_length: float = 16.0
    separation: float = 6.0
    s_over_big_s_ladder: list = field(default_factory=lambda: [0.5, 0.25, 0.125])
    big_s: float = 2.0
    radius: int = 5
    tol_eff: float = 1e-3


def _run_effective_detect(
    p: EffectiveDetectParams, seed: int, workers: int, tolerances: dict
) -> ExperimentReport:
    return effective_detection_experiment(
        grid_points=p.grid_points,
        grid_length=p.grid_length,
        separation=p.separation,
        s_over_big_s_ladder=p.s_over_big_s_ladder,
        big_s=p.big_s,
        radius=p.radius,
        tol_eff=p.tol_eff,
        seed=seed,
        tolerances=tolerances,
    )


@dataclass
class BornLlnParams:
    grid_points: int = 1024
    grid_length: float = 40.0
    sigma: float = 1.0
    ladder: list = field(default_factory=lambda: [100, 1000, 10000])
    region: list = field(default_factory=lambda: [0.0, 20.0])
    epsilon: float = 0.02
    n_seeds: int = 100
    tau: float = 0.01


def _run_born_lln(p: BornLlnParams, seed: int, workers: int, tolerances: dict) -> ExperimentReport:
    grid = Grid(1, p.grid_points, p.grid_length)
    phi = free_gaussian(grid, p.sigma)
    return born_lln_experiment(
        phi,
        ladder=p.ladder,
        region=(p.region[0], p.region[1]),
        epsilon=p.epsilon,
        n_seeds=p.n_seeds,
        rng=RngStream(seed),
        workers=workers,
        tau=p.tau,
        tolerances=tolerances,
    )


@dataclass
class AbsoluteUncertaintyParams:
    sigma_ladder: list = field(default_factory=lambda: [1.0, 0.5, 0.25])
    n_samples: int = 65536
    t_factor: float = 40.0
    grid_points: int = 4096
    box_sigmas: float = 480.0
    frames_per_spread: int = 40
    steps_per_spread: int = 50


def _run_absolute_uncertainty(
    p: AbsoluteUncertaintyParams, seed: int, workers: int, tolerances: dict
) -> ExperimentReport:
    return absolute_uncertainty_experiment(
        sigma_ladder=p.sigma_ladder,
        n_samples=p.n_samples,
        rng=RngStream(seed),
        t_factor=p.t_factor,
        grid_points=p.grid_points,
        box_sigmas=p.box_sigmas,
        frames_per_spread=p.frames_per_spread,
        steps_per_spread=p.steps_per_spread,
        workers=workers,
        tolerances=tolerances,
    )


@dataclass(frozen=True)
class ExperimentEntry:
    name: str
    summary: str
    claims: tuple[str, ...]
    params_cls: type
    runner: object


EXPERIMENTS: dict[str, ExperimentEntry] = {
    e.name: e
    for e in [
        ExperimentEntry(
            name="maxwell-lln",
            summary="velocity-window fractions of exact constant-energy gases concentrate "
            "on the Gaussian target as the particle number grows",
            claims=(
                "in-window velocity fraction converges to the limiting Gaussian mass",
                "measure of macroscopic deviation sets shrinks along the size ladder",
            ),
            params_cls=MaxwellParams,
            runner=_run_maxwell,
        ),
        ExperimentEntry(
            name="liouville-check",
            summary="the symplectic flow preserves the phase-space volume of a rectangle",
            claims=("uniform phase-space measure is stationary under the Hamiltonian flow",),
            params_cls=LiouvilleParams,
            runner=_run_liouville,
        ),
        ExperimentEntry(
            name="coin-lln",
            summary="a deterministic two-parameter coin shows heads half the time over wide "
            "spin ranges, and stays biased over narrow ones",
            claims=(
                "heads frequency concentrates at one half for wide spin ranges",
                "narrow spin ranges reproduce the special-initial-conditions bias",
            ),
            params_cls=CoinParams,
            runner=_run_coin,
        ),
        ExperimentEntry(
            name="stone-robustness",
            summary="projectile trajectories deviate only proportionally to initial jitter",
            claims=(
                "sup-norm deviation equals jitter times horizon under uniform gravity",
                "the deviation set beyond ten times that scale has measure about zero",
            ),
            params_cls=StoneParams,
            runner=_run_stone,
        ),
        ExperimentEntry(
            name="equivariance",
            summary="an ensemble drawn from the squared amplitude and advected by the "
            "guiding velocity keeps matching the propagated squared amplitude",
            claims=("the squared-amplitude density is equivariant under the guided flow",),
            params_cls=EquivarianceParams,
            runner=_run_equivariance,
        ),
        ExperimentEntry(
            name="conditional-born",
            summary="within environment bins, subsystem positions follow the sliced "
            "conditional density",
            claims=("conditional position statistics match the normalized slice densities",),
            params_cls=ConditionalBornParams,
            runner=_run_conditional_born,
        ),
        ExperimentEntry(
            name="effective-detect",
            summary="separable and branchy states yield an autonomous subsystem profile, "
            "correlated states do not",
            claims=(
                "neighbourhood slice overlap detects an effective subsystem state",
                "detection score falls monotonically with correlation strength",
            ),
            params_cls=EffectiveDetectParams,
            runner=_run_effective_detect,
        ),
        ExperimentEntry(
            name="born-lln",
            summary="ensemble frequencies over identically prepared subsystems match the "
            "exact binomial law of the profile mass",
            claims=(
                "deviation-set measure equals the exact binomial tail at every ensemble size",
                "frequency concentrates on the profile mass as the ensemble grows",
            ),
            params_cls=BornLlnParams,
            runner=_run_born_lln,
        ),
        ExperimentEntry(
            name="absolute-uncertainty",
            summary="narrower preparation widths produce proportionally wider late-time "
            "velocity spreads, with product pinned at hbar over two",
            claims=(
                "spread(x0) * m * spread(v_late) equals hbar/2 for Gaussian preparations",
                "halving the preparation width doubles the velocity spread",
            ),
            params_cls=AbsoluteUncertaintyParams,
            runner=_run_absolute_uncertainty,
        ),
    ]
}


CATALOG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["experiments"],
    "additionalProperties": False,
    "properties": {
        "experiments": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "summary", "claims", "defaults"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "summary": {"type": "string"},
                    "claims": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                    "defaults": {"type": "object"},
                },
            },
        }
    },
}


def catalog() -> dict:
    """Machine-readable experiment catalog, valid against CATALOG_SCHEMA."""
    return {
        "experiments": [
            {
                "name": e.name,
                "summary": e.summary,
                "claims": list(e.claims),
                "defaults": asdict(e.params_cls()),
            }
            for e in EXPERIMENTS.values()
        ]
    }


def list_experiments() -> str:
    """Human-readable catalog listing."""
    lines = []
    for e in EXPERIMENTS.values():
        lines.append(f"{e.name}")
        lines.append(f"  {e.summary}")
        for claim in e.claims:
            lines.append(f"  - {claim}")
        defaults = ", ".join(f"{f.name}={getattr(e.params_cls(), f.name)!r}" for f in fields(e.params_cls))
        lines.append(f"  defaults: {defaults}")
    return "\n".join(lines)


def run_experiment(config) -> ExperimentReport:
    """Dispatch a resolved configuration to its experiment runner."""
    entry = EXPERIMENTS.get(config.experiment)
    if entry is None:
        raise ConfigurationError(
            f"unknown experiment {config.experiment!r}; known: {sorted(EXPERIMENTS)}"
        )
    report = entry.runner(config.params, config.seed, config.workers, config.tolerances)
    # the full resolved parameter set rides along so a run can be rebuilt
    # from its own report
    report.config["params"] = asdict(config.params)
    report.config["tolerance_overrides"] = dict(config.tolerances)
    return report


def write_report_artifacts(report: ExperimentReport, out_dir: str | Path) -> Path:
    """Write report.json, tables/*.csv and plots/*.svg under ``out_dir``."""
    out = Path(out_dir)
    (out / "tables").mkdir(parents=True, exist_ok=True)
    (out / "plots").mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json() + "\n")
    for table in report.tables:
        write_table_csv(table, out / "tables" / f"{table.name}.csv")
    plots.render_report_plots(report, out / "plots")
    return out
