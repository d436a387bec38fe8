"""Classical case studies: velocity statistics, coin tosses, a thrown stone.

Each experiment estimates the measure of a deviation set over repeated
seeded draws of initial conditions, reports it with a confidence interval
and a typicality verdict, and packages everything into an
:class:`~typicality_lab.reporting.ExperimentReport`. Initial conditions
for the coin and the stone are drawn uniformly over the specified
parameter ranges; this stands in for conditioning the global measure on
the existence of the device and is recorded as a surrogate in every
report.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import erf

from ..errors import ConfigurationError, DomainError
from ..parallel import map_units
from ..reporting import DataTable, ExperimentReport, MetricResult
from ..rng import RngStream
from ..stats import verdict_from_counts
from .dynamics import (
    HamiltonianSystem,
    Microstate,
    integrate_path,
    sample_microcanonical_ideal_gas,
)

# Fixed seed-block size for work units; independent of the worker count so
# that parallel runs reduce in exactly the same order as serial ones.
SEED_BLOCK = 25
PERTURBATION_BLOCK = 64

MEASURE_SURROGATE_NOTE = (
    "initial conditions drawn uniformly over the machine's parameter ranges; "
    "this is a desk-scale surrogate for conditioning the global stationary "
    "measure on the device existing"
)


@dataclass(frozen=True)
class ThermalSpec:
    """Mean kinetic scale of the gas: k_B T and the particle mass."""

    kT: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.kT <= 0:
            raise ConfigurationError(f"kT must be positive, got {self.kT}")
        if self.mass <= 0:
            raise ConfigurationError(f"mass must be positive, got {self.mass}")

    @property
    def sigma_v(self) -> float:
        """Standard deviation of one velocity component."""
        return float(np.sqrt(self.kT / self.mass))


@dataclass(frozen=True)
class VelocityWindow:
    """An interval of single-component velocities; bounds may be infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ConfigurationError(f"window needs lo < hi, got [{self.lo}, {self.hi}]")

    @classmethod
    def around(cls, v0: float, delta: float) -> "VelocityWindow":
        if delta <= 0:
            raise ConfigurationError(f"window half-width must be positive, got {delta}")
        return cls(v0 - delta, v0 + delta)

    def indicator(self, v: np.ndarray) -> np.ndarray:
        return (v >= self.lo) & (v <= self.hi)


def maxwell_target_fraction(window: VelocityWindow, thermal: ThermalSpec) -> float:
    """Mass the limiting one-component velocity density assigns to a window.

    The density is the centered Gaussian with variance kT/m, normalized in
    one dimension; the value is exact to round-off via the error function.
    """
    s = thermal.sigma_v * np.sqrt(2.0)
    phi = lambda v: 1.0 if v == np.inf else (-1.0 if v == -np.inf else float(erf(v / s)))
    return 0.5 * (phi(window.hi) - phi(window.lo))


def empirical_velocity_fraction(state: Microstate, window: VelocityWindow, mass: float) -> float:
    """Fraction of particles whose first velocity component lies in the window."""
    if state.n_particles < 1:
        raise DomainError("state must contain at least one particle")
    v = state.momenta[:, 0] / mass
    return float(np.mean(window.indicator(v)))


def _ladder_monotone(measures: list[float]) -> tuple[bool, float]:
    """Check that measures decrease along the ladder.

    Strict decrease is required wherever the earlier estimate is nonzero;
    once the estimator has saturated at zero it may stay there. Returns the
    pass flag and the worst violation (0.0 when clean).
    """
    ok = True
    worst = 0.0
    for a, b in zip(measures, measures[1:]):
        if a == 0.0 and b == 0.0:
            continue
        if b >= a:
            ok = False
            worst = max(worst, b - a)
    return ok, worst


def _tol(tolerances: dict | None, name: str, default: float) -> float:
    if tolerances and name in tolerances:
        return float(tolerances[name])
    return default


def _maxwell_unit(args) -> list[tuple[bool, float]]:
    streams, n_particles, thermal, window, epsilon, box = args
    target = maxwell_target_fraction(window, thermal)
    out = []
    for stream in streams:
        energy = 1.5 * n_particles * thermal.kT
        state = sample_microcanonical_ideal_gas(n_particles, box, thermal.mass, energy, stream)
        frac = empirical_velocity_fraction(state, window, thermal.mass)
        out.append((bool(abs(frac - target) > epsilon), frac))
    return out


def maxwell_lln_experiment(
    ladder: list[int],
    window: VelocityWindow,
    thermal: ThermalSpec,
    epsilon: float,
    n_seeds: int,
    rng: RngStream,
    workers: int = 1,
    tau: float = 0.01,
    tolerances: dict | None = None,
) -> ExperimentReport:
    """Concentration of the in-window velocity fraction on growing gases.

    For every ladder size the gas is drawn repeatedly from the exact
    constant-energy ensemble with E/N fixed at (3/2) kT, and the measure of
    seeds whose empirical fraction deviates from the limiting value by more
    than ``epsilon`` is estimated with a Wilson interval.
    """
    t0 = time.perf_counter()
    ladder = [int(n) for n in ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigurationError("ladder sizes must be strictly increasing")
    if epsilon <= 0:
        raise ConfigurationError("epsilon must be positive")
    box = np.array([[0.0, 1.0]] * 3)
    target = maxwell_target_fraction(window, thermal)

    units = []
    for li, n_particles in enumerate(ladder):
        for start in range(0, n_seeds, SEED_BLOCK):
            streams = [
                rng.child(li * n_seeds + k) for k in range(start, min(start + SEED_BLOCK, n_seeds))
            ]
            units.append((streams, n_particles, thermal, window, epsilon, box))
    results = map_units(_maxwell_unit, units, workers)

    rows = []
    measures = []
    per_ladder_fracs: list[list[float]] = []
    idx = 0
    for li, n_particles in enumerate(ladder):
        flat: list[tuple[bool, float]] = []
        for start in range(0, n_seeds, SEED_BLOCK):
            flat.extend(results[idx])
            idx += 1
        deviations = sum(1 for dev, _ in flat if dev)
        fracs = [f for _, f in flat]
        per_ladder_fracs.append(fracs)
        verdict = verdict_from_counts(deviations, n_seeds, tau)
        measures.append(verdict.measure)
        rows.append(
            [
                n_particles,
                n_seeds,
                deviations,
                verdict.measure,
                verdict.halfwidth,
                verdict.classification,
                float(np.mean(fracs)),
                target,
            ]
        )

    monotone_ok, worst = _ladder_monotone(measures)
    final_tol = _tol(tolerances, "final_deviation_measure", 0.01)
    metrics = [
        MetricResult(
            name="final_deviation_measure",
            value=measures[-1],
            target=0.0,
            tolerance=final_tol,
            ci_low=max(0.0, measures[-1] - rows[-1][4]),
            ci_high=measures[-1] + rows[-1][4],
            passed=measures[-1] < final_tol,
            note=f"measure of |fraction - target| > {epsilon} at N = {ladder[-1]}",
        ),
        MetricResult(
            name="ladder_monotone_decrease",
            value=worst,
            target=0.0,
            tolerance=0.0,
            passed=monotone_ok,
            note="strict decrease required until the estimate saturates at zero",
        ),
    ]

    # Histogram of one large-gas draw against the limiting density, for plots.
    hist_state = sample_microcanonical_ideal_gas(
        ladder[-1], box, thermal.mass, 1.5 * ladder[-1] * thermal.kT, rng.child(len(ladder) * n_seeds)
    )
    v = hist_state.momenta[:, 0] / thermal.mass
    edges = np.linspace(-4 * thermal.sigma_v, 4 * thermal.sigma_v, 81)
    counts, _ = np.histogram(v, bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    density = np.exp(-centers**2 / (2 * thermal.sigma_v**2)) / (
        thermal.sigma_v * np.sqrt(2 * np.pi)
    )
    hist_rows = [
        [float(c), int(k), float(k / (v.size * (edges[1] - edges[0]))), float(d)]
        for c, k, d in zip(centers, counts, density)
    ]

    tables = [
        DataTable(
            name="ladder",
            columns=[
                "n_particles",
                "n_seeds",
                "deviations",
                "measure",
                "ci_halfwidth",
                "classification",
                "mean_fraction",
                "target_fraction",
            ],
            rows=rows,
            note="deviation-set measure of the in-window velocity fraction vs gas size",
        ),
        DataTable(
            name="velocity_histogram",
            columns=["v_center", "count", "empirical_density", "limit_density"],
            rows=hist_rows,
            note="one-component velocity histogram of the largest gas vs the limiting Gaussian",
        ),
    ]

    return ExperimentReport(
        experiment="maxwell-lln",
        config={
            "ladder": ladder,
            "window": [window.lo, window.hi],
            "kT": thermal.kT,
            "mass": thermal.mass,
            "epsilon": epsilon,
            "n_seeds": n_seeds,
            "seed": rng.seed,
            "stream": rng.stream,
            "workers": workers,
            "tau": tau,
        },
        metrics=metrics,
        flags={"measure_note": MEASURE_SURROGATE_NOTE},
        tables=tables,
        wall_time=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class CoinMachineSpec:
    """Two-parameter rigid coin: launch speed u and spin rate omega.

    The coin leaves the hand at angle ``theta0``, flies for 2u/g, and
    rotates at constant omega; it shows heads when the cosine of the total
    rotation angle is non-negative. All randomness lives in the uniform
    draw of (u, omega) over the given ranges.
    """

    gravity: float = 9.8
    launch_speed: tuple[float, float] = (4.0, 6.0)
    spin: tuple[float, float] = (50.0, 120.0)
    theta0: float = 0.0

    def __post_init__(self):
        if self.gravity <= 0:
            raise ConfigurationError("gravity must be positive")
        if not 0 < self.launch_speed[0] < self.launch_speed[1]:
            raise ConfigurationError("launch speed range must satisfy 0 < lo < hi")
        if not 0 <= self.spin[0] < self.spin[1]:
            raise ConfigurationError("spin range must satisfy 0 <= lo < hi")

    def flight_time(self, u) -> np.ndarray:
        return 2.0 * np.asarray(u) / self.gravity

    def rotation_span_turns(self) -> float:
        """Full turns the spin range sweeps at the longest flight time."""
        t_max = 2.0 * self.launch_speed[1] / self.gravity
        return float((self.spin[1] - self.spin[0]) * t_max / (2.0 * np.pi))


def coin_outcome(spec: CoinMachineSpec, u, omega):
    """Deterministic outcome of one toss; True means heads.

    Accepts scalars or arrays. The total rotation is omega * (2u/g) +
    theta0 and heads shows exactly when its cosine is non-negative (the
    measure-zero tie goes to heads).
    """
    u = np.asarray(u, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if np.any(u <= 0):
        raise DomainError("launch speed must be positive")
    if np.any(omega < 0):
        raise DomainError("spin rate must be non-negative")
    theta = omega * spec.flight_time(u) + spec.theta0
    heads = np.cos(theta) >= 0.0
    return bool(heads) if heads.ndim == 0 else heads


def _coin_unit(args) -> list[tuple[bool, float]]:
    streams, spec, n_tosses, epsilon = args
    out = []
    for stream in streams:
        gen = stream.generator()
        u = gen.uniform(spec.launch_speed[0], spec.launch_speed[1], n_tosses)
        w = gen.uniform(spec.spin[0], spec.spin[1], n_tosses)
        freq = float(np.mean(coin_outcome(spec, u, w)))
        out.append((bool(abs(freq - 0.5) > epsilon), freq))
    return out


def coin_lln_experiment(
    spec: CoinMachineSpec,
    ladder: list[int],
    epsilon: float,
    n_seeds: int,
    rng: RngStream,
    workers: int = 1,
    tau: float = 0.01,
    tolerances: dict | None = None,
) -> ExperimentReport:
    """Concentration of the heads frequency for the deterministic coin.

    Wide spin ranges equidistribute the rotation angle and push the heads
    frequency to one half; a narrow range leaves the outcome pinned by the
    initial orientation, which the report surfaces instead of hiding.
    """
    t0 = time.perf_counter()
    ladder = [int(n) for n in ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigurationError("ladder sizes must be strictly increasing")
    span = spec.rotation_span_turns()
    narrow = span < 10.0

    units = []
    for li, n_tosses in enumerate(ladder):
        for start in range(0, n_seeds, SEED_BLOCK):
            streams = [
                rng.child(li * n_seeds + k) for k in range(start, min(start + SEED_BLOCK, n_seeds))
            ]
            units.append((streams, spec, n_tosses, epsilon))
    results = map_units(_coin_unit, units, workers)

    rows = []
    measures = []
    mean_freqs = []
    idx = 0
    for li, n_tosses in enumerate(ladder):
        flat: list[tuple[bool, float]] = []
        for start in range(0, n_seeds, SEED_BLOCK):
            flat.extend(results[idx])
            idx += 1
        deviations = sum(1 for dev, _ in flat if dev)
        freqs = [f for _, f in flat]
        verdict = verdict_from_counts(deviations, n_seeds, tau)
        measures.append(verdict.measure)
        mean_freqs.append(float(np.mean(freqs)))
        rows.append(
            [
                n_tosses,
                n_seeds,
                deviations,
                verdict.measure,
                verdict.halfwidth,
                verdict.classification,
                mean_freqs[-1],
            ]
        )

    monotone_ok, worst = _ladder_monotone(measures)
    freq_tol = _tol(tolerances, "final_frequency_bias", 0.01)
    final_bias = abs(mean_freqs[-1] - 0.5)
    metrics = [
        MetricResult(
            name="final_frequency_bias",
            value=final_bias,
            target=0.0,
            tolerance=freq_tol,
            passed=final_bias < freq_tol,
            note=f"|heads frequency - 1/2| at N = {ladder[-1]}, mean over seeds",
        ),
        MetricResult(
            name="final_deviation_measure",
            value=measures[-1],
            target=0.0,
            tolerance=_tol(tolerances, "final_deviation_measure", 0.01),
            passed=measures[-1] < _tol(tolerances, "final_deviation_measure", 0.01),
            note=f"measure of |frequency - 1/2| > {epsilon} at N = {ladder[-1]}",
        ),
        MetricResult(
            name="ladder_monotone_decrease",
            value=worst,
            target=0.0,
            tolerance=0.0,
            passed=monotone_ok,
            note="strict decrease required until the estimate saturates at zero",
        ),
    ]

    flags = {
        "rotation_span_turns": span,
        "measure_note": MEASURE_SURROGATE_NOTE,
    }
    if narrow:
        flags["narrow_spin_warning"] = (
            f"spin range sweeps only {span:.2f} turns (< 10); the 1/2 limit is not expected"
        )

    tables = [
        DataTable(
            name="ladder",
            columns=[
                "n_tosses",
                "n_seeds",
                "deviations",
                "measure",
                "ci_halfwidth",
                "classification",
                "mean_frequency",
            ],
            rows=rows,
            note="deviation-set measure of the heads frequency vs number of tosses",
        )
    ]

    return ExperimentReport(
        experiment="coin-lln",
        config={
            "gravity": spec.gravity,
            "launch_speed": list(spec.launch_speed),
            "spin": list(spec.spin),
            "theta0": spec.theta0,
            "ladder": ladder,
            "epsilon": epsilon,
            "n_seeds": n_seeds,
            "seed": rng.seed,
            "stream": rng.stream,
            "workers": workers,
            "tau": tau,
        },
        metrics=metrics,
        flags=flags,
        tables=tables,
        wall_time=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class StoneThrowSpec:
    """A thrown point mass under uniform gravity, plus perturbation knobs.

    ``perturbation_scale`` is the magnitude of the initial-velocity jitter
    (defaults to 1e-3 of the launch speed); ``deviation_threshold`` is the
    sup-norm trajectory deviation that counts as a failure (defaults to
    ten times jitter * horizon). An optional distant attractor models a
    small neglected external force.
    """

    position: tuple[float, ...] = (0.0, 0.0, 0.0)
    velocity: tuple[float, ...] = (8.0, 0.0, 12.0)
    horizon: float = 2.0
    gravity: tuple[float, ...] = (0.0, 0.0, -9.8)
    dt: float = 1e-3
    perturbation_scale: float | None = None
    deviation_threshold: float | None = None
    third_body: bool = False
    third_body_distance: float = 50.0
    third_body_coupling: float = 1.0

    def __post_init__(self):
        if self.horizon <= 0:
            raise ConfigurationError("horizon must be positive")
        if self.dt <= 0 or self.dt > self.horizon:
            raise ConfigurationError("dt must lie in (0, horizon]")
        if len(self.position) != len(self.velocity) or len(self.position) != len(self.gravity):
            raise ConfigurationError("position, velocity and gravity must share a dimension")
        if self.perturbation_scale is not None and self.perturbation_scale < 0:
            raise ConfigurationError("perturbation scale must be non-negative")

    @property
    def dimension(self) -> int:
        return len(self.position)

    def resolved_perturbation(self) -> float:
        if self.perturbation_scale is not None:
            return self.perturbation_scale
        return 1e-3 * float(np.linalg.norm(self.velocity))

    def resolved_threshold(self) -> float:
        if self.deviation_threshold is not None:
            return self.deviation_threshold
        return 10.0 * self.resolved_perturbation() * self.horizon


def _stone_reference_path(spec: StoneThrowSpec) -> tuple[int, float, np.ndarray]:
    n_steps = max(1, round(spec.horizon / spec.dt))
    dt = spec.horizon / n_steps
    system = HamiltonianSystem(
        masses=np.array([1.0]), external="uniform_gravity", gravity=np.asarray(spec.gravity)
    )
    state = Microstate(np.asarray(spec.position), np.asarray(spec.velocity))
    _, qs, _ = integrate_path(system, state, dt, n_steps)
    return n_steps, dt, qs[:, 0, :]


def _jitter_directions(streams, d: int) -> np.ndarray:
    out = np.empty((len(streams), d))
    for i, stream in enumerate(streams):
        g = stream.generator().standard_normal(d)
        out[i] = g / np.linalg.norm(g)
    return out


def _stone_unit(args) -> list[float]:
    spec, streams, reference, n_steps, dt = args
    delta = spec.resolved_perturbation()
    d = spec.dimension
    directions = _jitter_directions(streams, d)
    v0s = np.asarray(spec.velocity) + delta * directions
    if not spec.third_body:
        # Non-interacting perturbed copies integrate as one big ensemble.
        system = HamiltonianSystem(
            masses=np.array([1.0]),
            external="uniform_gravity",
            gravity=np.asarray(spec.gravity),
        )
        q0 = np.broadcast_to(np.asarray(spec.position), v0s.shape).copy()
        _, qs, _ = integrate_path(system, Microstate(q0, v0s), dt, n_steps)
        dev = np.linalg.norm(qs - reference[:, None, :], axis=2)
        return [float(s) for s in dev.max(axis=0)]
    # Distant heavy attractor as a second, nearly immobile particle;
    # coupling = G * M so the pull on the stone is coupling / r^2.
    big_mass = 1.0e6
    body_pos = np.zeros(d)
    body_pos[0] = spec.third_body_distance
    system = HamiltonianSystem(
        masses=np.array([1.0, big_mass]),
        pair="inverse_distance",
        pair_strength=spec.third_body_coupling / big_mass,
        external="uniform_gravity",
        gravity=np.asarray(spec.gravity),
    )
    sups = []
    for v0 in v0s:
        state = Microstate(
            np.stack([np.asarray(spec.position), body_pos]),
            np.stack([v0, np.zeros(d)]),
        )
        _, qs, _ = integrate_path(system, state, dt, n_steps)
        dev = np.linalg.norm(qs[:, 0, :] - reference, axis=1)
        sups.append(float(dev.max()))
    return sups


def stone_throw_robustness(
    spec: StoneThrowSpec,
    n_perturbations: int,
    rng: RngStream,
    workers: int = 1,
    tau: float = 0.01,
    tolerances: dict | None = None,
) -> ExperimentReport:
    """Distribution of sup-norm trajectory deviations under initial jitter.

    The reference trajectory is integrated once; each perturbed run jitters
    the launch velocity by a fixed magnitude in a random direction and
    records the largest distance to the reference over the whole flight.
    Under uniform gravity alone the deviation is exactly jitter * horizon,
    which doubles as an analytic check on the integrator.
    """
    t0 = time.perf_counter()
    n_steps, dt, reference = _stone_reference_path(spec)
    delta = spec.resolved_perturbation()
    epsilon = spec.resolved_threshold()

    units = []
    for start in range(0, n_perturbations, PERTURBATION_BLOCK):
        streams = [
            rng.child(k) for k in range(start, min(start + PERTURBATION_BLOCK, n_perturbations))
        ]
        units.append((spec, streams, reference, n_steps, dt))
    sups = [s for block in map_units(_stone_unit, units, workers) for s in block]
    sups_arr = np.asarray(sups)

    exceed = int(np.count_nonzero(sups_arr > epsilon))
    verdict = verdict_from_counts(exceed, n_perturbations, tau)

    metrics = [
        MetricResult(
            name="deviation_measure",
            value=verdict.measure,
            target=0.0,
            tolerance=_tol(tolerances, "deviation_measure", tau),
            ci_low=max(0.0, verdict.measure - verdict.halfwidth),
            ci_high=verdict.measure + verdict.halfwidth,
            passed=verdict.classification == "atypical",
            note=f"measure of sup-deviation > {epsilon:.6g}; verdict {verdict.classification}",
        ),
    ]
    if not spec.third_body and delta > 0:
        analytic = delta * spec.horizon
        worst = float(np.max(np.abs(sups_arr - analytic)))
        a_tol = _tol(tolerances, "analytic_jitter_deviation", 1e-10)
        metrics.append(
            MetricResult(
                name="analytic_jitter_deviation",
                value=worst,
                target=0.0,
                tolerance=a_tol,
                passed=worst < a_tol,
                note="under uniform gravity the sup-deviation equals jitter * horizon exactly",
            )
        )

    edges = np.linspace(0.0, max(float(sups_arr.max()), epsilon) * 1.05 + 1e-30, 41)
    counts, _ = np.histogram(sups_arr, bins=edges)
    hist_rows = [
        [float(0.5 * (edges[i] + edges[i + 1])), int(counts[i])] for i in range(counts.size)
    ]

    tables = [
        DataTable(
            name="deviations",
            columns=["sup_deviation"],
            rows=[[float(s)] for s in sups_arr],
            note="sup-norm deviation from the reference trajectory per perturbed run",
        ),
        DataTable(
            name="deviation_histogram",
            columns=["deviation_center", "count"],
            rows=hist_rows,
            note="histogram of sup-norm deviations",
        ),
    ]

    return ExperimentReport(
        experiment="stone-robustness",
        config={
            **asdict(spec),
            "position": list(spec.position),
            "velocity": list(spec.velocity),
            "gravity": list(spec.gravity),
            "n_perturbations": n_perturbations,
            "resolved_perturbation": delta,
            "resolved_threshold": epsilon,
            "seed": rng.seed,
            "stream": rng.stream,
            "workers": workers,
            "tau": tau,
        },
        metrics=metrics,
        flags={"measure_note": MEASURE_SURROGATE_NOTE},
        tables=tables,
        wall_time=time.perf_counter() - t0,
    )
