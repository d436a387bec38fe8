"""From the full 2D state to subsystem descriptions and their statistics.

A 2D grid carries one coordinate for the subsystem (axis 0, "x") and one
for its environment (axis 1, "y"). Slicing the state at the actual
environment value gives the subsystem's conditional state; when all
nearby environment values give the same slice up to scale, the subsystem
owns an effective state of its own and behaves autonomously. The
experiments here check the statistical consequences: conditional
position statistics inside environment bins, the law-of-large-numbers
behaviour of ensemble frequencies, and the trade-off between preparation
width and the spread of late-time velocities.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom, norm

from ..errors import ConfigurationError, DegenerateSliceError, DomainError
from ..grids import ComplexField, Grid
from ..parallel import get_shared, map_units, shared_state
from ..reporting import DataTable, ExperimentReport, MetricResult
from ..rng import RngStream
from ..sampling import sample_from_density
from ..stats import Z99, l1_sampling_noise, verdict_from_counts, wilson_interval
from .guidance import advance_trajectory, propagate_history
from .waves import WaveFunction, free_gaussian, gaussian_spread_sigma

SEED_BLOCK = 25
SAMPLE_BLOCK = 16384


@dataclass(frozen=True)
class SplitConfiguration:
    """A full configuration split into subsystem and environment parts."""

    x: float
    y: float

    def as_pair(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class ConditionalWaveFunction:
    """The x-profile of the full state at a fixed environment value.

    ``values`` is the raw slice (linearly interpolated between the two
    bracketing environment grid lines); ``slice_norm`` is its squared
    L2 norm over x, so ``normalized()`` recovers a unit-norm profile.
    """

    grid: Grid
    values: np.ndarray
    y_value: float
    slice_norm: float
    time: float = 0.0

    def normalized(self) -> np.ndarray:
        return self.values / np.sqrt(self.slice_norm)


def _require_2d(wf: WaveFunction) -> None:
    if wf.grid.dimension != 2:
        raise ConfigurationError("this operation needs a 2D wave function")


def _slice_values(grid: Grid, values: np.ndarray, y: float) -> np.ndarray:
    yi = np.mod(y, grid.length) / grid.dx
    j0 = int(yi) % grid.points
    j1 = (j0 + 1) % grid.points
    w = yi - np.floor(yi)
    return (1.0 - w) * values[:, j0] + w * values[:, j1]


def environment_marginal(wf: WaveFunction) -> np.ndarray:
    """Mass of each environment grid line: integral over x of the density."""
    _require_2d(wf)
    return np.sum(np.abs(wf.values) ** 2, axis=0) * wf.grid.dx


def conditional_wavefunction(
    wf: WaveFunction, y: float, degenerate_tol: float = 1e-10
) -> ConditionalWaveFunction:
    """Slice the full state at environment value ``y``.

    Raises :class:`DegenerateSliceError` when the slice norm falls below
    ``degenerate_tol`` of the largest environment-line mass, which happens
    when ``y`` sits in a region the environment density never visits.
    """
    _require_2d(wf)
    values = _slice_values(wf.grid, wf.values, y)
    slice_norm = float(np.sum(np.abs(values) ** 2) * wf.grid.dx)
    peak = float(environment_marginal(wf).max())
    if slice_norm < degenerate_tol * peak:
        raise DegenerateSliceError(
            f"slice norm {slice_norm:.3e} at y={y} is below {degenerate_tol:.1e} of the peak"
        )
    return ConditionalWaveFunction(
        grid=wf.grid, values=values, y_value=float(y), slice_norm=slice_norm, time=wf.time
    )


@dataclass(frozen=True)
class EffectiveDecomposition:
    """Result of testing whether the subsystem owns its own wave function.

    ``score`` is the worst normalized overlap between the slice at the
    actual environment value and the slices at neighbouring values;
    ``detected`` requires the score to beat ``1 - tol_eff`` and the
    residual mass at the actual value to stay below ``tol_res``.
    """

    phi: np.ndarray | None
    chi: np.ndarray | None
    score: float
    detected: bool
    undecidable: bool
    residual_mass: float
    residual_at_y: float
    n_neighbors: int
    coupling_magnitude: float | None = None


def _anova_coupling(wf: WaveFunction, phi: np.ndarray, chi: np.ndarray) -> float:
    """Weighted size of the part of the potential that couples x and y."""
    px = np.abs(phi) ** 2 * wf.grid.dx
    py = np.abs(chi) ** 2 * wf.grid.dx
    py = py / py.sum() if py.sum() > 0 else py
    px = px / px.sum() if px.sum() > 0 else px
    v = wf.potential
    vbar = float(px @ v @ py)
    vx = v @ py - vbar
    vy = px @ v - vbar
    v_int = v - vbar - vx[:, None] - vy[None, :]
    return float(np.sqrt(px @ (v_int**2) @ py))


def detect_effective_wavefunction(
    wf: WaveFunction,
    y: float,
    radius: int = 5,
    tol_eff: float = 1e-3,
    tol_res: float = 1e-6,
    degenerate_tol: float = 1e-10,
) -> EffectiveDecomposition:
    """Decide whether the slice at ``y`` acts as an autonomous state.

    Every non-degenerate environment line within ``radius`` grid cells of
    ``y`` is sliced and normalized; the score is the smallest overlap with
    the central slice. On detection the subsystem profile is the central
    slice and the environment profile is the per-line projection of the
    full state onto it.
    """
    _require_2d(wf)
    center = conditional_wavefunction(wf, y, degenerate_tol)
    phi = center.normalized()
    grid = wf.grid

    marg = environment_marginal(wf)
    peak_line = float(marg.max())
    j_center = int(round(np.mod(y, grid.length) / grid.dx))
    overlaps = []
    used = 0
    for off in range(-radius, radius + 1):
        if off == 0:
            continue  # the reference slice overlaps itself trivially
        j = (j_center + off) % grid.points
        line = wf.values[:, j]
        line_norm = float(np.sum(np.abs(line) ** 2) * grid.dx)
        if line_norm < degenerate_tol * peak_line:
            continue
        psi_j = line / np.sqrt(line_norm)
        overlaps.append(abs(np.sum(np.conj(psi_j) * phi) * grid.dx))
        used += 1
    if used == 0:
        return EffectiveDecomposition(
            phi=None,
            chi=None,
            score=0.0,
            detected=False,
            undecidable=True,
            residual_mass=1.0,
            residual_at_y=1.0,
            n_neighbors=0,
        )

    score = float(min(overlaps))
    chi = (np.conj(phi) @ wf.values) * grid.dx  # projection per environment line
    residual = wf.values - np.outer(phi, chi)
    residual_mass = float(np.sum(np.abs(residual) ** 2) * grid.cell_volume)
    res_slice = _slice_values(grid, residual, y)
    res_at_y = float(np.sum(np.abs(res_slice) ** 2) * grid.dx) / center.slice_norm
    detected = score > 1.0 - tol_eff and res_at_y < tol_res
    return EffectiveDecomposition(
        phi=phi,
        chi=chi,
        score=score,
        detected=detected,
        undecidable=False,
        residual_mass=residual_mass,
        residual_at_y=res_at_y,
        n_neighbors=used,
        coupling_magnitude=_anova_coupling(wf, phi, chi),
    )


def product_state(
    grid: Grid,
    phi_sigma: float = 1.0,
    chi_sigma: float = 1.0,
    phi_momentum: float = 0.0,
    potential: np.ndarray | None = None,
    masses: tuple[float, float] = (1.0, 1.0),
    hbar: float = 1.0,
) -> WaveFunction:
    """Gaussian product of a subsystem profile and an environment profile."""
    if grid.dimension != 2:
        raise ConfigurationError("product_state builds 2D states")
    c = grid.length / 2
    x = grid.axis()
    fx = np.exp(-((x - c) ** 2) / (4 * phi_sigma**2) + 1j * phi_momentum * (x - c) / hbar)
    fy = np.exp(-((x - c) ** 2) / (4 * chi_sigma**2))
    values = np.outer(fx, fy)
    v = np.zeros(grid.shape) if potential is None else potential
    return WaveFunction(
        field=ComplexField(grid, _normalize2(values, grid)),
        potential=v,
        hbar=hbar,
        masses=masses,
    )


def two_branch_state(
    grid: Grid,
    separation: float,
    x_offsets: tuple[float, float] = (-1.0, 1.0),
    widths: float = 0.5,
    weights: tuple[float, float] = (1.0, 1.0),
    masses: tuple[float, float] = (1.0, 1.0),
    hbar: float = 1.0,
) -> WaveFunction:
    """Two product branches whose environment profiles sit far apart in y."""
    if grid.dimension != 2:
        raise ConfigurationError("two_branch_state builds 2D states")
    c = grid.length / 2
    x = grid.axis()
    s = widths
    phi1 = np.exp(-((x - c - x_offsets[0]) ** 2) / (4 * s**2))
    phi2 = np.exp(-((x - c - x_offsets[1]) ** 2) / (4 * s**2))
    chi1 = np.exp(-((x - c + separation / 2) ** 2) / (4 * s**2))
    chi2 = np.exp(-((x - c - separation / 2) ** 2) / (4 * s**2))
    values = weights[0] * np.outer(phi1, chi1) + weights[1] * np.outer(phi2, chi2)
    return WaveFunction(
        field=ComplexField(grid, _normalize2(values, grid)),
        potential=np.zeros(grid.shape),
        hbar=hbar,
        masses=masses,
    )


def correlated_gaussian_state(
    grid: Grid,
    s: float,
    big_s: float,
    masses: tuple[float, float] = (1.0, 1.0),
    hbar: float = 1.0,
) -> WaveFunction:
    """Entangled Gaussian: tight in (x - y), loose in (x + y).

    Small ``s / big_s`` means strong correlation between subsystem and
    environment; slices at different environment values are then visibly
    different profiles.
    """
    if grid.dimension != 2:
        raise ConfigurationError("correlated_gaussian_state builds 2D states")
    if s <= 0 or big_s <= 0:
        raise ConfigurationError("widths must be positive")
    c = grid.length / 2
    x, y = grid.meshgrid()
    u, w = x - c, y - c
    values = np.exp(-((u - w) ** 2) / (4 * s**2) - ((u + w) ** 2) / (4 * big_s**2))
    return WaveFunction(
        field=ComplexField(grid, _normalize2(values, grid)),
        potential=np.zeros(grid.shape),
        hbar=hbar,
        masses=masses,
    )


def _normalize2(values: np.ndarray, grid: Grid) -> np.ndarray:
    norm = np.sqrt(np.sum(np.abs(values) ** 2) * grid.cell_volume)
    if norm == 0:
        raise ConfigurationError("cannot normalize a zero field")
    return values / norm


def _cell_aligned_edges(grid: Grid, lo: float, hi: float, n_bins: int) -> np.ndarray:
    """Bin edges snapped to cell boundaries so cell masses map to bins exactly."""
    dx = grid.dx
    lo_idx = int(np.floor((lo + dx / 2) / dx))
    hi_idx = int(np.ceil((hi + dx / 2) / dx))
    span = max(hi_idx - lo_idx, n_bins)
    per = max(1, int(round(span / n_bins)))
    hi_idx = lo_idx + per * n_bins
    return (lo_idx + np.arange(n_bins + 1) * per) * dx - dx / 2


def conditional_born_statistics(
    wf: WaveFunction,
    n_samples: int,
    rng: RngStream,
    y_bins: int = 16,
    x_bins: int = 32,
    span_sigmas: float = 4.0,
    min_count: int = 2000,
    workers: int = 1,
    tolerances: dict | None = None,
) -> ExperimentReport:
    """Position statistics inside environment bins against sliced targets.

    Full configurations are drawn from the joint density; within every
    environment bin the empirical subsystem histogram is compared to the
    exact conditional density of that bin (mass-weighted average of the
    grid-line slices). Bins with fewer than ``min_count`` draws are
    excluded from the pass metric and listed.
    """
    t0 = time.perf_counter()
    _require_2d(wf)
    grid = wf.grid
    density = wf.density()

    marg_y = density.sum(axis=0)
    marg_x = density.sum(axis=1)
    axis = grid.axis()

    def span(marginal: np.ndarray) -> tuple[float, float]:
        p = marginal / marginal.sum()
        mean = float(p @ axis)
        sd = float(np.sqrt(p @ (axis - mean) ** 2))
        return mean - span_sigmas * sd, mean + span_sigmas * sd

    y_edges = _cell_aligned_edges(grid, *span(marg_y), y_bins)
    x_edges = _cell_aligned_edges(grid, *span(marg_x), x_bins)

    units = []
    for start in range(0, n_samples, SAMPLE_BLOCK):
        count = min(SAMPLE_BLOCK, n_samples - start)
        units.append((rng.child(start // SAMPLE_BLOCK), count))
    with shared_state((grid, density)):
        blocks = map_units(_born_sampling_unit, units, workers)
    samples = np.concatenate(blocks, axis=0)

    # Assign cells to y-bins once; a sample inherits its cell's bin because
    # edges are snapped to cell boundaries.
    cell_bin = np.searchsorted(y_edges, axis, side="right") - 1

    x_cell_centers = axis
    x_cell_bin = np.searchsorted(x_edges, x_cell_centers, side="right") - 1
    in_x = (x_cell_bin >= 0) & (x_cell_bin < x_bins)

    sample_bin = np.searchsorted(y_edges, samples[:, 1], side="right") - 1
    rows = []
    excluded = []
    stats_per_bin = []  # (l1, noise_mean, noise_sd)
    for b in range(y_bins):
        members = samples[sample_bin == b]
        count = members.shape[0]
        cells = np.nonzero(cell_bin == b)[0]
        target_xy = density[:, cells].sum(axis=1)
        target_mass = np.zeros(x_bins)
        np.add.at(target_mass, x_cell_bin[in_x], target_xy[in_x])
        if target_mass.sum() <= 0 or count < min_count:
            excluded.append(b)
            rows.append([b, float(y_edges[b]), float(y_edges[b + 1]), count, np.nan, np.nan, False])
            continue
        target_mass = target_mass / target_mass.sum()
        inside = (members[:, 0] >= x_edges[0]) & (members[:, 0] <= x_edges[-1])
        counts, _ = np.histogram(members[inside, 0], bins=x_edges)
        empirical = counts / counts.sum()
        l1 = float(np.sum(np.abs(empirical - target_mass)))
        noise_mean, noise_sd = l1_sampling_noise(target_mass, int(counts.sum()))
        stats_per_bin.append((l1, noise_mean, noise_sd))
        rows.append(
            [b, float(y_edges[b]), float(y_edges[b + 1]), count, l1, noise_mean + Z99 * noise_sd, True]
        )

    l1_values = [s[0] for s in stats_per_bin]
    max_l1 = max(l1_values) if l1_values else float("nan")
    # Family-wise 99% noise quantile: the max over n bins needs a per-bin
    # level of 1 - 0.01/n to keep the overall false-alarm rate at 1%.
    z_fam = float(norm.ppf(1.0 - 0.01 / max(len(stats_per_bin), 1)))
    noise_ratios = [l1 / (m + z_fam * sd) for l1, m, sd in stats_per_bin]
    tol = 0.1 if tolerances is None else float(tolerances.get("max_bin_l1", 0.1))
    metrics = [
        MetricResult(
            name="max_bin_l1",
            value=max_l1,
            target=0.0,
            tolerance=tol,
            passed=bool(l1_values) and max_l1 < tol,
            note=f"worst included-bin distance over {len(l1_values)} bins with >= {min_count} draws",
        ),
        MetricResult(
            name="bins_within_noise",
            value=max(noise_ratios) if noise_ratios else float("nan"),
            target=None,
            tolerance=1.0,
            passed=bool(noise_ratios) and max(noise_ratios) <= 1.0,
            note="worst bin distance relative to the family-wise 99% sampling-noise quantile",
        ),
        MetricResult(
            name="included_bins",
            value=float(len(l1_values)),
            target=None,
            tolerance=None,
            passed=len(l1_values) >= min(4, y_bins),
            note="bins meeting the minimum count; excluded bins are listed in the flags",
        ),
    ]

    tables = [
        DataTable(
            name="bins",
            columns=["bin", "y_lo", "y_hi", "count", "l1", "noise_q99", "included"],
            rows=rows,
            note="per-environment-bin distance between sampled and sliced subsystem densities",
        )
    ]

    return ExperimentReport(
        experiment="conditional-born",
        config={
            "grid_points": grid.points,
            "grid_length": grid.length,
            "n_samples": n_samples,
            "y_bins": y_bins,
            "x_bins": x_bins,
            "span_sigmas": span_sigmas,
            "min_count": min_count,
            "seed": rng.seed,
            "stream": rng.stream,
            "workers": workers,
        },
        metrics=metrics,
        flags={"excluded_bins": excluded},
        tables=tables,
        wall_time=time.perf_counter() - t0,
    )


def _born_sampling_unit(args) -> np.ndarray:
    stream, count = args
    grid, density = get_shared()
    return sample_from_density(grid, density, count, stream)


def interval_mass_1d(grid: Grid, density: np.ndarray, a: float, b: float) -> float:
    """Exact mass the cell-jittered sampling law assigns to [a, b].

    Cells are centered on grid points; the first cell wraps around the
    box edge and both of its pieces are accounted for.
    """
    if grid.dimension != 1:
        raise ConfigurationError("interval_mass_1d works on 1D grids")
    if not (0.0 <= a < b <= grid.length):
        raise DomainError("need 0 <= a < b <= length")
    rho = np.asarray(density, dtype=float)
    total = rho.sum()
    if total <= 0:
        raise DomainError("density has no mass")
    p = rho / total
    dx = grid.dx
    x = grid.axis()
    lo = x - dx / 2
    hi = x + dx / 2
    overlap = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, dx)
    # wrapped upper piece of cell 0: [length - dx/2, length)
    overlap[0] += np.clip(min(grid.length, b) - max(grid.length - dx / 2, a), 0.0, dx / 2)
    return float(np.sum(p * overlap / dx))


def binomial_deviation_bounds(m: int, p: float, eps: float) -> tuple[int, int]:
    """Count bounds [lo, hi] of the non-deviating event |K/m - p| <= eps.

    Both the empirical indicator and the exact tail probability use these
    integers, so boundary ties are treated identically on both routes.
    """
    lo = int(np.ceil(m * (p - eps) - 1e-9))
    hi = int(np.floor(m * (p + eps) + 1e-9))
    return max(lo, 0), min(hi, m)


def binomial_deviation_tail(m: int, p: float, eps: float) -> float:
    """Exact probability that the frequency deviates by more than eps."""
    lo, hi = binomial_deviation_bounds(m, p, eps)
    return float(binom.cdf(lo - 1, m, p) + binom.sf(hi, m, p))


def _born_lln_unit(args) -> list[tuple[bool, float]]:
    streams, m, lo, hi, a, b = args
    grid, density = get_shared()
    out = []
    for stream in streams:
        x = sample_from_density(grid, density, m, stream)
        k = int(np.count_nonzero((x >= a) & (x <= b)))
        out.append((bool(k < lo or k > hi), k / m))
    return out


def born_lln_experiment(
    phi: WaveFunction,
    ladder: list[int],
    region: tuple[float, float],
    epsilon: float,
    n_seeds: int,
    rng: RngStream,
    workers: int = 1,
    tau: float = 0.01,
    tolerances: dict | None = None,
) -> ExperimentReport:
    """Frequency concentration for ensembles of identically prepared subsystems.

    The M-subsystem state is an exact product of one-subsystem states, so
    the joint draw factorizes into M independent draws from the single
    profile density; that factorization is used directly instead of
    gridding an M-dimensional state. The estimated deviation measure is
    compared against the exact binomial tail at every ladder point.
    """
    t0 = time.perf_counter()
    if phi.grid.dimension != 1:
        raise ConfigurationError("the prepared profile must be 1D")
    ladder = [int(m) for m in ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigurationError("ladder sizes must be strictly increasing")
    a, b = float(region[0]), float(region[1])
    density = phi.density()
    p_target = interval_mass_1d(phi.grid, density, a, b)

    units = []
    for li, m in enumerate(ladder):
        lo, hi = binomial_deviation_bounds(m, p_target, epsilon)
        for start in range(0, n_seeds, SEED_BLOCK):
            streams = [
                rng.child(li * n_seeds + k) for k in range(start, min(start + SEED_BLOCK, n_seeds))
            ]
            units.append((streams, m, lo, hi, a, b))
    with shared_state((phi.grid, density)):
        results = map_units(_born_lln_unit, units, workers)

    rows = []
    oracle_ok = True
    worst_gap = 0.0
    measures = []
    idx = 0
    for li, m in enumerate(ladder):
        flat: list[tuple[bool, float]] = []
        for start in range(0, n_seeds, SEED_BLOCK):
            flat.extend(results[idx])
            idx += 1
        deviations = sum(1 for dev, _ in flat if dev)
        freqs = [f for _, f in flat]
        verdict = verdict_from_counts(deviations, n_seeds, tau)
        ci_lo, ci_hi = wilson_interval(deviations, n_seeds)
        oracle = binomial_deviation_tail(m, p_target, epsilon)
        contained = ci_lo <= oracle <= ci_hi
        oracle_ok &= contained
        worst_gap = max(worst_gap, abs(verdict.measure - oracle))
        measures.append(verdict.measure)
        rows.append(
            [
                m,
                n_seeds,
                deviations,
                verdict.measure,
                ci_lo,
                ci_hi,
                oracle,
                contained,
                float(np.mean(freqs)),
                p_target,
            ]
        )

    non_increasing = all(
        b2 < a2 or (a2 == b2 == 0.0) or b2 <= a2 for a2, b2 in zip(measures, measures[1:])
    )
    metrics = [
        MetricResult(
            name="oracle_within_ci",
            value=worst_gap,
            target=0.0,
            tolerance=None,
            passed=oracle_ok,
            note="exact binomial tail inside the Wilson interval at every ladder point",
        ),
        MetricResult(
            name="ladder_non_increasing",
            value=0.0 if non_increasing else 1.0,
            target=0.0,
            tolerance=0.0,
            passed=non_increasing,
            note="estimated deviation measure does not grow with the ensemble size",
        ),
    ]

    tables = [
        DataTable(
            name="ladder",
            columns=[
                "m",
                "n_seeds",
                "deviations",
                "measure",
                "ci_low",
                "ci_high",
                "binomial_tail",
                "oracle_in_ci",
                "mean_frequency",
                "target_mass",
            ],
            rows=rows,
            note="deviation-set measure of ensemble frequencies vs the exact binomial tail",
        )
    ]

    return ExperimentReport(
        experiment="born-lln",
        config={
            "grid_points": phi.grid.points,
            "grid_length": phi.grid.length,
            "ladder": ladder,
            "region": [a, b],
            "epsilon": epsilon,
            "n_seeds": n_seeds,
            "target_mass": p_target,
            "seed": rng.seed,
            "stream": rng.stream,
            "workers": workers,
            "tau": tau,
        },
        metrics=metrics,
        flags={},
        tables=tables,
        wall_time=time.perf_counter() - t0,
    )


def _uncertainty_unit(args) -> np.ndarray:
    q0_chunk, t_checkpoints, dt = args
    history = get_shared()
    bundle = advance_trajectory(
        history, q0_chunk, t_checkpoints[-1], dt, record_times=t_checkpoints
    )
    return bundle.positions


def absolute_uncertainty_experiment(
    sigma_ladder: list[float],
    n_samples: int,
    rng: RngStream,
    t_factor: float = 40.0,
    grid_points: int = 4096,
    box_sigmas: float = 480.0,
    frames_per_spread: int = 40,
    steps_per_spread: int = 50,
    hbar: float = 1.0,
    mass: float = 1.0,
    workers: int = 1,
    tolerances: dict | None = None,
) -> ExperimentReport:
    """Preparation width against the spread of late-time velocities.

    For every preparation width the ensemble starts from the profile
    density of a free Gaussian, trajectories run far into the spreading
    regime, and the late-time velocity of each sample is estimated by
    differencing positions between half time and final time. Narrower
    preparation gives proportionally wider velocity spread; the product
    of initial position spread, mass and velocity spread is compared to
    hbar over two.
    """
    t0 = time.perf_counter()
    sigma_ladder = [float(s) for s in sigma_ladder]
    if any(s <= 0 for s in sigma_ladder):
        raise ConfigurationError("preparation widths must be positive")

    rows = []
    dv_values = []
    product_devs = []
    spread_devs = []
    flags: dict = {}
    for si, sigma0 in enumerate(sigma_ladder):
        t_spread = 2.0 * mass * sigma0**2 / hbar
        t_final = t_factor * t_spread
        grid = Grid(1, grid_points, box_sigmas * sigma0)
        wf = free_gaussian(grid, sigma0, hbar=hbar, mass=mass)

        frame_dt = t_spread / frames_per_spread
        n_frames_steps = int(round(t_factor * frames_per_spread))
        history = propagate_history(wf, frame_dt, n_frames_steps, 1)
        history.build_velocity_cache()

        traj_dt = t_spread / steps_per_spread
        n_traj = int(round(t_factor * steps_per_spread))
        t_mid = (n_traj // 2) * traj_dt
        checkpoints = np.array([0.0, t_mid, n_traj * traj_dt])

        x0 = sample_from_density(grid, wf.density(), n_samples, rng.child(si))
        units = []
        for start in range(0, n_samples, SAMPLE_BLOCK):
            units.append((x0[start : start + SAMPLE_BLOCK], checkpoints, traj_dt))
        with shared_state(history):
            blocks = map_units(_uncertainty_unit, units, workers)
        positions = np.concatenate(blocks, axis=1)

        dx0 = float(np.std(positions[0]))
        v_late = (positions[2] - positions[1]) / (checkpoints[2] - checkpoints[1])
        dv = float(np.std(v_late))
        dv_values.append(dv)
        product = dx0 * mass * dv
        product_dev = abs(product / (hbar / 2.0) - 1.0)
        product_devs.append(product_dev)

        sigma_tf = gaussian_spread_sigma(float(checkpoints[2]), sigma0, hbar, mass)
        center = grid.length / 2
        spread_tf = float(np.std(positions[2] - center))
        spread_dev = abs(spread_tf / sigma_tf - 1.0)
        spread_devs.append(spread_dev)

        if sigma_tf / sigma0 < 5.0:
            flags[f"short_run_sigma{si}"] = (
                f"spreading factor {sigma_tf / sigma0:.2f} < 5; velocities not asymptotic"
            )

        rows.append(
            [
                sigma0,
                dx0,
                dv,
                product,
                product_dev,
                spread_tf,
                sigma_tf,
                spread_dev,
                float(t_final),
            ]
        )

    ratios = [dv_values[i + 1] / dv_values[i] for i in range(len(dv_values) - 1)]
    expected_ratios = [
        sigma_ladder[i] / sigma_ladder[i + 1] for i in range(len(sigma_ladder) - 1)
    ]
    ratio_devs = [abs(r - e) for r, e in zip(ratios, expected_ratios)]

    prod_tol = 0.02 if tolerances is None else float(tolerances.get("uncertainty_product", 0.02))
    ratio_tol = 0.05 if tolerances is None else float(tolerances.get("dv_ratio", 0.05))
    spread_tol = 0.01 if tolerances is None else float(tolerances.get("final_spread", 0.01))
    metrics = [
        MetricResult(
            name="uncertainty_product",
            value=max(product_devs),
            target=0.0,
            tolerance=prod_tol,
            passed=max(product_devs) < prod_tol,
            note="worst relative deviation of spread(x0) * m * spread(v) from hbar/2",
        ),
        MetricResult(
            name="dv_ratio",
            value=max(ratio_devs) if ratio_devs else 0.0,
            target=0.0,
            tolerance=ratio_tol,
            passed=not ratio_devs or max(ratio_devs) < ratio_tol,
            note="velocity-spread ratio between adjacent ladder points vs the width ratio",
        ),
        MetricResult(
            name="final_spread",
            value=max(spread_devs),
            target=0.0,
            tolerance=spread_tol,
            passed=max(spread_devs) < spread_tol,
            note="measured position spread at the final time vs the spreading law",
        ),
    ]

    tables = [
        DataTable(
            name="ladder",
            columns=[
                "sigma0",
                "dx0",
                "dv",
                "product",
                "product_rel_dev",
                "spread_tf",
                "sigma_tf",
                "spread_rel_dev",
                "t_final",
            ],
            rows=rows,
            note="velocity spread against preparation width for the freely spreading profile",
        )
    ]

    return ExperimentReport(
        experiment="absolute-uncertainty",
        config={
            "sigma_ladder": sigma_ladder,
            "n_samples": n_samples,
            "t_factor": t_factor,
            "grid_points": grid_points,
            "box_sigmas": box_sigmas,
            "frames_per_spread": frames_per_spread,
            "steps_per_spread": steps_per_spread,
            "hbar": hbar,
            "mass": mass,
            "seed": rng.seed,
            "stream": rng.stream,
            "workers": workers,
        },
        metrics=metrics,
        flags=flags,
        tables=tables,
        wall_time=time.perf_counter() - t0,
    )


def effective_detection_experiment(
    grid_points: int = 256,
    grid_length: float = 16.0,
    separation: float = 6.0,
    s_over_big_s_ladder: list[float] = (0.5, 0.25, 0.125),
    big_s: float = 2.0,
    radius: int = 5,
    tol_eff: float = 1e-3,
    seed: int = 0,
    tolerances: dict | None = None,
) -> ExperimentReport:
    """Detection scores on the three canonical states.

    A product state and a far-separated two-branch state must be detected
    with score essentially one; the correlated Gaussian must be rejected
    with a score that falls monotonically as the correlation tightens.
    Deterministic; the seed is recorded for config echo only.
    """
    t0 = time.perf_counter()
    grid = Grid(2, grid_points, grid_length)
    c = grid.length / 2

    prod = product_state(grid, phi_sigma=0.8, chi_sigma=0.8)
    d_prod = detect_effective_wavefunction(prod, c, radius=radius, tol_eff=tol_eff)

    branch = two_branch_state(grid, separation=separation)
    d_branch = detect_effective_wavefunction(branch, c - separation / 2, radius=radius, tol_eff=tol_eff)

    ladder_scores = []
    for ratio in s_over_big_s_ladder:
        corr = correlated_gaussian_state(grid, s=ratio * big_s, big_s=big_s)
        d = detect_effective_wavefunction(corr, c, radius=radius, tol_eff=tol_eff)
        ladder_scores.append((float(ratio), d.score, d.detected))

    scores = [s for _, s, _ in ladder_scores]
    monotone = all(b2 < a2 for a2, b2 in zip(scores, scores[1:]))

    score_tol = 0.999 if tolerances is None else float(tolerances.get("detect_score", 0.999))
    metrics = [
        MetricResult(
            name="product_detected",
            value=d_prod.score,
            target=1.0,
            tolerance=1.0 - score_tol,
            passed=d_prod.detected and d_prod.score > score_tol,
            note="exact product state",
        ),
        MetricResult(
            name="branch_detected",
            value=d_branch.score,
            target=1.0,
            tolerance=1.0 - score_tol,
            passed=d_branch.detected and d_branch.score > score_tol,
            note="two-branch state, environment deep inside one branch",
        ),
        MetricResult(
            name="correlated_scores_monotone",
            value=0.0 if monotone else 1.0,
            target=0.0,
            tolerance=0.0,
            passed=monotone,
            note="score falls as the correlation width ratio shrinks",
        ),
        MetricResult(
            name="correlated_not_detected",
            value=float(sum(1 for _, _, det in ladder_scores if det)),
            target=0.0,
            tolerance=0.0,
            passed=not any(det for _, _, det in ladder_scores),
            note="no correlated state may pass detection",
        ),
    ]

    tables = [
        DataTable(
            name="ladder",
            columns=["s_over_big_s", "score", "detected"],
            rows=[[r, s, d] for r, s, d in ladder_scores],
            note="detection score vs correlation width ratio",
        ),
        DataTable(
            name="cases",
            columns=["case", "score", "detected"],
            rows=[
                ["product", d_prod.score, d_prod.detected],
                ["two_branch", d_branch.score, d_branch.detected],
            ],
            note="detection outcomes for the canonical separable states",
        ),
    ]

    return ExperimentReport(
        experiment="effective-detect",
        config={
            "grid_points": grid_points,
            "grid_length": grid_length,
            "separation": separation,
            "s_over_big_s_ladder": list(s_over_big_s_ladder),
            "big_s": big_s,
            "radius": radius,
            "tol_eff": tol_eff,
            "seed": seed,
        },
        metrics=metrics,
        flags={},
        tables=tables,
        wall_time=time.perf_counter() - t0,
    )
