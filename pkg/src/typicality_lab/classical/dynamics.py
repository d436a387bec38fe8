"""Hamiltonian point-particle systems and their phase-space structure.

The integrator is velocity Verlet. It is symplectic, so preservation of
phase-space volume is a structural property of the scheme rather than an
accident of small steps, and that is exactly what the volume check below
verifies by Monte Carlo. Backward flow is realized through momentum
reversal, which is an exact time-reversal for every system expressible
here (quadratic kinetic energy, position-dependent potentials).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigurationError, DomainError, IntegrationError, SingularityError
from ..rng import RngStream
from ..stats import wilson_interval

PAIR_KINDS = ("none", "inverse_distance", "harmonic")
EXTERNAL_KINDS = ("none", "uniform_gravity", "harmonic_trap", "hard_walls")


@dataclass(frozen=True)
class Microstate:
    """Positions and momenta of N particles in d spatial dimensions.

    Arrays are stored with shape (N, d); a 1D input is interpreted as a
    single particle.
    """

    positions: np.ndarray
    momenta: np.ndarray

    def __post_init__(self):
        q = np.atleast_2d(np.asarray(self.positions, dtype=float))
        p = np.atleast_2d(np.asarray(self.momenta, dtype=float))
        object.__setattr__(self, "positions", q)
        object.__setattr__(self, "momenta", p)
        if q.shape != p.shape:
            raise ConfigurationError(f"position shape {q.shape} != momentum shape {p.shape}")

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    def reversed(self) -> "Microstate":
        """Same positions, negated momenta."""
        return Microstate(self.positions, -self.momenta)


@dataclass(frozen=True)
class HamiltonianSystem:
    """Masses plus interaction and external-potential descriptors.

    ``pair`` selects the two-body term: 'none', 'inverse_distance'
    (V = -strength * m_i * m_j / r, attractive for positive strength) or
    'harmonic' (V = strength * r^2 / 2 per pair). ``external`` selects
    'none', 'uniform_gravity' (acceleration vector ``gravity``),
    'harmonic_trap' (stiffness and center) or 'hard_walls' (elastic
    reflection at ``box`` faces, no smooth force inside).
    """

    masses: np.ndarray
    pair: str = "none"
    pair_strength: float = 0.0
    external: str = "none"
    gravity: np.ndarray | None = None
    trap_stiffness: float = 0.0
    trap_center: np.ndarray | None = None
    box: np.ndarray | None = None

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.masses, dtype=float))
        object.__setattr__(self, "masses", m)
        if np.any(m <= 0):
            raise ConfigurationError("all masses must be positive")
        if self.pair not in PAIR_KINDS:
            raise ConfigurationError(f"unknown pair interaction {self.pair!r}")
        if self.external not in EXTERNAL_KINDS:
            raise ConfigurationError(f"unknown external potential {self.external!r}")
        if self.external == "uniform_gravity":
            if self.gravity is None:
                raise ConfigurationError("uniform_gravity requires a gravity vector")
            object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float))
        if self.external == "harmonic_trap" and self.trap_center is not None:
            object.__setattr__(self, "trap_center", np.asarray(self.trap_center, dtype=float))
        if self.external == "hard_walls":
            if self.box is None:
                raise ConfigurationError("hard_walls requires box extents")
            box = np.asarray(self.box, dtype=float)
            if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 1] <= box[:, 0]):
                raise ConfigurationError("box must be (d, 2) with lo < hi per axis")
            object.__setattr__(self, "box", box)

    def mass_column(self, state: Microstate) -> np.ndarray:
        m = self.masses
        if m.size == 1:
            return np.full((state.n_particles, 1), m[0])
        if m.size != state.n_particles:
            raise ConfigurationError(f"{m.size} masses for {state.n_particles} particles")
        return m[:, None]


@dataclass(frozen=True)
class EnergyShellSpec:
    """Total energy with a tolerance band for shell membership tests."""

    energy: float
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.tolerance < 0:
            raise ConfigurationError("tolerance must be non-negative")

    def contains(self, value: float) -> bool:
        return abs(value - self.energy) <= self.tolerance


def _pair_displacements(q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = q.shape[0]
    i, j = np.triu_indices(n, k=1)
    r = np.linalg.norm(q[i] - q[j], axis=1)
    return i, j, r


def _pair_energy(system: HamiltonianSystem, state: Microstate) -> float:
    if system.pair == "none" or state.n_particles < 2:
        return 0.0
    i, j, r = _pair_displacements(state.positions)
    m = system.mass_column(state)[:, 0]
    if system.pair == "inverse_distance":
        if np.any(r == 0.0):
            raise SingularityError("coincident particles under inverse-distance interaction")
        return float(np.sum(-system.pair_strength * m[i] * m[j] / r))
    return float(np.sum(0.5 * system.pair_strength * r**2))


def _external_energy(system: HamiltonianSystem, state: Microstate) -> float:
    q = state.positions
    m = system.mass_column(state)
    if system.external == "uniform_gravity":
        return float(-np.sum(m * q @ system.gravity))
    if system.external == "harmonic_trap":
        center = system.trap_center
        dq = q if center is None else q - center
        return float(0.5 * system.trap_stiffness * np.sum(dq**2))
    return 0.0


def hamiltonian_energy(system: HamiltonianSystem, state: Microstate) -> float:
    """Total energy: kinetic plus pair plus external terms."""
    m = system.mass_column(state)
    kinetic = float(np.sum(state.momenta**2 / (2.0 * m)))
    return kinetic + _pair_energy(system, state) + _external_energy(system, state)


def forces(system: HamiltonianSystem, state: Microstate) -> np.ndarray:
    """Force on every particle, shape (N, d)."""
    q = state.positions
    f = np.zeros_like(q)
    m = system.mass_column(state)
    if system.pair != "none" and state.n_particles >= 2:
        i, j, r = _pair_displacements(q)
        d = q[i] - q[j]
        if system.pair == "inverse_distance":
            if np.any(r == 0.0):
                raise SingularityError("coincident particles under inverse-distance interaction")
            # V = -G m_i m_j / r  =>  F_i = -G m_i m_j d / r^3 (attractive)
            coef = (-system.pair_strength * m[i, 0] * m[j, 0] / r**3)[:, None]
        else:
            coef = np.full((r.size, 1), -system.pair_strength)
        np.add.at(f, i, coef * d)
        np.add.at(f, j, -coef * d)
    if system.external == "uniform_gravity":
        f += m * system.gravity
    elif system.external == "harmonic_trap":
        center = system.trap_center
        dq = q if center is None else q - center
        f -= system.trap_stiffness * dq
    return f


def _reflect_into_box(q: np.ndarray, p: np.ndarray, box: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fold positions into the box by specular reflection, flipping momenta.

    Exact for force-free flight within the step, which is the only setting
    hard walls are combined with; repeated folding resolves multiple
    bounces inside one step.
    """
    q = q.copy()
    p = p.copy()
    lo = box[:, 0]
    width = box[:, 1] - box[:, 0]
    # Unfold onto the doubled interval, then mirror the upper half.
    rel = np.mod(q - lo, 2.0 * width)
    upper = rel > width
    rel = np.where(upper, 2.0 * width - rel, rel)
    odd_pass = np.floor_divide(q - lo, width).astype(np.int64) % 2 == 1
    p = np.where(odd_pass, -p, p)
    return lo + rel, p


def verlet_step(
    system: HamiltonianSystem,
    state: Microstate,
    dt: float,
    energy_guard: float | None = None,
) -> Microstate:
    """One velocity-Verlet update.

    With hard walls the free-flight crossing is resolved by exact specular
    folding inside the step. If ``energy_guard`` is given, a relative
    energy jump beyond that factor raises :class:`IntegrationError`.
    """
    if dt <= 0:
        raise ConfigurationError("dt must be positive; integrate backward via momentum reversal")
    m = system.mass_column(state)
    h_before = hamiltonian_energy(system, state) if energy_guard is not None else 0.0
    f = forces(system, state)
    p_half = state.momenta + 0.5 * dt * f
    q_new = state.positions + dt * p_half / m
    if system.external == "hard_walls":
        q_new, p_half = _reflect_into_box(q_new, p_half, system.box)
    trial = Microstate(q_new, p_half)
    p_new = p_half + 0.5 * dt * forces(system, trial)
    out = Microstate(q_new, p_new)
    if energy_guard is not None:
        h_after = hamiltonian_energy(system, out)
        if abs(h_after - h_before) > energy_guard * (abs(h_before) + 1e-12):
            raise IntegrationError(
                f"energy jumped from {h_before:.6g} to {h_after:.6g} in one step of dt={dt:g}"
            )
    return out


def integrate(
    system: HamiltonianSystem,
    state: Microstate,
    dt: float,
    n_steps: int,
    energy_guard: float | None = None,
) -> Microstate:
    """Advance ``n_steps`` Verlet steps and return the final state."""
    for _ in range(n_steps):
        state = verlet_step(system, state, dt, energy_guard)
    return state


def integrate_path(
    system: HamiltonianSystem,
    state: Microstate,
    dt: float,
    n_steps: int,
    energy_guard: float | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Advance and record every state; returns (times, positions, momenta)."""
    times = np.arange(n_steps + 1) * dt
    qs = np.empty((n_steps + 1,) + state.positions.shape)
    ps = np.empty_like(qs)
    qs[0], ps[0] = state.positions, state.momenta
    for k in range(n_steps):
        state = verlet_step(system, state, dt, energy_guard)
        qs[k + 1], ps[k + 1] = state.positions, state.momenta
    return times, qs, ps


def flow_backward(system: HamiltonianSystem, state: Microstate, dt: float, n_steps: int) -> Microstate:
    """Inverse flow via momentum reversal: R . flow_t . R."""
    return integrate(system, state.reversed(), dt, n_steps).reversed()


def sample_microcanonical_ideal_gas(
    n_particles: int,
    box: np.ndarray,
    mass: float,
    energy: float,
    rng: RngStream,
) -> Microstate:
    """Exact draw from the constant-energy ensemble of the ideal gas.

    Positions are independent and uniform in the box. The momentum vector
    is uniform on the sphere of radius sqrt(2 m E) in the full dN-dimensional
    momentum space, realized by normalizing a standard Gaussian draw, so
    every sample lies on the energy shell exactly.
    """
    if energy <= 0:
        raise DomainError("shell energy must be positive for the ideal gas")
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 1] <= box[:, 0]):
        raise ConfigurationError("box must be (d, 2) with lo < hi per axis")
    d = box.shape[0]
    gen = rng.generator()
    q = box[:, 0] + gen.random((n_particles, d)) * (box[:, 1] - box[:, 0])
    g = gen.standard_normal(n_particles * d)
    g /= np.linalg.norm(g)
    p = (np.sqrt(2.0 * mass * energy) * g).reshape(n_particles, d)
    return Microstate(q, p)


@dataclass(frozen=True)
class PhaseSpaceBox:
    """Product of coordinate intervals in single-particle phase space."""

    position_bounds: np.ndarray  # (d, 2)
    momentum_bounds: np.ndarray  # (d, 2)

    def __post_init__(self):
        for name in ("position_bounds", "momentum_bounds"):
            b = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, b)
            if b.shape[1] != 2 or np.any(b[:, 1] <= b[:, 0]):
                raise ConfigurationError(f"{name} must be (d, 2) with lo < hi")
        if self.position_bounds.shape != self.momentum_bounds.shape:
            raise ConfigurationError("position and momentum bounds must share a dimension")

    @property
    def dimension(self) -> int:
        return self.position_bounds.shape[0]

    @property
    def volume(self) -> float:
        widths = np.concatenate(
            [np.diff(self.position_bounds, axis=1), np.diff(self.momentum_bounds, axis=1)]
        )
        return float(np.prod(widths))

    def contains(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        ok = np.ones(q.shape[0], dtype=bool)
        for a in range(self.dimension):
            ok &= (q[:, a] >= self.position_bounds[a, 0]) & (q[:, a] <= self.position_bounds[a, 1])
            ok &= (p[:, a] >= self.momentum_bounds[a, 0]) & (p[:, a] <= self.momentum_bounds[a, 1])
        return ok

    def sample(self, n: int, gen: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        d = self.dimension
        u = gen.random((n, 2 * d))
        q = self.position_bounds[:, 0] + u[:, :d] * np.diff(self.position_bounds, axis=1)[:, 0]
        p = self.momentum_bounds[:, 0] + u[:, d:] * np.diff(self.momentum_bounds, axis=1)[:, 0]
        return q, p


@dataclass(frozen=True)
class LiouvilleResult:
    """Monte Carlo estimate of the volume ratio of a flowed region."""

    ratio: float
    ratio_low: float
    ratio_high: float
    image_volume: float
    region_volume: float
    sampling_volume: float
    hits: int
    n_samples: int

    @property
    def consistent_with_unity(self) -> bool:
        return self.ratio_low <= 1.0 <= self.ratio_high


def _as_ensemble_state(q: np.ndarray, p: np.ndarray) -> Microstate:
    # Independent single-particle samples evolve exactly like one system of
    # many non-interacting particles, so the whole cloud is advanced at once.
    return Microstate(q, p)


def liouville_volume_check(
    system: HamiltonianSystem,
    region: PhaseSpaceBox,
    t: float,
    n_samples: int,
    rng: RngStream,
    dt_max: float = 1e-3,
    pilot_samples: int = 4096,
    padding: float = 0.05,
) -> LiouvilleResult:
    """Estimate the phase-space volume of the flowed region over its own.

    A pilot cloud drawn inside the region is flowed forward to bound the
    image; the bounding box, padded, is then sampled uniformly and each
    point is flowed backward to test membership in the original region.
    The flow must stay smooth over [0, t], so this check excludes the
    inverse-distance interaction.
    """
    if system.pair == "inverse_distance":
        raise ConfigurationError("volume check requires a globally smooth flow")
    if t < 0:
        raise ConfigurationError("t must be non-negative")
    n_steps = max(1, int(np.ceil(t / dt_max)))
    dt = t / n_steps if t > 0 else dt_max

    gen_pilot = rng.child(0).generator()
    gen_main = rng.child(1).generator()

    q0, p0 = region.sample(pilot_samples, gen_pilot)
    if t > 0:
        fwd = integrate(system, _as_ensemble_state(q0, p0), dt, n_steps)
    else:
        fwd = _as_ensemble_state(q0, p0)
    d = region.dimension

    def padded_bounds(values: np.ndarray) -> np.ndarray:
        lo, hi = values.min(axis=0), values.max(axis=0)
        pad = padding * (hi - lo) + 1e-12
        return np.stack([lo - pad, hi + pad], axis=1)

    sampling_box = PhaseSpaceBox(padded_bounds(fwd.positions), padded_bounds(fwd.momenta))

    qs, ps = sampling_box.sample(n_samples, gen_main)
    if t > 0:
        back = flow_backward(system, _as_ensemble_state(qs, ps), dt, n_steps)
    else:
        back = _as_ensemble_state(qs, ps)
    hits = int(np.count_nonzero(region.contains(back.positions, back.momenta)))

    p_hat = hits / n_samples
    lo, hi = wilson_interval(hits, n_samples)
    scale = sampling_box.volume / region.volume
    return LiouvilleResult(
        ratio=p_hat * scale,
        ratio_low=lo * scale,
        ratio_high=hi * scale,
        image_volume=p_hat * sampling_box.volume,
        region_volume=region.volume,
        sampling_volume=sampling_box.volume,
        hits=hits,
        n_samples=n_samples,
    )
