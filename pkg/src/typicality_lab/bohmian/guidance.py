"""Velocity fields, guided trajectories and stored propagation histories.

The guiding velocity is the imaginary part of the log-gradient of the
wave function, scaled by hbar over the axis mass. It is singular at
nodes, so velocity fields carry a validity mask: cells whose density
falls below a threshold of the peak get a floored denominator, a capped
magnitude and a mask bit. Trajectory integration is classic fourth-order
Runge-Kutta with bilinear interpolation in space and linear interpolation
in time between stored frames; steps that touch masked cells are retried
with halved substeps down to a floor, then accepted with the capped
velocity and counted as clamp events in the quality flags.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft as _fft

from ..errors import ConfigurationError, DomainError
from ..grids import ComplexField, Grid
from .waves import SplitStepPropagator, WaveFunction

_HISTORY_MAGIC = b"TLPSIH1\n"


@dataclass(frozen=True)
class VelocityField:
    """Guiding velocity on the grid with a validity mask near nodes."""

    grid: Grid
    components: np.ndarray  # (d, *shape), float
    mask: np.ndarray  # (*shape,), True where the density is below threshold

    def __post_init__(self):
        if self.components.shape != (self.grid.dimension,) + self.grid.shape:
            raise ConfigurationError("velocity components must be (d, *grid shape)")
        if self.mask.shape != self.grid.shape:
            raise ConfigurationError("mask must match the grid shape")


def _velocity_arrays(
    grid: Grid,
    values: np.ndarray,
    hbar: float,
    masses: tuple[float, ...],
    node_threshold: float,
    v_max: float,
) -> tuple[np.ndarray, np.ndarray]:
    density = np.abs(values) ** 2
    peak = density.max()
    if peak == 0.0:
        raise DomainError("cannot build a velocity field from a zero state")
    floor = node_threshold * peak
    mask = density < floor
    spec = _fft.fftn(values, norm="ortho")
    k = grid.wavenumbers()
    comps = np.empty((grid.dimension,) + grid.shape)
    denom = np.maximum(density, floor)
    for a in range(grid.dimension):
        if grid.dimension == 1:
            ka = k
        else:
            shape = [1, 1]
            shape[a] = grid.points
            ka = k.reshape(shape)
        grad = _fft.ifftn(1j * ka * spec, norm="ortho")
        comps[a] = (hbar / masses[a]) * np.imag(np.conj(values) * grad) / denom
    speed = np.sqrt(np.sum(comps**2, axis=0))
    over = speed > v_max
    if np.any(over):
        comps[:, over] *= v_max / speed[over]
    return comps, mask


def bohmian_velocity(
    wf: WaveFunction,
    node_threshold: float = 1e-10,
    v_max: float | None = None,
) -> VelocityField:
    """Guiding velocity field of a wave function.

    ``node_threshold`` is relative to the density peak; ``v_max`` defaults
    to a thousand box lengths per unit time, a guard that only engages at
    masked nodes.
    """
    if v_max is None:
        v_max = 1e3 * wf.grid.length
    comps, mask = _velocity_arrays(
        wf.grid, wf.values, wf.hbar, wf.masses, node_threshold, v_max
    )
    return VelocityField(grid=wf.grid, components=comps, mask=mask)


@dataclass
class FrameHistory:
    """Uniformly spaced wave-function frames plus cached velocity fields."""

    grid: Grid
    times: np.ndarray
    frames: np.ndarray  # (n_frames, *shape) complex
    hbar: float
    masses: tuple[float, ...]
    dt: float  # base propagation step
    frame_stride: int
    node_threshold: float = 1e-10
    v_max: float | None = None
    unit_system: str = "natural"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or self.times.size < 2:
            raise ConfigurationError("history needs at least two frames")
        spacings = np.diff(self.times)
        if not np.allclose(spacings, spacings[0], rtol=1e-9, atol=1e-12):
            raise ConfigurationError("frame times must be uniformly spaced")
        if self.frames.shape != (self.times.size,) + self.grid.shape:
            raise ConfigurationError("frames must be (n_frames, *grid shape)")
        if self.v_max is None:
            self.v_max = 1e3 * self.grid.length

    @property
    def spacing(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def velocity_frame(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        cached = self._cache.get(index)
        if cached is None:
            cached = _velocity_arrays(
                self.grid,
                self.frames[index],
                self.hbar,
                self.masses,
                self.node_threshold,
                self.v_max,
            )
            self._cache[index] = cached
        return cached

    def build_velocity_cache(self) -> None:
        """Precompute every frame's velocity field (worthwhile before forking)."""
        for i in range(self.times.size):
            self.velocity_frame(i)

    def density_at_frame(self, index: int) -> np.ndarray:
        return np.abs(self.frames[index]) ** 2

    def frame_index_at(self, t: float) -> int:
        """Index of the frame at time t, which must sit on the frame lattice."""
        s = (t - self.t_start) / self.spacing
        idx = int(round(s))
        if abs(s - idx) > 1e-6 or not 0 <= idx < self.times.size:
            raise ConfigurationError(f"t={t} does not lie on the stored frame lattice")
        return idx

    def _interp_spatial(
        self, comp_mask: tuple[np.ndarray, np.ndarray], q: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        comps, mask = comp_mask
        n = self.grid.points
        dx = self.grid.dx
        if self.grid.dimension == 1:
            xi = np.mod(q, self.grid.length) / dx
            i0 = xi.astype(np.int64) % n
            i1 = (i0 + 1) % n
            f = xi - np.floor(xi)
            v = (1.0 - f) * comps[0, i0] + f * comps[0, i1]
            touched = mask[i0] | mask[i1]
            return v[None, :], touched
        xi = np.mod(q[:, 0], self.grid.length) / dx
        yi = np.mod(q[:, 1], self.grid.length) / dx
        i0 = xi.astype(np.int64) % n
        j0 = yi.astype(np.int64) % n
        i1 = (i0 + 1) % n
        j1 = (j0 + 1) % n
        fx = (xi - np.floor(xi))[None, :]
        fy = (yi - np.floor(yi))[None, :]
        v = (
            comps[:, i0, j0] * (1 - fx) * (1 - fy)
            + comps[:, i1, j0] * fx * (1 - fy)
            + comps[:, i0, j1] * (1 - fx) * fy
            + comps[:, i1, j1] * fx * fy
        )
        touched = mask[i0, j0] | mask[i1, j0] | mask[i0, j1] | mask[i1, j1]
        return v, touched

    def velocity_at(self, q: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Interpolated velocity at sample points; also flags node contact.

        Returns (velocity, touched) where velocity has shape (d, n_samples)
        and touched marks samples whose interpolation stencil includes a
        masked cell in either bracketing frame.
        """
        s = (t - self.t_start) / self.spacing
        i = int(np.clip(np.floor(s + 1e-12), 0, self.times.size - 2))
        w = s - i
        if w < -1e-9 or w > 1.0 + 1e-9:
            raise ConfigurationError(f"t={t} lies outside the stored history")
        w = min(max(w, 0.0), 1.0)
        v0, touched0 = self._interp_spatial(self.velocity_frame(i), q)
        if w == 0.0:
            return v0, touched0
        v1, touched1 = self._interp_spatial(self.velocity_frame(i + 1), q)
        return (1.0 - w) * v0 + w * v1, touched0 | touched1


def propagate_history(
    wf: WaveFunction,
    dt: float,
    n_steps: int,
    frame_stride: int,
    node_threshold: float = 1e-10,
    v_max: float | None = None,
    dtype=np.complex128,
    check_aliasing: bool = True,
) -> FrameHistory:
    """Propagate and store every ``frame_stride``-th state as a history."""
    prop = SplitStepPropagator(wf, dt, dtype=dtype)
    _, times, frames = prop.evolve_collect(wf, n_steps, frame_stride, check_aliasing)
    return FrameHistory(
        grid=wf.grid,
        times=times,
        frames=frames,
        hbar=wf.hbar,
        masses=wf.masses,
        dt=dt,
        frame_stride=frame_stride,
        node_threshold=node_threshold,
        v_max=v_max,
    )


@dataclass
class QualityFlags:
    """Counters describing how cleanly an ensemble integration went."""

    sample_steps: int = 0
    refined_steps: int = 0
    clamp_events: int = 0
    wrap_events: int = 0

    @property
    def clamp_rate(self) -> float:
        return self.clamp_events / self.sample_steps if self.sample_steps else 0.0

    def as_dict(self) -> dict:
        return {
            "sample_steps": self.sample_steps,
            "refined_steps": self.refined_steps,
            "clamp_events": self.clamp_events,
            "wrap_events": self.wrap_events,
            "clamp_rate": self.clamp_rate,
        }


@dataclass
class TrajectoryBundle:
    """Recorded ensemble positions at the requested output times."""

    times: np.ndarray
    positions: np.ndarray  # (n_times, n_samples) or (n_times, n_samples, 2)
    flags: QualityFlags


@dataclass(frozen=True)
class BohmianEnsemble:
    """Sample configurations co-evolving with one wave function.

    ``configurations`` holds one configuration per row ((n,) on 1D grids,
    (n, 2) on 2D grids), every member evolved to the common ``time``.
    """

    configurations: np.ndarray
    wavefunction: WaveFunction
    time: float = 0.0

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.configurations, dtype=float))
        grid = self.wavefunction.grid
        if grid.dimension == 2 and (q.ndim != 2 or q.shape[1] != 2):
            raise ConfigurationError("2D ensembles need configurations of shape (n, 2)")
        if grid.dimension == 1 and q.ndim != 1:
            raise ConfigurationError("1D ensembles need configurations of shape (n,)")
        object.__setattr__(self, "configurations", grid.wrap(q))

    @property
    def size(self) -> int:
        return self.configurations.shape[0]

    @classmethod
    def sampled(cls, wf: WaveFunction, n: int, rng) -> "BohmianEnsemble":
        """Draw members from the squared amplitude of ``wf``."""
        from ..sampling import sample_from_density

        return cls(sample_from_density(wf.grid, wf.density(), n, rng), wf, wf.time)

    def advanced(self, history: "FrameHistory", t_final: float, dt: float) -> "BohmianEnsemble":
        """Advect every member along the guided flow to ``t_final``."""
        if abs(self.time - history.t_start) > 1e-9:
            raise ConfigurationError("ensemble time must match the history start")
        bundle = advance_trajectory(
            history, self.configurations, t_final, dt, record_times=[t_final]
        )
        idx = history.frame_index_at(t_final)
        wf_t = self.wavefunction.with_values(history.frames[idx], t_final)
        return BohmianEnsemble(bundle.positions[-1], wf_t, t_final)


def _rk4_step(
    history: FrameHistory, q: np.ndarray, t: float, dt: float
) -> tuple[np.ndarray, np.ndarray]:
    qv = q.T if q.ndim == 2 else q[None, :]
    k1, c1 = history.velocity_at(q, t)
    k2, c2 = history.velocity_at(_shift(q, qv, k1, 0.5 * dt), t + 0.5 * dt)
    k3, c3 = history.velocity_at(_shift(q, qv, k2, 0.5 * dt), t + 0.5 * dt)
    k4, c4 = history.velocity_at(_shift(q, qv, k3, dt), t + dt)
    new_qv = qv + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    new_q = new_qv.T if q.ndim == 2 else new_qv[0]
    return new_q, c1 | c2 | c3 | c4


def _shift(q: np.ndarray, qv: np.ndarray, k: np.ndarray, h: float) -> np.ndarray:
    out = qv + h * k
    return out.T if q.ndim == 2 else out[0]


def advance_trajectory(
    history: FrameHistory,
    q0: np.ndarray,
    t_final: float,
    dt: float,
    record_times: np.ndarray | None = None,
    dt_min_factor: int = 16,
) -> TrajectoryBundle:
    """Integrate the guided ensemble from the history start to ``t_final``.

    ``q0`` is an array of start positions, shape (n,) on 1D grids or
    (n, 2) on 2D grids. By default every step is recorded; pass
    ``record_times`` (multiples of dt from the history start) to keep
    only checkpoints. Positions are wrapped into the periodic box, with
    wraps counted in the flags.
    """
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    t0 = history.t_start
    n_steps = int(round((t_final - t0) / dt))
    if n_steps < 1 or abs(t0 + n_steps * dt - t_final) > 1e-9 * max(1.0, abs(t_final)):
        raise ConfigurationError("t_final must be a positive whole number of steps away")
    if t_final > history.t_end + 1e-9:
        raise ConfigurationError("t_final lies beyond the stored history")

    q = np.atleast_1d(np.asarray(q0, dtype=float))
    if history.grid.dimension == 2 and (q.ndim != 2 or q.shape[1] != 2):
        raise ConfigurationError("2D histories need start positions of shape (n, 2)")
    if history.grid.dimension == 1 and q.ndim != 1:
        raise ConfigurationError("1D histories need start positions of shape (n,)")
    q = history.grid.wrap(q)

    if record_times is None:
        record_steps = np.arange(n_steps + 1)
    else:
        record_steps = np.array(sorted(int(round((t - t0) / dt)) for t in record_times))
        wanted = t0 + record_steps * dt
        given = np.sort(np.asarray(record_times, dtype=float))
        if np.any(np.abs(wanted - given) > 1e-9) or record_steps.min() < 0 or record_steps.max() > n_steps:
            raise ConfigurationError("record times must be whole steps within the run")
    record_set = {int(s): j for j, s in enumerate(record_steps)}

    out = np.empty((len(record_steps),) + q.shape)
    flags = QualityFlags()
    if 0 in record_set:
        out[record_set[0]] = q

    n_samples = q.shape[0]
    for step in range(n_steps):
        t = t0 + step * dt
        q_new, touched = _rk4_step(history, q, t, dt)
        flags.sample_steps += n_samples
        if np.any(touched):
            idx = np.nonzero(touched)[0]
            flags.refined_steps += idx.size
            q_fix, clamped = _refine_touched(history, q, idx, t, dt, dt_min_factor)
            if history.grid.dimension == 1:
                q_new[idx] = q_fix
            else:
                q_new[idx, :] = q_fix
            flags.clamp_events += int(clamped)
        wrapped = history.grid.wrap(q_new)
        if history.grid.dimension == 1:
            flags.wrap_events += int(np.count_nonzero(wrapped != q_new))
        else:
            flags.wrap_events += int(np.count_nonzero(np.any(wrapped != q_new, axis=1)))
        q = wrapped
        if (step + 1) in record_set:
            out[record_set[step + 1]] = q

    return TrajectoryBundle(times=t0 + record_steps * dt, positions=out, flags=flags)


def _refine_touched(
    history: FrameHistory,
    q: np.ndarray,
    idx: np.ndarray,
    t: float,
    dt: float,
    dt_min_factor: int,
) -> tuple[np.ndarray, int]:
    """Redo one step for node-touching samples with progressively finer substeps."""
    sub = q[idx] if history.grid.dimension == 1 else q[idx, :]
    best = sub.copy()
    unresolved = np.arange(sub.shape[0])
    m = 2
    while unresolved.size and m <= dt_min_factor:
        trial = sub[unresolved] if history.grid.dimension == 1 else sub[unresolved, :]
        touched_any = np.zeros(unresolved.size, dtype=bool)
        h = dt / m
        for j in range(m):
            trial, touched = _rk4_step(history, trial, t + j * h, h)
            touched_any |= touched
        if history.grid.dimension == 1:
            best[unresolved] = trial
        else:
            best[unresolved, :] = trial
        unresolved = unresolved[touched_any]
        m *= 2
    # whatever still touches nodes at the finest substep was integrated with
    # the floored-and-capped velocity; report those samples as clamp events
    return best, int(unresolved.size)


def save_frame_history(history: FrameHistory, path: str | Path) -> None:
    """Persist a history: JSON header, then little-endian (re, im) doubles.

    Frames are written row-major, one (re, im) float64 pair per grid
    point, in frame order.
    """
    header = {
        "dimension": history.grid.dimension,
        "points": history.grid.points,
        "length": history.grid.length,
        "t_start": history.t_start,
        "dt": history.dt,
        "frame_stride": history.frame_stride,
        "n_frames": int(history.times.size),
        "hbar": history.hbar,
        "masses": list(history.masses),
        "node_threshold": history.node_threshold,
        "v_max": history.v_max,
        "unit_system": history.unit_system,
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HISTORY_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        pairs = np.empty(history.frames.shape + (2,), dtype="<f8")
        pairs[..., 0] = history.frames.real
        pairs[..., 1] = history.frames.imag
        fh.write(pairs.tobytes())


def load_frame_history(path: str | Path) -> FrameHistory:
    """Read a history written by :func:`save_frame_history`."""
    with open(path, "rb") as fh:
        magic = fh.read(len(_HISTORY_MAGIC))
        if magic != _HISTORY_MAGIC:
            raise ConfigurationError(f"{path} is not a stored propagation history")
        (blob_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(blob_len).decode("utf-8"))
        grid = Grid(header["dimension"], header["points"], header["length"])
        n_frames = header["n_frames"]
        raw = np.frombuffer(fh.read(), dtype="<f8")
    expected = n_frames * grid.size * 2
    if raw.size != expected:
        raise ConfigurationError(f"{path}: expected {expected} floats, found {raw.size}")
    pairs = raw.reshape((n_frames,) + grid.shape + (2,))
    frames = pairs[..., 0] + 1j * pairs[..., 1]
    spacing = header["dt"] * header["frame_stride"]
    times = header["t_start"] + np.arange(n_frames) * spacing
    return FrameHistory(
        grid=grid,
        times=times,
        frames=frames,
        hbar=header["hbar"],
        masses=tuple(header["masses"]),
        dt=header["dt"],
        frame_stride=header["frame_stride"],
        node_threshold=header["node_threshold"],
        v_max=header["v_max"],
        unit_system=header["unit_system"],
    )
