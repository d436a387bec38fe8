"""Uniform periodic grids and complex fields with spectral transforms.

Grids discretize a periodic box ``[0, L)^d`` for ``d`` in {1, 2}. Points
along each axis sit at ``x_j = j * dx`` with ``dx = L / n``; the cell
owned by point ``j`` is ``[x_j - dx/2, x_j + dx/2)``, wrapped at the box
edge, so cell centers coincide with grid points. All transforms use the
orthonormal convention, which makes the forward transform an isometry of
the plain sum of squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .errors import ConfigurationError


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, length)^dimension``.

    Parameters
    ----------
    dimension : int
        1 or 2.
    points : int
        Points per axis; must be a power of two and at least 16.
    length : float
        Axis length of the periodic box.
    """

    dimension: int
    points: int
    length: float

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigurationError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.points < 16:
            raise ConfigurationError(f"grid needs at least 16 points per axis, got {self.points}")
        if not is_power_of_two(self.points):
            raise ConfigurationError(f"points per axis must be a power of two, got {self.points}")
        if not (self.length > 0 and np.isfinite(self.length)):
            raise ConfigurationError(f"axis length must be positive and finite, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.points

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dimension

    @property
    def size(self) -> int:
        return self.points**self.dimension

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dimension

    def axis(self) -> np.ndarray:
        """Coordinates of the grid points along one axis."""
        return np.arange(self.points) * self.dx

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays for every grid point ('ij' indexing)."""
        return tuple(np.meshgrid(*([self.axis()] * self.dimension), indexing="ij"))

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers along one axis, in FFT bin order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.dx)

    def wrap(self, x: np.ndarray) -> np.ndarray:
        """Map coordinates into the fundamental box ``[0, length)``."""
        return np.mod(x, self.length)


@dataclass(frozen=True)
class ComplexField:
    """Complex amplitudes attached to every point of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        if values.shape != self.grid.shape:
            raise ConfigurationError(
                f"field shape {values.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(values.view(float))):
            raise ConfigurationError("field amplitudes must be finite")

    def l2_norm(self) -> float:
        """Continuum-normalized L2 norm, sqrt(sum |v|^2 * cell volume)."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume))

    def density(self) -> np.ndarray:
        """Pointwise squared modulus."""
        return np.abs(self.values) ** 2


def dft_forward(field: ComplexField) -> ComplexField:
    """Orthonormal discrete Fourier transform of a field.

    The round trip with :func:`dft_inverse` is the identity up to round-off
    and the plain sum of squared moduli is preserved exactly in exact
    arithmetic.
    """
    if not is_power_of_two(field.grid.points):
        raise ConfigurationError("transform requires a power-of-two grid")
    return ComplexField(field.grid, _fft.fftn(field.values, norm="ortho"))


def dft_inverse(field: ComplexField) -> ComplexField:
    """Inverse of :func:`dft_forward`."""
    if not is_power_of_two(field.grid.points):
        raise ConfigurationError("transform requires a power-of-two grid")
    return ComplexField(field.grid, _fft.ifftn(field.values, norm="ortho"))
