"""The spectral split-step propagator and its structural guarantees.

Each step is kick(dt/2), spectral drift(dt), kick(dt/2), all unit-modulus
factors plus orthonormal transforms, so the update is unitary by
construction. Three checks: a stationary state stays put over a full
period, the free Gaussian follows the spreading law to machine accuracy,
and the norm budget over very long runs is pure floating-point rounding.
"""

import numpy as np

from typicality_lab import Grid
from typicality_lab.bohmian import (
    SplitStepPropagator,
    density_moments,
    free_gaussian,
    gaussian_spread_sigma,
    harmonic_eigenstate,
)

grid = Grid(1, 1024, 40.0)
period = 2 * np.pi

gs = harmonic_eigenstate(grid, 0)
out = SplitStepPropagator(gs, period / 4096).evolve(gs, 4096)
l1 = np.sum(np.abs(out.density() - gs.density())) * grid.dx
print(f"stationary state, one period: density L1 change {l1:.2e}")

fg = free_gaussian(grid, 1.0)
t_char = 2.0  # the time at which the width has grown by sqrt(2)
out = SplitStepPropagator(fg, t_char / 512).evolve(fg, 512)
_, var = density_moments(grid, out.density())
print(
    f"free Gaussian at t = {t_char}: width {np.sqrt(var):.12f}, "
    f"law {gaussian_spread_sigma(t_char, 1.0):.12f}"
)

sup = harmonic_eigenstate(grid, 0)
prop64 = SplitStepPropagator(sup, period / 4096)
out64 = prop64.evolve(sup, 20_000)
print(f"norm after 2e4 double-precision steps: 1 {out64.field.l2_norm() - 1.0:+.2e}")
prop_ld = SplitStepPropagator(sup, period / 4096, dtype=np.clongdouble)
out_ld = prop_ld.evolve(sup, 20_000)
print(f"norm after 2e4 extended-precision steps: 1 {out_ld.field.l2_norm() - 1.0:+.2e}")
print("drift is rounding noise, not leakage: the scheme itself is exactly unitary")
