"""Subsystem states: slicing at the environment and detecting autonomy.

The 2D state carries a subsystem coordinate x and an environment
coordinate y. Slicing at the actual environment value gives the
subsystem's conditional profile. For a product state every slice is the
same profile; for a two-branch state the slice deep inside one branch is
that branch's profile; for a correlated Gaussian the slices keep changing
with y and no autonomous profile exists. The detector quantifies this
with the worst overlap between neighbouring slices.
"""

import numpy as np

from typicality_lab import Grid
from typicality_lab.bohmian import (
    conditional_wavefunction,
    correlated_gaussian_state,
    detect_effective_wavefunction,
    product_state,
    two_branch_state,
)

grid = Grid(2, 256, 16.0)
c = grid.length / 2

prod = product_state(grid, phi_sigma=0.9, chi_sigma=0.8)
slices = [conditional_wavefunction(prod, y).normalized() for y in (7.0, 8.0, 9.0)]
worst = min(
    abs(np.sum(np.conj(slices[0]) * s) * grid.dx) for s in slices[1:]
)
print(f"product state: slice overlap across environment values {worst:.12f}")
d = detect_effective_wavefunction(prod, c)
print(f"  detector: score {d.score:.6f}, detected {d.detected}")

branch = two_branch_state(grid, separation=6.0)
d1 = detect_effective_wavefunction(branch, c - 3.0)
print(f"two-branch state at branch 1: score {d1.score:.6f}, detected {d1.detected}")
print(f"  residual mass of the other branch at this slice: {d1.residual_at_y:.2e}")

print("correlated Gaussians: tighter correlation, lower score, never detected")
for ratio in (0.5, 0.25, 0.125):
    wf = correlated_gaussian_state(grid, s=ratio * 2.0, big_s=2.0)
    d = detect_effective_wavefunction(wf, c)
    print(f"  width ratio {ratio:>5}: score {d.score:.4f}, detected {d.detected}")
