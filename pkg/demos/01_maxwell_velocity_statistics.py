"""Velocity statistics of an ideal gas drawn from the constant-energy shell.

A gas of N non-interacting particles with total energy E = (3/2) N kT is
drawn exactly: positions uniform in the box, the momentum vector uniform
on the sphere of radius sqrt(2 m E). No dynamics is needed; the question
is purely statistical. For a single draw we look at the fraction of
particles whose x-velocity lies in [-1, 1] and compare it with the mass
the limiting Gaussian density assigns to that window, then watch the
measure of "seeds that deviate by more than epsilon" collapse as N grows.
"""

import numpy as np

from typicality_lab import RngStream
from typicality_lab.classical import (
    ThermalSpec,
    VelocityWindow,
    empirical_velocity_fraction,
    maxwell_lln_experiment,
    maxwell_target_fraction,
    sample_microcanonical_ideal_gas,
)

thermal = ThermalSpec(kT=1.0, mass=1.0)
window = VelocityWindow(-1.0, 1.0)
box = np.array([[0.0, 1.0]] * 3)

target = maxwell_target_fraction(window, thermal)
print(f"limiting in-window mass: {target:.6f}")

print("\none draw per size, fraction of particles with v_x in [-1, 1]:")
for n in (100, 1_000, 10_000, 100_000):
    gas = sample_microcanonical_ideal_gas(n, box, 1.0, 1.5 * n, RngStream(0, n))
    frac = empirical_velocity_fraction(gas, window, 1.0)
    print(f"  N = {n:>6}: fraction {frac:.4f}   |off by {abs(frac - target):.4f}|")

print("\nmeasure of seeds deviating by more than 0.02, 40 seeds per size:")
report = maxwell_lln_experiment(
    ladder=[100, 1_000, 10_000],
    window=window,
    thermal=thermal,
    epsilon=0.02,
    n_seeds=40,
    rng=RngStream(1),
)
for row in report.table("ladder").rows:
    print(
        f"  N = {row[0]:>6}: measure {row[3]:.3f} +- {row[4]:.3f}  -> {row[5]}"
    )
print("\nthe deviation set shrinks with N: macroscopic velocity statistics")
print("are a property of typical shell points, not of special preparation")
