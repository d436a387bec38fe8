"""Phase-space volume preservation under the symplectic flow.

A rectangle in the (q, p) plane of a harmonic oscillator is flowed for a
quarter period and a full period. The flow is a rotation, so the volume
cannot change; the Monte Carlo estimate of the flowed volume over the
original one should sit inside its confidence interval around 1. This is
the property that makes the uniform measure the natural yardstick for
"most initial conditions".
"""

import numpy as np

from typicality_lab import RngStream
from typicality_lab.classical import HamiltonianSystem, PhaseSpaceBox, liouville_volume_check

oscillator = HamiltonianSystem(
    masses=np.array([1.0]), external="harmonic_trap", trap_stiffness=1.0
)
region = PhaseSpaceBox(np.array([[0.3, 0.8]]), np.array([[0.3, 0.8]]))
period = 2 * np.pi

for label, t in (("quarter period", period / 4), ("full period", period)):
    res = liouville_volume_check(
        oscillator, region, t=t, n_samples=40_000, rng=RngStream(0), dt_max=2e-3
    )
    print(
        f"{label:>14}: volume ratio {res.ratio:.4f} "
        f"[{res.ratio_low:.4f}, {res.ratio_high:.4f}]  covers 1: {res.consistent_with_unity}"
    )

print("\nfree particle for contrast (pure shear, also volume preserving):")
free = HamiltonianSystem(masses=np.array([1.0]))
res = liouville_volume_check(free, region, t=0.9, n_samples=40_000, rng=RngStream(1), dt_max=5e-3)
print(
    f"  shear map: ratio {res.ratio:.4f} [{res.ratio_low:.4f}, {res.ratio_high:.4f}]"
)
