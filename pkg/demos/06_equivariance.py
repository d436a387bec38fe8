"""The squared amplitude is transported into itself by the guided flow.

Draw an ensemble from |psi|^2 at t = 0, advect every sample along the
guiding velocity field while the wave function is propagated alongside,
and compare histograms with the propagated |psi_t|^2 at checkpoints over
one beat period of a two-mode superposition. The distance stays at the
multinomial sampling floor: a sample that starts as a fair draw from the
density remains one, which is what makes position statistics stable.
"""

import numpy as np

from typicality_lab import Grid, RngStream
from typicality_lab.bohmian import eigenstate_superposition
from typicality_lab.bohmian.equivariance import equivariance_check

grid = Grid(1, 512, 40.0)
beat = 2 * np.pi
wf = eigenstate_superposition(grid, {0: 1.0, 1: 1.0})

report = equivariance_check(
    wf,
    n_samples=4000,
    t_checkpoints=[beat * (k + 1) / 8 for k in range(8)],
    rng=RngStream(0),
    wave_dt=beat / 2048,
    frame_stride=4,
)

print("checkpoint   distance   sampling floor (99%)")
for t, l1, _, q99 in report.table("checkpoints").rows:
    print(f"  t = {t:5.2f}   {l1:.4f}     {q99:.4f}")
print(f"\nnode-clamp rate: {report.metric('clamp_rate').value:.2e}")
print(f"max distance {report.metric('max_checkpoint_l1').value:.4f} (tolerance 0.05)")
print("the ensemble tracks the evolving density without being re-sampled")
