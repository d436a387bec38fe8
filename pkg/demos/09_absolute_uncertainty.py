"""Sharper preparation means wider late-time velocities.

Ensembles start from Gaussian profiles of decreasing width. Each sample's
late-time velocity is estimated by differencing its guided trajectory
between half time and final time, far into the spreading regime. Halving
the preparation width doubles the velocity spread, and the product
spread(x0) * m * spread(v) stays pinned at hbar / 2: position knowledge
cannot be sharpened without paying in velocity spread. Reduced scale
here; the shipped experiment runs the full ladder.
"""

from typicality_lab import RngStream
from typicality_lab.bohmian import absolute_uncertainty_experiment

report = absolute_uncertainty_experiment(
    sigma_ladder=[1.0, 0.5],
    n_samples=8192,
    rng=RngStream(0),
    t_factor=20.0,
    grid_points=2048,
    box_sigmas=240.0,
    frames_per_spread=30,
    steps_per_spread=30,
)

print("sigma0    spread(x0)   spread(v)    product (target 0.5)")
for row in report.table("ladder").rows:
    print(f"  {row[0]:<6}  {row[1]:.4f}      {row[2]:.4f}      {row[3]:.4f}")
dv = [row[2] for row in report.table("ladder").rows]
print(f"\nvelocity-spread ratio between ladder points: {dv[1] / dv[0]:.3f} (target 2)")
print(f"worst product deviation: {report.metric('uncertainty_product').value:.4f}")
