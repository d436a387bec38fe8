"""Position statistics: conditional bins and ensemble frequencies.

Two statistical faces of the same conditional law. First, draws of the
full (x, y) configuration are binned by the environment coordinate and
the subsystem histogram inside every bin is compared to that bin's sliced
density. Second, an ensemble of M identically prepared subsystems is
drawn (the joint state factorizes exactly, so the draw is M independent
profile draws) and the measure of ensembles whose frequency in a region
deviates from the profile mass is compared against the exact binomial
tail.
"""

from typicality_lab import Grid, RngStream
from typicality_lab.bohmian import (
    born_lln_experiment,
    conditional_born_statistics,
    correlated_gaussian_state,
    free_gaussian,
)

grid2 = Grid(2, 256, 16.0)
wf = correlated_gaussian_state(grid2, s=0.5, big_s=2.0)
report = conditional_born_statistics(wf, 60_000, RngStream(0), min_count=1500)
print("conditional statistics in environment bins (correlated state):")
for row in report.table("bins").rows:
    if row[6]:
        print(f"  bin {row[0]:>2} ({row[3]:>6} draws): distance {row[4]:.4f}, floor {row[5]:.4f}")
print(f"  worst bin: {report.metric('max_bin_l1').value:.4f} (tolerance 0.1)")

grid1 = Grid(1, 1024, 40.0)
phi = free_gaussian(grid1, 1.0)
report2 = born_lln_experiment(
    phi, ladder=[100, 1_000, 10_000], region=(0.0, 20.0), epsilon=0.02,
    n_seeds=60, rng=RngStream(1),
)
print("\nensemble frequencies in the left half (profile mass 0.5):")
print("      M   deviation measure    exact binomial tail")
for row in report2.table("ladder").rows:
    print(f"  {row[0]:>5}   {row[3]:.3f} [{row[4]:.3f}, {row[5]:.3f}]   {row[6]:.5f}")
print("the estimate tracks the closed-form law at every ensemble size")
