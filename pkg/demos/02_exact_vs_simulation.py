"""Exact lattice survival against Monte Carlo for a moving boundary.

The boundary is g_n = n^0.3 / 2 for the 3-point walk {-1, 0, 2}.  The
exact column comes from the convolve-and-truncate recursion.
"""
from stable_passage.boundaries import BoundarySpec
from stable_passage.exact_dp import dp_sweep
from stable_passage.models import Lattice
from stable_passage.walk_sim import survival_sweep

walk = Lattice((-1, 0, 2), (0.5, 0.25, 0.25))
b = BoundarySpec.power(0.5, 0.3)
grid = [16, 64, 256, 1024]

exact = dp_sweep(walk, b, grid).survival
mc = survival_sweep(walk, b, grid, 200_000, seed=2)
print(f"{'n':>6s} {'exact':>12s} {'simulated':>12s} {'95% half-width':>15s}")
for n, p, e in zip(grid, exact, mc.estimates):
    print(f"{n:6d} {p:12.6f} {e.p_hat:12.6f} {e.ci_half_width:15.6f}")
