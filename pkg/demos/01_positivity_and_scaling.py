"""Positivity index and scaling constants for a few increment laws.

Prints rho next to the Monte Carlo frequency of {S_n > 0}, and the ratio
c_{2n} / c_n next to its limit 2^(1/alpha).
"""
import numpy as np

from stable_passage.models import Lattice, SkewedPareto, SymmetricPareto, positivity_index, scaling_sequence
from stable_passage.walk_sim import sample_endpoints

models = {
    "simple walk": Lattice((-1, 1), (0.5, 0.5)),
    "symmetric Pareto 1.5": SymmetricPareto(1.5),
    "one-sided Pareto 1.5": SkewedPareto(1.5, 1.0),
    "Pareto 1.2, p_right=0.8": SkewedPareto(1.2, 0.8),
}

print(f"{'model':26s} {'rho':>8s} {'P(S_n>0)':>9s} {'c_2n/c_n':>9s} {'limit':>7s}")
for name, m in models.items():
    law = m.attracting_law
    rho = positivity_index(law)
    freq = np.mean(sample_endpoints(m, 2000, 20_000, seed=1) > 0)
    c = scaling_sequence(m, [4096, 8192])
    print(f"{name:26s} {rho:8.4f} {freq:9.4f} {c[8192] / c[4096]:9.4f} {2 ** (1 / law.alpha):7.4f}")
