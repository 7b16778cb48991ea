"""Generating-function upper bound q_n for P(T_g > n).

q_n multiplies the zero-boundary survival series by exp(sum Delta_n z^n / n)
where Delta_n = P(S_n > g_n) - P(S_n > 0).  Everything here is exact.
"""
import numpy as np

from stable_passage.boundaries import BoundarySpec
from stable_passage.exact_dp import dp_positive_curve, dp_survival_curve
from stable_passage.models import Lattice
from stable_passage.wiener_hopf import delta_sequence, sparre_andersen_survival, wh_upper_bound

srw = Lattice((-1, 1), (0.5, 0.5))
N = 400
for b in (BoundarySpec.constant(-1), BoundarySpec.power(0.5, 0.3), BoundarySpec.constant(-4)):
    tau0 = sparre_andersen_survival(dp_positive_curve(srw, b.zero_like(), N)[1:])
    q = wh_upper_bound(tau0, delta_sequence(srw, b, N), N).coeffs
    p = dp_survival_curve(srw, b, N)
    idx = [10, 100, 400]
    print(b.key, " ".join(f"n={i}: p={p[i]:.5f} q={q[i]:.5f}" for i in idx),
          f"min(q-p)={np.min(q - p):.1e}")
