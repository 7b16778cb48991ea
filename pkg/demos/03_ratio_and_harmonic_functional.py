"""Survival under a slowly growing boundary, compared with the zero boundary.

For the simple walk and g_n = floor(n^0.3) (killed on S_n < g_n) we track
U_g(n) = E[V(S_n - g_n); T_g > n] with V(x) = 2(x + 1), and the ratio
P(T_g > n) U_0(n) / (P(tau_0 > n) U_g(n)), which should settle near 1.
"""
from stable_passage.asymptotics import ratio_curve
from stable_passage.boundaries import BoundarySpec
from stable_passage.models import Lattice
from stable_passage.renewal import srw_V

srw = Lattice((-1, 1), (0.5, 0.5))
b = BoundarySpec.power(1, 0.3, floor=True, strict=True)
rc = ratio_curve(srw, b, [2**k for k in range(4, 13)], srw_V)
print(f"{'n':>6s} {'P(T_g>n)':>11s} {'P(tau_0>n)':>11s} {'U_g(n)':>8s} {'ratio':>7s}")
for n, pg, p0, u, r in zip(rc.n, rc.p_g, rc.p_0, rc.u_g, rc.r):
    print(f"{n:6d} {pg:11.6f} {p0:11.6f} {u:8.4f} {r:7.4f}")
