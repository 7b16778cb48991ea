"""Three boundaries, three limits for U_g(n).

A summable boundary keeps U_g bounded away from 0 and infinity; a growing
non-summable one drives it to 0; a falling non-summable one to infinity.
The trend is slow (logarithmic), so desk-scale horizons show only its start.
"""
from stable_passage.asymptotics import classify_limit, estimate_ug
from stable_passage.boundaries import BoundarySpec
from stable_passage.models import Lattice, scaling_sequence
from stable_passage.renewal import srw_V

srw = Lattice((-1, 1), (0.5, 0.5))
grid = [2**k for k in range(6, 14)]
c = scaling_sequence(srw, range(1, grid[-1] + 1))
suites = {
    "floor(n^0.3)": BoundarySpec.power(1, 0.3, floor=True, strict=True),
    "floor(sqrt n / log n)": BoundarySpec.scaled_log(1, floor=True, strict=True),
    "-floor(sqrt n / log n)": BoundarySpec.scaled_log(1, sign=-1, floor=True, strict=True),
}
for name, b in suites.items():
    ug = estimate_ug(srw, b, grid, srw_V, c_seq=c)
    cl = classify_limit(b, c, ug)
    vals = " ".join(f"{u:7.3f}" for u in ug.u)
    print(f"{name:24s} {cl.label:18s} summand exponent {cl.summability.exponent:6.2f}  U: {vals}")
