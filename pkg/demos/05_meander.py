"""Endpoint of the walk conditioned to stay above a boundary.

Compares S_n / c_n given T_g > n with the same quantity given tau_0 > n,
for a Cauchy walk (where g_n / c_n is tiny at n = 1000) and for the simple
walk (where it is about 0.2 and the difference is still visible).
"""
from stable_passage.asymptotics import meander_compare
from stable_passage.boundaries import BoundarySpec
from stable_passage.models import ExactStable, Lattice, StableParams

cases = {
    "Cauchy, g_n = n^0.3": (ExactStable(StableParams(1.0, 0.0)), BoundarySpec.power(1, 0.3)),
    "simple walk, floor(n^0.3)": (Lattice((-1, 1), (0.5, 0.5)),
                                  BoundarySpec.power(1, 0.3, floor=True, strict=True)),
}
for name, (model, b) in cases.items():
    m = meander_compare(model, b, 1000, 5000, seed=5)
    print(f"{name:28s} KS {m.ks:.4f}  99% null band {m.null_band:.4f}  "
          f"acceptance {m.acceptance_g:.4f} vs {m.acceptance_0:.4f}")
