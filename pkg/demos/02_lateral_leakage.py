# %% [markdown]
# # Lateral leakage map
#
# A rib mode leaks sideways when its index falls below the index of the
# opposite-polarization slab mode next to the rib. The margin
# delta = n_eff(rib) - n_slab(other pol) is swept over etch depth and film
# thickness, and the zero contour separates leaky designs from safe ones.

# %%
import numpy as np

from lnoi.leakage import LeakageMapSpec, crossover_contour, delta_neff, leakage_map
from lnoi.geometry import RibGeometry
from lnoi.materials import MaterialStack

stack = MaterialStack()
r = delta_neff(RibGeometry(800, 200, 800, 80), stack, 1550.0, "TM")
print(f"nominal rib, 1550 TM: n_eff={r.rib_index:.5f}  TE slab={r.reference_index:.5f}  delta={r.delta:+.5f}")

# %% [markdown]
# ## A coarse map
#
# 100 nm steps on the 25 nm mesh keep this to a few minutes on one core.
# Cells deeper than the film are masked as infeasible.

# %%
spec = LeakageMapSpec(
    widths=(800.0,),
    etch_range=(50, 350, 100),
    thickness_range=(500, 900, 100),
    wavelength=1550.0,
    guided_pol="TM",
    mesh="coarse",
    count=20,
)
(lmap,) = leakage_map(spec, progress=lambda k, n: print(f"  cell {k}/{n}", end="\r"))
print()
with np.printoptions(precision=4, suppress=True):
    print("rows h_f", lmap.thicknesses, "columns h_e", lmap.etch_depths)
    print(lmap.values)

# %%
for line in crossover_contour(lmap):
    print("zero contour (h_e, h_f):", np.round(line).tolist())
