# %% [markdown]
# # Slab and rib modes of an X-cut LNOI rib
#
# The film is X-cut lithium niobate on silica with air above. Light travels
# along crystal Y, so a horizontally polarized (TE) field sees n_e and a
# vertically polarized (TM) field sees n_o.

# %%
import numpy as np

from lnoi.fde import find_modes, group_index
from lnoi.geometry import RibGeometry
from lnoi.materials import MaterialStack
from lnoi.slab import thickness_table

stack = MaterialStack()
for lam in (0.775, 1.55):
    idx = stack.indices(lam)
    print(f"{lam * 1e3:.0f} nm: n_o={idx['n_o']:.5f} n_e={idx['n_e']:.5f} n_SiO2={idx['n_sub']:.5f}")

# %% [markdown]
# ## The residual slab
#
# The slab left beside the rib decides which rib modes leak. Its indices
# come from the transverse resonance condition, solved analytically.

# %%
for row in thickness_table(stack, [300, 400, 500, 600], 1550.0):
    print("h=%4.0f nm  %s%d  n_eff=%.5f" % (row[0], row[1], row[2], row[3]))

# %% [markdown]
# ## Rib modes at the nominal geometry
#
# 800 nm top width, 200 nm etch into an 800 nm film, 80 degree sidewalls.
# Labels count only the modes that sit above the same-polarization slab index.

# %%
rib = RibGeometry(width=800, etch_depth=200, film_thickness=800, sidewall_angle=80)
for lam in (775.0, 1550.0):
    for m in find_modes(rib, stack, lam, "sweep", count=6):
        print(f"{lam:.0f} nm  {m.label:8s} n_eff={m.n_eff:.5f}  TE share={m.polarization_fraction:.2f}"
              f"  core={m.core_fraction:.2f}")

# %% [markdown]
# ## Group indices of the type-II triplet
#
# Central differences of the tracked n_eff, with a 1 nm step.

# %%
ng = {
    "pump TM0 775": group_index(rib, stack, "TM0", 775.0, mesh="sweep"),
    "signal TM0 1550": group_index(rib, stack, "TM0", 1550.0, mesh="sweep"),
    "idler TE0 1550": group_index(rib, stack, "TE0", 1550.0, mesh="sweep"),
}
for name, value in ng.items():
    print(f"{name:16s} n_g = {value:.4f}")
print("spread:", np.ptp(list(ng.values())))
