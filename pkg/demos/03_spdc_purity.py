# %% [markdown]
# # Type-II SPDC: poling period, JSA and spectral purity
#
# A TM pump at 775 nm splits into a TM signal and a TE idler near 1550 nm.
# Group-velocity matching of the three modes tilts the phase-matching ridge
# so that it crosses the pump envelope almost at right angles. This is the
# condition for a nearly separable joint spectrum.

# %%
from lnoi.geometry import RibGeometry
from lnoi.materials import MaterialStack
from lnoi.spdc import (
    JsaGridSpec,
    PumpSpec,
    SpdcProcess,
    build_curves,
    build_jsa,
    group_index_gate,
    pmf_angle,
    purity_report,
    solve_poling_period,
)

stack = MaterialStack()
rib = RibGeometry(800, 200, 800, 80)
process = SpdcProcess.design("typeII", pump_nm=775.0)
curves = build_curves(rib, stack, process, mesh="sweep")

# %% [markdown]
# ## Poling period and group indices

# %%
period = solve_poling_period(curves, 775.0, 1550.0)
ng = (curves.pump.group_index(775.0), curves.signal.group_index(1550.0), curves.idler.group_index(1550.0))
print(f"poling period {period:.4f} um")
print("n_g pump/signal/idler: %.4f %.4f %.4f" % ng)
print(f"PMF angle {pmf_angle(*ng):.2f} deg, ordering gate {group_index_gate(*ng)}")

# %% [markdown]
# ## Joint spectral amplitude
#
# 1.5 nm pump bandwidth (1/e half-width), 5 mm of poled waveguide.

# %%
pump = PumpSpec.from_bandwidth_nm(775.0, 1.5)
jsa = build_jsa(process, curves, pump, length_mm=5.0, period_um=period, grid=JsaGridSpec(6.0, 256))
report = purity_report(jsa)
print(f"purity: amplitude SVD {report['amplitude']:.4f}, intensity SVD {report['intensity']:.4f}")
jsa.to_npz("jsa_nominal.npz")
print("JSA written to jsa_nominal.npz")
