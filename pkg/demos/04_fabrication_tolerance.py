# %% [markdown]
# # Fabrication tolerance at a fixed poling period
#
# Once the crystal is poled, the period is fixed. An etch-depth error moves
# the phase-matched pair away from degeneracy and changes the purity.
# The signal/idler roots are searched over 1400 to 1700 nm.

# %%
from lnoi.geometry import RibGeometry
from lnoi.materials import MaterialStack
from lnoi.spdc import PumpSpec, SpdcProcess, build_curves, solve_poling_period
from lnoi.tolerance import ToleranceSweepSpec, tolerance_sweep

rib = RibGeometry(800, 200, 800, 80)
curves = build_curves(rib, MaterialStack(), SpdcProcess.design("typeII"), mesh="sweep")
period = solve_poling_period(curves, 775.0, 1550.0)  # poled once, then held fixed
print(f"poling period {period:.4f} um")
spec = ToleranceSweepSpec(
    nominal=rib,
    parameter="etch_depth",
    values=(200.0, 210.0, 230.0),
    period_um=period,
    pump=PumpSpec.from_bandwidth_nm(775.0, 1.5),
    length_mm=5.0,
    window=(1400.0, 1700.0),
    mesh="sweep",
)

# %%
print(" h_e    signal     idler   purity(amp)  purity(int)")
for row in tolerance_sweep(spec):
    print(f"{row.value:4.0f}  {row.signal_nm:8.2f}  {row.idler_nm:8.2f}  {row.purity_amplitude:11.4f}"
          f"  {row.purity_intensity:11.4f}")
