"""Mode, leakage and SPDC design toolkit for X-cut thin-film lithium niobate rib waveguides."""

__version__ = "0.1.0"

from .materials import DielectricModel, MaterialStack, refractive_index  # noqa: E402
from .geometry import RibGeometry, mesh_preset, rasterize  # noqa: E402
from .slab import SlabSpec, slab_mode_indices  # noqa: E402
from .fde import (  # noqa: E402
    DispersionCurve,
    ModeSolution,
    build_dispersion_curve,
    find_modes,
    group_index,
    select_mode,
    solve_modes,
)
from .leakage import LeakageMapSpec, crossover_contour, delta_neff, leakage_map  # noqa: E402
from .spdc import (  # noqa: E402
    JsaGridSpec,
    PumpSpec,
    SpdcProcess,
    build_curves,
    build_jsa,
    pmf_angle,
    purity,
    solve_poling_period,
)
from .tolerance import ToleranceSweepSpec, phase_matched_wavelengths, tolerance_sweep  # noqa: E402
