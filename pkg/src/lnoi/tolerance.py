"""Fabrication tolerance at fixed poling period.

With the period and pump held fixed, a change of width, sidewall angle or
etch depth moves the phase-matched signal/idler pair. Each sweep row solves the
new pair and the purity of a JSA re-centred on it.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .fde import ConvergenceError, TrackingError
from .geometry import GeometryError, RibGeometry
from .materials import MaterialStack
from .spdc import (
    JsaGridSpec,
    PhaseMatchCurves,
    PhaseMatchingError,
    PumpSpec,
    SpdcProcess,
    build_curves,
    build_jsa,
    delta_k,
    idler_wavelength,
    omega,
    purity,
    wavelength,
)

log = logging.getLogger(__name__)

__all__ = [
    "PARAMETERS",
    "phase_matched_wavelengths",
    "curves_for_window",
    "ToleranceSweepSpec",
    "ToleranceRow",
    "tolerance_sweep",
]

PARAMETERS = {"top_width": "width", "sidewall_angle": "sidewall_angle", "etch_depth": "etch_depth"}


def phase_matched_wavelengths(
    curves: PhaseMatchCurves,
    period_um: float,
    pump_nm: float = 775.0,
    window: tuple[float, float] = (1450.0, 1650.0),
    step: float = 0.1,
) -> tuple[float, float]:
    """Signal/idler pair (nm) with ``delta_k = 0`` at fixed pump frequency.

    The signal wavelength is pre-scanned over ``window`` in ``step`` nm and each
    sign change refined by bisection in signal frequency. When several roots
    exist the one nearest degeneracy is returned.
    """
    wp = float(omega(pump_nm))
    lam = np.arange(window[0], window[1] + step / 2, step)
    ws = omega(lam)
    f = delta_k(ws, wp - ws, curves, period_um)
    roots = []
    for k in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) <= 0):
        if f[k] == 0:
            roots.append(ws[k])
            continue
        if f[k + 1] == 0:
            continue  # picked up as the left end of the next bracket
        g = lambda w: float(delta_k(w, wp - w, curves, period_um))
        roots.append(bisect(g, ws[k + 1], ws[k], xtol=1e-9 * wp, rtol=1e-15, maxiter=200))
    if not roots:
        raise PhaseMatchingError(
            f"no phase matching for period {period_um:.6g} um with signal in {window} nm"
        )
    best = min(roots, key=lambda w: abs(w - wp / 2))
    ls = float(wavelength(best))
    return ls, idler_wavelength(pump_nm, ls)


def curves_for_window(
    geometry: RibGeometry,
    stack: MaterialStack,
    process: SpdcProcess,
    window: tuple[float, float] = (1450.0, 1650.0),
    pad: float = 12.0,
    samples: int = 13,
    mesh=None,
) -> PhaseMatchCurves:
    """Curves covering every signal in ``window`` and its energy-conjugate idler."""
    lp = process.pump.wavelength
    conj = (idler_wavelength(lp, window[1]), idler_wavelength(lp, window[0]))
    lo = min(window[0], conj[0]) - pad
    hi = max(window[1], conj[1]) + pad
    return build_curves(
        geometry, stack, process, signal_range=(lo, hi), idler_range=(lo, hi), samples=samples, mesh=mesh
    )


@dataclass(frozen=True)
class ToleranceSweepSpec:
    """One geometry parameter varied around ``nominal`` at fixed period and pump."""

    nominal: RibGeometry
    parameter: str  # top_width | sidewall_angle | etch_depth
    values: tuple[float, ...]
    period_um: float
    pump: PumpSpec
    length_mm: float
    process: SpdcProcess = field(default_factory=lambda: SpdcProcess.design("typeII"))
    stack: MaterialStack = field(default_factory=MaterialStack)
    window: tuple[float, float] = (1450.0, 1650.0)
    grid: JsaGridSpec = JsaGridSpec()
    mesh: object = None
    samples: int = 13

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValueError(f"parameter must be one of {sorted(PARAMETERS)}, got {self.parameter!r}")
        if not self.values:
            raise ValueError("tolerance sweep needs at least one value")
        if not self.period_um > 0 or not self.length_mm > 0:
            raise ValueError("period and length must be > 0")
        for v in self.values:
            self.geometry(v)  # raises GeometryError when out of physical bounds

    def geometry(self, value: float) -> RibGeometry:
        return self.nominal.with_(**{PARAMETERS[self.parameter]: float(value)})


@dataclass(frozen=True)
class ToleranceRow:
    value: float
    signal_nm: float
    idler_nm: float
    purity_amplitude: float
    purity_intensity: float
    error: str | None = None

    def energy_residual(self, pump_nm: float) -> float:
        """``1/lp - 1/ls - 1/li`` in 1/nm (nan for failed rows)."""
        return 1 / pump_nm - 1 / self.signal_nm - 1 / self.idler_nm


def _row(args) -> ToleranceRow:
    spec, value = args
    try:
        g = spec.geometry(value)
        curves = curves_for_window(g, spec.stack, spec.process, spec.window, spec.grid.span + 6.0,
                                   spec.samples, spec.mesh)
        ls, li = phase_matched_wavelengths(curves, spec.period_um, spec.pump.center, spec.window)
        jsa = build_jsa(spec.process, curves, spec.pump, spec.length_mm, spec.period_um, spec.grid, (ls, li))
        return ToleranceRow(float(value), ls, li, purity(jsa, True), purity(jsa, False))
    except (PhaseMatchingError, ConvergenceError, TrackingError, GeometryError) as exc:
        log.warning("%s=%s: %s", spec.parameter, value, exc)
        nan = math.nan
        return ToleranceRow(float(value), nan, nan, nan, nan, f"{type(exc).__name__}: {exc}")


def tolerance_sweep(spec: ToleranceSweepSpec, jobs: int = 1) -> list[ToleranceRow]:
    """Rows ordered by parameter value; failed rows carry an error and NaNs."""
    values = sorted(float(v) for v in spec.values)
    tasks = [(spec, v) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_row, tasks))
    return [_row(t) for t in tasks]
