"""Type 0/I/II SPDC in a periodically poled rib: phase matching, JSA and purity.

Frequencies are angular (rad/s), wavelengths in nm, wavenumbers in rad/um,
poling periods in um and crystal lengths in mm.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .fde import C_NM_PER_S, DispersionCurve, build_dispersion_curve
from .geometry import RibGeometry
from .materials import MaterialStack

log = logging.getLogger(__name__)

__all__ = [
    "PhaseMatchingError",
    "CurveRangeError",
    "Wave",
    "SpdcProcess",
    "PumpSpec",
    "PhaseMatchCurves",
    "build_curves",
    "omega",
    "wavelength",
    "idler_wavelength",
    "pef",
    "delta_k",
    "solve_poling_period",
    "pmf",
    "pmf_angle",
    "group_index_gate",
    "JsaGridSpec",
    "JsaGrid",
    "build_jsa",
    "purity",
    "purity_report",
    "PurityMap",
    "purity_map",
]

PROCESS_TYPES = {
    "type0": (("TE", "TE", "TE"), "d33"),
    "typeI": (("TE", "TM", "TM"), "d31"),
    "typeII": (("TM", "TM", "TE"), "d31"),
}


class PhaseMatchingError(RuntimeError):
    """No first-order quasi-phase-matching solution exists."""


class CurveRangeError(ValueError):
    """A frequency falls outside the sampled range of a dispersion curve."""


def omega(wavelength_nm):
    """Angular frequency (rad/s) of a vacuum wavelength in nm."""
    return 2 * math.pi * C_NM_PER_S / np.asarray(wavelength_nm, dtype=float)


def wavelength(omega_rad_s):
    """Vacuum wavelength (nm) of an angular frequency in rad/s."""
    return 2 * math.pi * C_NM_PER_S / np.asarray(omega_rad_s, dtype=float)


def idler_wavelength(pump_nm: float, signal_nm: float) -> float:
    """Idler wavelength fixed by energy conservation."""
    inv = 1.0 / pump_nm - 1.0 / signal_nm
    if inv <= 0:
        raise ValueError("signal wavelength must exceed the pump wavelength")
    return 1.0 / inv


@dataclass(frozen=True)
class Wave:
    wavelength: float  # nm
    polarization: str  # "TE" | "TM"

    @property
    def selector(self) -> str:
        return f"{self.polarization}0"


@dataclass(frozen=True)
class SpdcProcess:
    """Polarization pattern and design wavelengths of one SPDC process."""

    type_label: str
    pump: Wave
    signal: Wave
    idler: Wave
    coefficient: str

    def __post_init__(self):
        if self.type_label not in PROCESS_TYPES:
            raise ValueError(f"unknown process type {self.type_label!r}; have {sorted(PROCESS_TYPES)}")
        pols, coeff = PROCESS_TYPES[self.type_label]
        got = (self.pump.polarization, self.signal.polarization, self.idler.polarization)
        if got != pols:
            raise ValueError(f"{self.type_label} requires pump/signal/idler {pols}, got {got}")
        if self.coefficient != coeff:
            raise ValueError(f"{self.type_label} uses {coeff}, got {self.coefficient}")
        mismatch = 1 / self.pump.wavelength - 1 / self.signal.wavelength - 1 / self.idler.wavelength
        if abs(mismatch) > 1e-12 / self.pump.wavelength:
            raise ValueError(f"energy not conserved: 1/lp - 1/ls - 1/li = {mismatch:.3e} 1/nm")

    @classmethod
    def design(cls, type_label: str = "typeII", pump_nm: float = 775.0, signal_nm: float | None = None):
        """Process at ``pump_nm`` with the idler fixed by energy conservation.

        The signal defaults to degeneracy (twice the pump wavelength).
        """
        if type_label not in PROCESS_TYPES:
            raise ValueError(f"unknown process type {type_label!r}")
        (pp, ps, pi), coeff = PROCESS_TYPES[type_label]
        signal_nm = 2 * pump_nm if signal_nm is None else signal_nm
        idler_nm = idler_wavelength(pump_nm, signal_nm)
        return cls(type_label, Wave(pump_nm, pp), Wave(signal_nm, ps), Wave(idler_nm, pi), coeff)


@dataclass(frozen=True)
class PumpSpec:
    """Gaussian pump envelope ``exp[-(w_s + w_i - w_p)^2 / sigma^2]``."""

    center: float  # nm
    sigma: float  # rad/s

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("pump sigma must be > 0")
        if not self.center > 0:
            raise ValueError("pump wavelength must be > 0")

    @property
    def omega(self) -> float:
        return float(omega(self.center))

    @classmethod
    def from_bandwidth_nm(cls, center: float, bandwidth: float, convention: str = "1/e"):
        """Convert a wavelength bandwidth to ``sigma``.

        ``"1/e"``: ``bandwidth`` is the 1/e amplitude half-width, so
        ``sigma = 2 pi c dlam / lam^2``. ``"fwhm"``: ``bandwidth`` is the
        intensity FWHM, so ``sigma = dw / sqrt(2 ln 2)``.
        """
        if not bandwidth > 0:
            raise ValueError("bandwidth must be > 0")
        dw = 2 * math.pi * C_NM_PER_S * bandwidth / center**2
        if convention == "1/e":
            return cls(center, dw)
        if convention == "fwhm":
            return cls(center, dw / math.sqrt(2 * math.log(2)))
        raise ValueError(f"unknown bandwidth convention {convention!r}")


class PhaseMatchCurves(NamedTuple):
    pump: DispersionCurve
    signal: DispersionCurve
    idler: DispersionCurve


def build_curves(
    geometry: RibGeometry,
    stack: MaterialStack,
    process: SpdcProcess,
    pump_span: float = 4.0,
    signal_range: tuple[float, float] | None = None,
    idler_range: tuple[float, float] | None = None,
    samples: int = 7,
    pump_samples: int = 7,
    mesh=None,
    count: int = 12,
) -> PhaseMatchCurves:
    """Dispersion curves of the three interacting modes.

    Signal and idler ranges default to +-30 nm around their design
    wavelengths. The idler reuses the signal curve when both are the same mode
    over the same range.
    """
    lp, ls, li = process.pump.wavelength, process.signal.wavelength, process.idler.wavelength
    signal_range = signal_range or (ls - 30.0, ls + 30.0)
    idler_range = idler_range or (li - 30.0, li + 30.0)
    pump = build_dispersion_curve(
        geometry, stack, process.pump.selector, (lp - pump_span, lp + pump_span),
        samples=pump_samples, mesh=mesh, count=count,
    )
    signal = build_dispersion_curve(
        geometry, stack, process.signal.selector, signal_range, samples=samples, mesh=mesh, count=count
    )
    if process.idler.selector == process.signal.selector and tuple(idler_range) == tuple(signal_range):
        idler = signal
    else:
        idler = build_dispersion_curve(
            geometry, stack, process.idler.selector, idler_range, samples=samples, mesh=mesh, count=count
        )
    return PhaseMatchCurves(pump, signal, idler)


def pef(omega_s, omega_i, pump: PumpSpec):
    """Pump envelope amplitude in [0, 1]."""
    x = (np.asarray(omega_s, float) + np.asarray(omega_i, float) - pump.omega) / pump.sigma
    return np.exp(-x * x)


def _k(curve: DispersionCurve, role: str, w):
    try:
        return curve.wavenumber(w)
    except ValueError as exc:
        raise CurveRangeError(f"{role} curve: {exc}") from None


def delta_k(omega_s, omega_i, curves: PhaseMatchCurves, period_um: float = math.inf):
    """Momentum mismatch ``k_p(w_s + w_i) - k_s(w_s) - k_i(w_i) - 2 pi / period`` (rad/um)."""
    ws = np.asarray(omega_s, float)
    wi = np.asarray(omega_i, float)
    grating = 0.0 if math.isinf(period_um) else 2 * math.pi / period_um
    return (
        _k(curves.pump, "pump", ws + wi)
        - _k(curves.signal, "signal", ws)
        - _k(curves.idler, "idler", wi)
        - grating
    )


def solve_poling_period(curves: PhaseMatchCurves, pump_nm: float, signal_nm: float) -> float:
    """First-order poling period (um) phase-matching the design point."""
    li = idler_wavelength(pump_nm, signal_nm)
    mismatch = float(delta_k(omega(signal_nm), omega(li), curves))
    if not mismatch > 0:
        raise PhaseMatchingError(
            f"momentum mismatch {mismatch:.4g} rad/um is not positive; "
            "first-order poling cannot phase-match (higher orders are out of scope)"
        )
    return 2 * math.pi / mismatch


def pmf(omega_s, omega_i, curves: PhaseMatchCurves, period_um: float, length_mm: float):
    """Phase-matching amplitude ``sinc(dk L / 2) exp(i dk L / 2)``."""
    x = delta_k(omega_s, omega_i, curves, period_um) * (length_mm * 1e3) / 2
    return np.sinc(x / math.pi) * np.exp(1j * x)


def pmf_angle(ng_p: float, ng_s: float, ng_i: float) -> float:
    """Orientation of the phase-matching ridge against the signal axis, in [0, 180) degrees."""
    num, den = -(ng_p - ng_s), ng_p - ng_i
    if num == 0 and den == 0:
        raise ValueError("PMF angle undefined when all three group indices are equal")
    theta = math.degrees(math.atan2(num, den)) % 180.0
    return 0.0 if theta == 180.0 else theta


def group_index_gate(ng_p: float, ng_s: float, ng_i: float) -> bool:
    """True when the pump group index lies between those of signal and idler."""
    return min(ng_s, ng_i) <= ng_p <= max(ng_s, ng_i)


@dataclass(frozen=True)
class JsaGridSpec:
    """Square frequency grid covering ``centre +- span`` nm on each axis."""

    span: float = 6.0  # nm
    samples: int = 256

    def __post_init__(self):
        if not self.span > 0 or self.samples < 2:
            raise ValueError("grid needs span > 0 and at least 2 samples")

    def axis(self, center_nm: float) -> np.ndarray:
        lo, hi = omega(center_nm + self.span), omega(center_nm - self.span)
        return np.linspace(lo, hi, self.samples)


@dataclass
class JsaGrid:
    """Complex JSA on a (signal, idler) frequency grid, max modulus 1."""

    omega_s: np.ndarray
    omega_i: np.ndarray
    amplitude: np.ndarray  # [len(omega_s), len(omega_i)]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.amplitude.shape != (len(self.omega_s), len(self.omega_i)):
            raise ValueError("amplitude shape does not match axes")
        for ax in (self.omega_s, self.omega_i):
            if np.any(np.diff(ax) <= 0):
                raise ValueError("axes must be strictly increasing")

    @property
    def jsi(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    @property
    def signal_wavelengths(self) -> np.ndarray:
        return wavelength(self.omega_s)

    @property
    def idler_wavelengths(self) -> np.ndarray:
        return wavelength(self.omega_i)

    def to_npz(self, path):
        np.savez(
            path,
            omega_s=self.omega_s,
            omega_i=self.omega_i,
            jsa_real=self.amplitude.real,
            jsa_imag=self.amplitude.imag,
            jsi=self.jsi,
        )


def build_jsa(
    process: SpdcProcess,
    curves: PhaseMatchCurves,
    pump: PumpSpec,
    length_mm: float,
    period_um: float,
    grid: JsaGridSpec = JsaGridSpec(),
    center: tuple[float, float] | None = None,
) -> JsaGrid:
    """JSA = PEF * PMF on a grid centred on ``center`` (default: design wavelengths)."""
    ls, li = center or (process.signal.wavelength, process.idler.wavelength)
    ws, wi = grid.axis(ls), grid.axis(li)
    WS, WI = np.meshgrid(ws, wi, indexing="ij")
    f = pef(WS, WI, pump) * pmf(WS, WI, curves, period_um, length_mm)
    peak = np.abs(f).max()
    if peak == 0:
        raise ValueError("JSA vanishes everywhere on the grid")
    return JsaGrid(
        ws,
        wi,
        f / peak,
        metadata={
            "process": process.type_label,
            "sigma_rad_s": pump.sigma,
            "pump_nm": pump.center,
            "length_mm": length_mm,
            "period_um": period_um,
            "center_nm": (float(ls), float(li)),
            "geometry": None if curves.pump.geometry is None else repr(curves.pump.geometry),
        },
    )


def purity(jsa, use_amplitude: bool = True) -> float:
    """Schmidt purity ``sum p_k^2`` with ``p_k = s_k^2 / sum s_j^2``.

    ``jsa`` is a :class:`JsaGrid` or a 2-D array. With ``use_amplitude=False``
    the singular values are taken of the intensity matrix ``|f|^2`` instead.
    """
    m = jsa.amplitude if isinstance(jsa, JsaGrid) else np.asarray(jsa)
    if not use_amplitude:
        m = np.abs(m) ** 2
    s = np.linalg.svd(m, compute_uv=False)
    s2 = s * s
    total = s2.sum()
    if total == 0:
        raise ValueError("purity of an all-zero matrix is undefined")
    p = s2 / total
    return float(np.sum(p * p))


def purity_report(jsa) -> dict:
    """Purity under both conventions, logging when they disagree by > 1e-3."""
    amp, inten = purity(jsa, True), purity(jsa, False)
    if abs(amp - inten) > 1e-3:
        log.info("amplitude purity %.5f vs intensity purity %.5f", amp, inten)
    return {"amplitude": amp, "intensity": inten}


@dataclass
class PurityMap:
    lengths_mm: np.ndarray
    bandwidths_nm: np.ndarray
    values: np.ndarray  # [len(lengths), len(bandwidths)]
    metadata: dict = field(default_factory=dict)

    def rows(self):
        return [
            (float(L), float(b), float(self.values[i, j]))
            for i, L in enumerate(self.lengths_mm)
            for j, b in enumerate(self.bandwidths_nm)
        ]


def _purity_cell(args):
    process, curves, pump, length, period, grid, use_amplitude = args
    return purity(build_jsa(process, curves, pump, length, period, grid), use_amplitude)


def purity_map(
    process: SpdcProcess,
    curves: PhaseMatchCurves,
    lengths_mm,
    bandwidths_nm,
    period_um: float,
    grid: JsaGridSpec = JsaGridSpec(),
    convention: str = "1/e",
    use_amplitude: bool = True,
    jobs: int = 1,
) -> PurityMap:
    """Purity over (crystal length, pump bandwidth); cells are independent."""
    lengths = np.asarray(lengths_mm, float)
    bands = np.asarray(bandwidths_nm, float)
    tasks = [
        (process, curves, PumpSpec.from_bandwidth_nm(process.pump.wavelength, b, convention),
         L, period_um, grid, use_amplitude)
        for L in lengths
        for b in bands
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            flat = list(pool.map(_purity_cell, tasks))
    else:
        flat = [_purity_cell(t) for t in tasks]
    return PurityMap(
        lengths,
        bands,
        np.array(flat).reshape(len(lengths), len(bands)),
        {"period_um": period_um, "convention": convention, "use_amplitude": use_amplitude,
         "grid": {"span_nm": grid.span, "samples": grid.samples}},
    )
