"""Lateral-leakage index margin and (h_e, h_f) sweeps.

A rib mode can leak sideways when the orthogonally polarised mode of the
residual slab beside the rib has a higher index. The margin

    delta_neff = n_eff(rib fundamental, pol) - n_eff(slab fundamental, other pol)

is positive for non-leaky and non-positive for leaky geometries.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .fde import ConvergenceError, NoModeError, find_modes, select_mode
from .geometry import GeometryError, MeshSpec, RibGeometry, mesh_preset
from .materials import MaterialStack
from .slab import fundamental_index

log = logging.getLogger(__name__)

__all__ = [
    "RibCutoffError",
    "LeakageResult",
    "delta_neff",
    "LeakageMapSpec",
    "LeakageMap",
    "leakage_map",
    "crossover_contour",
    "other_polarization",
]


class RibCutoffError(RuntimeError):
    """The requested rib mode is not guided (below cutoff)."""


def other_polarization(pol: str) -> str:
    return {"TE": "TM", "TM": "TE"}[pol]


@dataclass(frozen=True)
class LeakageResult:
    delta: float
    rib_index: float
    reference_index: float
    slab_below_cutoff: bool

    @property
    def leaky(self) -> bool:
        return self.delta <= 0


def delta_neff(
    geometry: RibGeometry,
    stack: MaterialStack,
    wavelength: float,
    guided_pol: str,
    mesh: MeshSpec | str | None = "sweep",
    count: int = 16,
) -> LeakageResult:
    """Leakage margin of the fundamental ``guided_pol`` rib mode at ``wavelength`` (nm)."""
    if guided_pol not in ("TE", "TM"):
        raise ValueError(f"guided_pol must be TE or TM, got {guided_pol!r}")
    try:
        modes = find_modes(geometry, stack, wavelength, mesh, count=count)
        rib = select_mode(modes, f"{guided_pol}0")
    except (LookupError, NoModeError):
        raise RibCutoffError(
            f"no guided {guided_pol}0 rib mode for {geometry} at {wavelength} nm"
        ) from None
    ref = fundamental_index(stack, geometry.slab_thickness, wavelength, other_polarization(guided_pol))
    below = ref is None
    if below:
        ref = stack.indices(wavelength * 1e-3)["n_sub"]
    return LeakageResult(rib.n_eff - ref, rib.n_eff, ref, below)


@dataclass(frozen=True)
class LeakageMapSpec:
    """Sweep of ``delta_neff`` over etch depth and film thickness (nm)."""

    widths: tuple[float, ...]
    etch_range: tuple[float, float, float]  # start, stop (inclusive), step
    thickness_range: tuple[float, float, float]
    wavelength: float
    guided_pol: str
    sidewall_angle: float = 80.0
    stack: MaterialStack = field(default_factory=MaterialStack)
    mesh: str | MeshSpec = "sweep"
    count: int = 16

    def __post_init__(self):
        for name in ("etch_range", "thickness_range"):
            start, stop, step = getattr(self, name)
            if not step > 0:
                raise ValueError(f"{name} step must be > 0")
            if stop < start:
                raise ValueError(f"{name} must be increasing")
        if self.guided_pol not in ("TE", "TM"):
            raise ValueError("guided_pol must be TE or TM")

    @staticmethod
    def _axis(r):
        start, stop, step = r
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(n)

    @property
    def etch_depths(self) -> np.ndarray:
        return self._axis(self.etch_range)

    @property
    def thicknesses(self) -> np.ndarray:
        return self._axis(self.thickness_range)

    def mesh_spec(self) -> MeshSpec:
        return mesh_preset(self.mesh) if isinstance(self.mesh, str) else self.mesh


@dataclass
class LeakageMap:
    """Values have shape ``(len(thicknesses), len(etch_depths))`` for one width."""

    width: float
    etch_depths: np.ndarray
    thicknesses: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    reasons: dict = field(default_factory=dict)
    below_cutoff: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def rows(self):
        """Tidy rows ``(h_e, h_f, delta_neff, mask)``."""
        out = []
        for i, hf in enumerate(self.thicknesses):
            for j, he in enumerate(self.etch_depths):
                v = self.values[i, j]
                out.append((float(he), float(hf), float(v), bool(self.mask[i, j])))
        return out


def _cell(args):
    geometry, stack, wavelength, pol, mesh, count = args
    try:
        r = delta_neff(geometry, stack, wavelength, pol, mesh, count)
        return r.delta, r.slab_below_cutoff, None
    except (ConvergenceError, RibCutoffError, LookupError) as exc:
        return math.nan, False, f"{type(exc).__name__}: {exc}"


def leakage_map(spec: LeakageMapSpec, jobs: int = 1, progress=None) -> list[LeakageMap]:
    """One :class:`LeakageMap` per width in ``spec.widths``.

    Cells with ``h_e > h_f`` are masked as infeasible; solver failures are
    masked with the reason recorded. Cell values do not depend on evaluation
    order or on ``jobs``.
    """
    he_axis, hf_axis = spec.etch_depths, spec.thicknesses
    mesh = spec.mesh_spec()
    maps = []
    for w in spec.widths:
        tasks, where = [], []
        mask = np.zeros((len(hf_axis), len(he_axis)), bool)
        reasons = {}
        for i, hf in enumerate(hf_axis):
            for j, he in enumerate(he_axis):
                try:
                    g = RibGeometry(float(w), float(he), float(hf), spec.sidewall_angle)
                except GeometryError as exc:
                    mask[i, j] = True
                    reasons[(float(he), float(hf))] = f"infeasible: {exc}"
                    continue
                tasks.append((g, spec.stack, spec.wavelength, spec.guided_pol, mesh, spec.count))
                where.append((i, j))
        values = np.full(mask.shape, np.nan)
        below = np.zeros(mask.shape, bool)
        results = _run(tasks, jobs, progress)
        for (i, j), (val, cut, err) in zip(where, results):
            values[i, j] = val
            below[i, j] = cut
            if err is not None:
                mask[i, j] = True
                reasons[(float(he_axis[j]), float(hf_axis[i]))] = err
        maps.append(
            LeakageMap(
                width=float(w),
                etch_depths=he_axis,
                thicknesses=hf_axis,
                values=values,
                mask=mask,
                reasons=reasons,
                below_cutoff=below,
                provenance={
                    "wavelength_nm": spec.wavelength,
                    "guided_pol": spec.guided_pol,
                    "sidewall_angle": spec.sidewall_angle,
                    "mesh": asdict(mesh),
                    "materials": spec.stack.identifiers(),
                },
            )
        )
    return maps


def _run(tasks, jobs, progress=None):
    if jobs <= 1 or len(tasks) <= 1:
        out = []
        for k, t in enumerate(tasks):
            out.append(_cell(t))
            if progress:
                progress(k + 1, len(tasks))
        return out
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        out = []
        for k, r in enumerate(pool.map(_cell, tasks)):
            out.append(r)
            if progress:
                progress(k + 1, len(tasks))
        return out


def crossover_contour(lmap: LeakageMap) -> list[np.ndarray]:
    """Zero-level contour(s) as polylines of ``(h_e, h_f)`` points.

    Returns an empty list when the unmasked values never change sign.
    """
    import contourpy

    z = np.ma.masked_array(lmap.values, mask=lmap.mask | ~np.isfinite(lmap.values))
    finite = z.compressed()
    if finite.size == 0 or finite.min() > 0 or finite.max() <= 0:
        log.info("single-sign leakage map (w=%s): no crossover", lmap.width)
        return []
    gen = contourpy.contour_generator(
        x=np.asarray(lmap.etch_depths, float), y=np.asarray(lmap.thicknesses, float), z=z
    )
    return [np.asarray(line) for line in gen.lines(0.0) if len(line) > 1]


def distance_to_contour(lines, point) -> float:
    """Smallest Euclidean distance from ``(h_e, h_f)`` to any contour segment."""
    p = np.asarray(point, float)
    best = math.inf
    for line in lines:
        a, b = line[:-1], line[1:]
        ab = b - a
        t = np.clip(np.einsum("ij,ij->i", p - a, ab) / np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300), 0, 1)
        d = np.linalg.norm(a + t[:, None] * ab - p, axis=1)
        best = min(best, float(d.min()))
    return best
