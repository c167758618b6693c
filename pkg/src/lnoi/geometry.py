"""Rib cross-section, nonuniform mesh and permittivity rasterization.

Coordinates (all lengths in nm):

* ``h`` -- horizontal transverse axis, along the crystal optic axis Z of the
  X-cut film. The rib is centred at ``h = 0``.
* ``v`` -- vertical axis, along crystal X. ``v = 0`` is the LN/silica
  interface, ``v = film_thickness`` the top of the rib.
* propagation is along crystal Y.

The film tensor is therefore diagonal with ``eps_h = n_e**2`` and
``eps_v = eps_axial = n_o**2``. "TE" modes have dominant ``E_h`` (they see
``n_e``), "TM" modes dominant ``E_v`` (they see ``n_o``).

The mesh is a tensor-product Yee grid: ``E_h`` sits on horizontal edges,
``E_v`` on vertical edges and ``E_axial`` on nodes. Each component gets its
own permittivity, averaged over the dual cell around its location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .materials import MaterialStack

__all__ = [
    "GeometryError",
    "RibGeometry",
    "MeshSpec",
    "MESH_PRESETS",
    "mesh_preset",
    "Mesh",
    "build_mesh",
    "PermittivityGrid",
    "rasterize",
    "ln_area_in_rects",
]


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class RibGeometry:
    """X-cut LNOI rib: top width, etch depth, film thickness (nm), sidewall angle (deg)."""

    width: float
    etch_depth: float
    film_thickness: float
    sidewall_angle: float = 80.0

    def __post_init__(self):
        if not self.width > 0:
            raise GeometryError(f"top width must be > 0, got {self.width}")
        if not self.film_thickness > 0:
            raise GeometryError(f"film thickness must be > 0, got {self.film_thickness}")
        if not 0 < self.etch_depth <= self.film_thickness:
            raise GeometryError(
                f"need 0 < etch_depth <= film_thickness, got h_e={self.etch_depth}, "
                f"h_f={self.film_thickness}"
            )
        if not 0 < self.sidewall_angle <= 90:
            raise GeometryError(f"sidewall angle must be in (0, 90], got {self.sidewall_angle}")

    @property
    def slab_thickness(self) -> float:
        return self.film_thickness - self.etch_depth

    @property
    def cot(self) -> float:
        if self.sidewall_angle == 90:
            return 0.0
        return 1.0 / math.tan(math.radians(self.sidewall_angle))

    @property
    def bottom_width(self) -> float:
        return self.width + 2.0 * self.etch_depth * self.cot

    def half_width_at(self, v):
        """Rib half-width at height ``v`` inside the etched layer."""
        return 0.5 * self.width + (self.film_thickness - np.asarray(v, dtype=float)) * self.cot

    def ln_area(self, half_domain: float) -> float:
        """Exact LN area (nm^2) of rib plus residual slab in ``|h| <= half_domain``."""
        trapezoid = 0.5 * (self.width + self.bottom_width) * self.etch_depth
        return trapezoid + 2.0 * half_domain * self.slab_thickness

    def with_(self, **changes) -> "RibGeometry":
        return replace(self, **changes)


@dataclass(frozen=True)
class MeshSpec:
    """Nonuniform mesh controls (nm).

    ``fine_step`` applies in a box around the rib that covers the whole film
    height; cells grow geometrically by ``growth`` up to ``max_step`` outside.
    """

    fine_step: float = 10.0
    max_step: float = 80.0
    growth: float = 1.15
    lateral_margin: float = 3000.0
    substrate_margin: float = 1000.0
    cover_margin: float = 1000.0
    lateral_pad: float = 400.0
    vertical_pad: float = 150.0
    staircase: bool = False
    name: str = "custom"

    def validate(self):
        if not 0 < self.fine_step <= 50:
            raise GeometryError(f"fine_step must be in (0, 50] nm, got {self.fine_step}")
        if self.max_step < self.fine_step:
            raise GeometryError("max_step must be >= fine_step")
        if self.growth < 1:
            raise GeometryError("growth must be >= 1")
        if self.lateral_margin < 1000:
            raise GeometryError("lateral margin must be >= 1000 nm")
        if self.substrate_margin < 1000 or self.cover_margin < 1000:
            raise GeometryError("vertical cladding margins must be >= 1000 nm")


MESH_PRESETS = {
    "fine": MeshSpec(fine_step=5.0, max_step=60.0, name="fine"),
    "default": MeshSpec(fine_step=10.0, name="default"),
    "sweep": MeshSpec(fine_step=15.0, max_step=100.0, growth=1.2, name="sweep"),
    "coarse": MeshSpec(fine_step=25.0, max_step=120.0, growth=1.25, name="coarse"),
}


def mesh_preset(name: str, **overrides) -> MeshSpec:
    try:
        spec = MESH_PRESETS[name]
    except KeyError:
        raise GeometryError(f"unknown mesh preset {name!r}; have {sorted(MESH_PRESETS)}") from None
    return replace(spec, **overrides) if overrides else spec


def _fill_segment(a: float, b: float, step: float) -> np.ndarray:
    n = max(1, math.ceil((b - a) / step - 1e-9))
    return np.linspace(a, b, n + 1)


def _graded(start: float, end: float, first: float, growth: float, max_step: float) -> np.ndarray:
    """Nodes from ``start`` to ``end`` with steps growing from ``first``."""
    length = abs(end - start)
    if length == 0:
        return np.array([start])
    steps = []
    s = first
    total = 0.0
    while total < length:
        s = min(s * growth, max_step)
        steps.append(s)
        total += s
    steps = np.array(steps) * (length / total)
    nodes = start + math.copysign(1.0, end - start) * np.concatenate([[0.0], np.cumsum(steps)])
    nodes[-1] = end
    return nodes


def _fine_axis(points, step):
    points = sorted(set(float(p) for p in points))
    parts = [_fill_segment(a, b, step)[:-1] for a, b in zip(points[:-1], points[1:])]
    return np.concatenate(parts + [[points[-1]]])


@dataclass(frozen=True)
class Mesh:
    """Node coordinates (nm) of a tensor-product grid."""

    h: np.ndarray
    v: np.ndarray
    spec: MeshSpec = field(default_factory=MeshSpec)

    @property
    def dh(self):
        return np.diff(self.h)

    @property
    def dv(self):
        return np.diff(self.v)

    @property
    def hc(self):
        return 0.5 * (self.h[1:] + self.h[:-1])

    @property
    def vc(self):
        return 0.5 * (self.v[1:] + self.v[:-1])

    @property
    def shape(self):
        return len(self.h) - 1, len(self.v) - 1


def build_mesh(geometry: RibGeometry, spec: MeshSpec | None = None) -> Mesh:
    """Mirror-symmetric nonuniform mesh with nodes on every material interface."""
    spec = spec or MESH_PRESETS["default"]
    spec.validate()
    g = geometry
    half_bottom = 0.5 * g.bottom_width
    fine_half = half_bottom + spec.lateral_pad
    half_domain = half_bottom + spec.lateral_margin
    if fine_half >= half_domain:
        fine_half = half_domain
    right_fine = _fine_axis([0.0, 0.5 * g.width, half_bottom, fine_half], spec.fine_step)
    right = right_fine
    if fine_half < half_domain:
        right = np.concatenate(
            [right_fine, _graded(fine_half, half_domain, spec.fine_step, spec.growth, spec.max_step)[1:]]
        )
    h = np.concatenate([-right[::-1], right[1:]])

    v_lo = -min(spec.vertical_pad, spec.substrate_margin)
    v_hi = g.film_thickness + min(spec.vertical_pad, spec.cover_margin)
    core = _fine_axis([v_lo, 0.0, g.slab_thickness, g.film_thickness, v_hi], spec.fine_step)
    below = _graded(v_lo, -spec.substrate_margin, spec.fine_step, spec.growth, spec.max_step)[::-1]
    above = _graded(v_hi, g.film_thickness + spec.cover_margin, spec.fine_step, spec.growth, spec.max_step)
    v = np.concatenate([below[:-1], core, above[1:]])
    if np.any(np.diff(h) <= 0) or np.any(np.diff(v) <= 0):
        raise GeometryError("degenerate mesh (non-increasing nodes)")
    return Mesh(h=h, v=v, spec=spec)


def ln_area_in_rects(g: RibGeometry, h0, h1, v0, v1) -> np.ndarray:
    """Exact LN area inside each axis-aligned rectangle ``[h0,h1] x [v0,v1]``.

    The LN width at fixed height is piecewise linear in ``v``; the integral is
    taken with the trapezoid rule between all kink heights, which is exact.
    """
    h0, h1, v0, v1 = (np.asarray(a, dtype=float) for a in np.broadcast_arrays(h0, h1, v0, v1))
    # residual slab
    slab = np.clip(np.minimum(v1, g.slab_thickness) - np.maximum(v0, 0.0), 0.0, None) * (h1 - h0)
    lo = np.maximum(v0, g.slab_thickness)
    hi = np.minimum(v1, g.film_thickness)
    active = hi > lo
    lo = np.where(active, lo, 0.0)
    hi = np.where(active, hi, 0.0)
    tan = math.tan(math.radians(g.sidewall_angle)) if g.sidewall_angle < 90 else None
    pts = [lo, hi]
    if tan is not None:
        for edge in (h0, h1):
            vk = g.film_thickness - (np.abs(edge) - 0.5 * g.width) * tan
            pts.append(np.clip(vk, lo, hi))
    pts = np.sort(np.stack(pts, axis=-1), axis=-1)
    a = g.half_width_at(pts)
    width = np.clip(np.minimum(h1[..., None], a) - np.maximum(h0[..., None], -a), 0.0, None)
    rib = np.sum(0.5 * (width[..., 1:] + width[..., :-1]) * np.diff(pts, axis=-1), axis=-1)
    return slab + np.where(active, rib, 0.0)


def _sidewall_cut(g: RibGeometry, h0, h1, v0, v1) -> np.ndarray:
    lo = np.maximum(v0, g.slab_thickness)
    hi = np.minimum(v1, g.film_thickness)
    a_max = g.half_width_at(lo)
    a_min = g.half_width_at(hi)
    right = (h1 >= a_min) & (h0 <= a_max)
    left = (h0 <= -a_min) & (h1 >= -a_max)
    return (hi > lo) & (right | left)


@dataclass(frozen=True)
class PermittivityGrid:
    """Per-component diagonal permittivity on a Yee mesh.

    ``eps_h`` has shape ``(Nh, Nv+1)`` (horizontal edges), ``eps_v`` shape
    ``(Nh+1, Nv)`` (vertical edges), ``eps_axial`` shape ``(Nh+1, Nv+1)`` (nodes).
    ``ln_fraction`` is the LN area fraction of each primary cell ``(Nh, Nv)``.
    """

    mesh: Mesh
    wavelength: float
    eps_h: np.ndarray
    eps_v: np.ndarray
    eps_axial: np.ndarray
    ln_fraction: np.ndarray
    geometry: RibGeometry | None = None
    indices: dict = field(default_factory=dict)

    @property
    def tensor(self):
        """``(eps_xx, eps_yy, eps_zz)`` in crystal axes: X vertical, Y propagation, Z horizontal."""
        return self.eps_v, self.eps_axial, self.eps_h

    def rib_row_widths(self) -> np.ndarray:
        """LN width (nm) of each cell row, from the cell area fractions."""
        return (self.ln_fraction * self.mesh.dh[:, None]).sum(axis=0)

    def ln_area(self) -> float:
        m = self.mesh
        return float(np.sum(self.ln_fraction * m.dh[:, None] * m.dv[None, :]))

    def cell_eps(self, component: str = "h") -> np.ndarray:
        """Component permittivity averaged onto primary cell centres (for display)."""
        if component == "h":
            e = self.eps_h
            return 0.5 * (e[:, 1:] + e[:, :-1])
        if component == "v":
            e = self.eps_v
            return 0.5 * (e[1:, :] + e[:-1, :])
        e = self.eps_axial
        return 0.25 * (e[1:, 1:] + e[:-1, 1:] + e[1:, :-1] + e[:-1, :-1])

    def to_npz(self, path):
        m = self.mesh
        np.savez(
            path,
            h=m.h,
            v=m.v,
            eps_h=self.eps_h,
            eps_v=self.eps_v,
            eps_axial=self.eps_axial,
            ln_fraction=self.ln_fraction,
            wavelength_nm=self.wavelength,
        )


def _dual_bounds(nodes: np.ndarray):
    centres = 0.5 * (nodes[1:] + nodes[:-1])
    lo = np.concatenate([[nodes[0]], centres])
    hi = np.concatenate([centres, [nodes[-1]]])
    return lo, hi


def rasterize(
    geometry: RibGeometry,
    stack: MaterialStack,
    wavelength: float,
    mesh: Mesh | MeshSpec | str | None = None,
) -> PermittivityGrid:
    """Sample the rib cross-section onto a Yee grid at ``wavelength`` (nm).

    Sloped walls and interfaces that do not coincide with mesh lines use
    dielectric averaging: for each field component ``d`` with interface normal
    ``n``, ``1/eps_dd = n_d**2 <1/eps> + (1 - n_d**2) / <eps>``.
    """
    if isinstance(mesh, str):
        mesh = mesh_preset(mesh)
    if not isinstance(mesh, Mesh):
        mesh = build_mesh(geometry, mesh)
    g = geometry
    idx = stack.indices(wavelength * 1e-3)
    eps_sub = idx["n_sub"] ** 2
    eps_cov = idx["n_cov"] ** 2
    eps_film = {"h": idx["n_e"] ** 2, "v": idx["n_o"] ** 2, "a": idx["n_o"] ** 2}

    h, v = mesh.h, mesh.v
    hd0, hd1 = _dual_bounds(h)
    vd0, vd1 = _dual_bounds(v)
    rects = {
        "h": (h[:-1], h[1:], vd0, vd1),
        "v": (hd0, hd1, v[:-1], v[1:]),
        "a": (hd0, hd1, vd0, vd1),
    }
    points = {
        "h": (mesh.hc, v),
        "v": (h, mesh.vc),
        "a": (h, v),
    }
    out = {}
    for comp, (a0, a1, b0, b1) in rects.items():
        H0, V0 = np.meshgrid(a0, b0, indexing="ij")
        H1, V1 = np.meshgrid(a1, b1, indexing="ij")
        if mesh.spec.staircase:
            P, Q = np.meshgrid(*points[comp], indexing="ij")
            f_ln = _inside_ln(g, P, Q).astype(float)
            f_sub = (Q < 0).astype(float)
            f_cov = 1.0 - f_ln - f_sub
            out[comp] = f_ln * eps_film[comp] + f_sub * eps_sub + f_cov * eps_cov
            continue
        area = (H1 - H0) * (V1 - V0)
        f_ln = ln_area_in_rects(g, H0, H1, V0, V1) / area
        f_sub = np.clip(np.minimum(V1, 0.0) - V0, 0.0, None) * (H1 - H0) / area
        f_cov = np.clip(1.0 - f_ln - f_sub, 0.0, 1.0)
        mean = f_ln * eps_film[comp] + f_sub * eps_sub + f_cov * eps_cov
        mean_inv = f_ln / eps_film[comp] + f_sub / eps_sub + f_cov / eps_cov
        if comp == "a":
            nd2 = np.zeros_like(mean)
        else:
            wall = _sidewall_cut(g, H0, H1, V0, V1)
            s2 = math.sin(math.radians(g.sidewall_angle)) ** 2
            if comp == "h":
                nd2 = np.where(wall, s2, 0.0)
            else:
                nd2 = np.where(wall, 1.0 - s2, 1.0)
        out[comp] = 1.0 / (nd2 * mean_inv + (1.0 - nd2) / mean)

    Hc0, Vc0 = np.meshgrid(h[:-1], v[:-1], indexing="ij")
    Hc1, Vc1 = np.meshgrid(h[1:], v[1:], indexing="ij")
    ln_frac = ln_area_in_rects(g, Hc0, Hc1, Vc0, Vc1) / ((Hc1 - Hc0) * (Vc1 - Vc0))
    return PermittivityGrid(
        mesh=mesh,
        wavelength=float(wavelength),
        eps_h=out["h"],
        eps_v=out["v"],
        eps_axial=out["a"],
        ln_fraction=ln_frac,
        geometry=g,
        indices=idx,
    )


def _inside_ln(g: RibGeometry, hh, vv):
    slab = (vv >= 0) & (vv < g.slab_thickness)
    rib = (vv >= g.slab_thickness) & (vv < g.film_thickness) & (np.abs(hh) <= g.half_width_at(vv))
    return slab | rib

