"""Full-vector finite-difference eigenmode solver for diagonal-anisotropic guides.

The transverse electric field ``(E_h, E_v)`` on a Yee grid satisfies

    beta^2 E_t = k0^2 eps_t E_t + grad_t[ eps_a^-1 div_t(eps_t E_t) ] - curl_t curl_t E_t

with perfect-electric-conductor walls on all four sides. The operator is
assembled from forward/backward differences on the nonuniform mesh and the
few eigenvalues nearest ``(k0 * search_index)^2`` are found with shift-invert
Arnoldi (ARPACK via :func:`scipy.sparse.linalg.eigs`, sparse LU inside).
Lengths are in nm; ``n_eff = beta / k0``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import ArpackNoConvergence, eigs

from .geometry import Mesh, MeshSpec, PermittivityGrid, RibGeometry, build_mesh, rasterize
from .materials import MaterialStack
from .slab import fundamental_index

log = logging.getLogger(__name__)

__all__ = [
    "ConvergenceError",
    "NoModeError",
    "TrackingError",
    "ModeSolution",
    "DispersionCurve",
    "solve_modes",
    "find_modes",
    "select_mode",
    "overlap",
    "group_index",
    "build_dispersion_curve",
    "higher_order_margin",
    "single_mode_scan",
]

SEED = 20240607


class ConvergenceError(RuntimeError):
    pass


class NoModeError(ConvergenceError):
    """No eigenpair above the substrate light line (the structure guides nothing)."""


class TrackingError(RuntimeError):
    pass


@dataclass(eq=False)
class ModeSolution:
    """One eigenmode. Field arrays live on the Yee sites of ``mesh``.

    ``e_h``: (Nh, Nv+1) real, ``e_v``: (Nh+1, Nv) real, ``e_axial``: nodes,
    purely imaginary. ``h_h`` / ``h_v`` / ``h_axial`` are the magnetic field
    scaled by the vacuum impedance. Fields carry unit power
    ``1/2 Re integral (E x H*) . z dA`` (dA in nm^2).
    """

    n_eff: float
    wavelength: float
    mesh: Mesh
    e_h: np.ndarray
    e_v: np.ndarray
    e_axial: np.ndarray
    h_h: np.ndarray
    h_v: np.ndarray
    h_axial: np.ndarray
    polarization_fraction: float
    residual: float
    core_fraction: float = float("nan")
    label: str = ""
    order: int = -1
    nodes: tuple[int, int] = (0, 0)
    guided: bool | None = None
    slab_index: float | None = None

    @property
    def polarization(self) -> str:
        return "TE" if self.polarization_fraction > 0.5 else "TM"

    @property
    def beta(self) -> float:
        return 2 * math.pi * self.n_eff / self.wavelength

    def power(self) -> float:
        return _power(self.mesh, self.e_h, self.e_v, self.h_h, self.h_v)

    def intensity(self) -> np.ndarray:
        """|E|^2 (all three components) averaged onto primary cell centres."""
        eh2 = np.abs(self.e_h) ** 2
        ev2 = np.abs(self.e_v) ** 2
        ea2 = np.abs(self.e_axial) ** 2
        return (
            0.5 * (eh2[:, 1:] + eh2[:, :-1])
            + 0.5 * (ev2[1:, :] + ev2[:-1, :])
            + 0.25 * (ea2[1:, 1:] + ea2[:-1, 1:] + ea2[1:, :-1] + ea2[:-1, :-1])
        )

    def summary(self) -> dict:
        return {
            "label": self.label,
            "n_eff": self.n_eff,
            "wavelength_nm": self.wavelength,
            "polarization_fraction": self.polarization_fraction,
            "core_fraction": self.core_fraction,
            "guided": self.guided,
            "nodes": list(self.nodes),
        }

    def to_npz(self, path):
        m = self.mesh
        np.savez(
            path,
            h=m.h,
            v=m.v,
            e_h=self.e_h,
            e_v=self.e_v,
            e_axial=self.e_axial,
            h_h=self.h_h,
            h_v=self.h_v,
            h_axial=self.h_axial,
            n_eff=self.n_eff,
            wavelength_nm=self.wavelength,
            label=self.label,
        )


# ---------------------------------------------------------------------------
# operator assembly


def _forward(d: np.ndarray) -> sp.csr_matrix:
    """Nodes (n+1) -> cells (n)."""
    n = len(d)
    inv = 1.0 / d
    return sp.diags([-inv, inv], [0, 1], shape=(n, n + 1), format="csr")


def _backward(d: np.ndarray) -> sp.csr_matrix:
    """Cells (n) -> nodes (n+1); boundary rows use the half spacing."""
    n = len(d)
    dn = np.empty(n + 1)
    dn[1:-1] = 0.5 * (d[1:] + d[:-1])
    dn[0], dn[-1] = 0.5 * d[0], 0.5 * d[-1]
    inv = 1.0 / dn
    return sp.diags([inv[:n], -inv[1:]], [0, -1], shape=(n + 1, n), format="csr")


@dataclass
class _Operators:
    A: sp.csr_matrix
    k0: float
    keep_h: np.ndarray
    keep_v: np.ndarray
    curl: sp.csr_matrix  # [E_h; E_v] (full) -> cells
    div: sp.csr_matrix  # [E_h; E_v] (full) -> nodes, includes eps_t and 1/eps_a, walls zeroed
    grad_h: sp.csr_matrix  # nodes -> E_h sites
    grad_v: sp.csr_matrix  # nodes -> E_v sites
    fwd_v_nodes: sp.csr_matrix  # nodes -> E_v sites (d/dv)
    fwd_h_nodes: sp.csr_matrix  # nodes -> E_h sites (d/dh)
    shape_h: tuple
    shape_v: tuple


def _assemble(grid: PermittivityGrid) -> _Operators:
    m = grid.mesh
    dh, dv = m.dh, m.dv
    nh, nv = len(dh), len(dv)
    Ih, Iv = sp.identity(nh, format="csr"), sp.identity(nv, format="csr")
    Ih1, Iv1 = sp.identity(nh + 1, format="csr"), sp.identity(nv + 1, format="csr")
    Fh, Fv = _forward(dh), _forward(dv)
    Bh, Bv = _backward(dh), _backward(dv)

    # curl_z: cells <- (E_h, E_v)
    curl = sp.hstack([-sp.kron(Ih, Fv), sp.kron(Fh, Iv)], format="csr")
    # transverse curl of a cell scalar back onto E sites
    back = sp.vstack([-sp.kron(Ih, Bv), sp.kron(Bh, Iv)], format="csr")
    eps_t = np.concatenate([grid.eps_h.ravel(), grid.eps_v.ravel()])
    node_mask = np.zeros((nh + 1, nv + 1))
    node_mask[1:-1, 1:-1] = 1.0
    div = sp.hstack([sp.kron(Bh, Iv1), sp.kron(Ih1, Bv)], format="csr")
    div = sp.diags(node_mask.ravel() / grid.eps_axial.ravel()) @ div @ sp.diags(eps_t)
    grad_h = sp.kron(Fh, Iv1, format="csr")
    grad_v = sp.kron(Ih1, Fv, format="csr")
    grad = sp.vstack([grad_h, grad_v], format="csr")

    k0 = 2 * math.pi / grid.wavelength
    A_full = (k0**2) * sp.diags(eps_t) + grad @ div + back @ curl

    keep_h = np.zeros((nh, nv + 1), bool)
    keep_h[:, 1:-1] = True
    keep_v = np.zeros((nh + 1, nv), bool)
    keep_v[1:-1, :] = True
    keep = np.flatnonzero(np.concatenate([keep_h.ravel(), keep_v.ravel()]))
    A = A_full.tocsr()[keep][:, keep].tocsc()
    return _Operators(
        A=A,
        k0=k0,
        keep_h=keep_h,
        keep_v=keep_v,
        curl=curl,
        div=div,
        grad_h=grad_h,
        grad_v=grad_v,
        fwd_v_nodes=grad_v,
        fwd_h_nodes=grad_h,
        shape_h=(nh, nv + 1),
        shape_v=(nh + 1, nv),
    )


def _site_areas(mesh: Mesh):
    dh, dv = mesh.dh, mesh.dv
    dhn = np.concatenate([[0.5 * dh[0]], 0.5 * (dh[1:] + dh[:-1]), [0.5 * dh[-1]]])
    dvn = np.concatenate([[0.5 * dv[0]], 0.5 * (dv[1:] + dv[:-1]), [0.5 * dv[-1]]])
    return np.outer(dh, dvn), np.outer(dhn, dv)


def _power(mesh, e_h, e_v, h_h, h_v) -> float:
    area_h, area_v = _site_areas(mesh)
    return float(0.5 * np.real(np.sum(e_h * np.conj(h_v) * area_h) - np.sum(e_v * np.conj(h_h) * area_v)))


def _fields(ops: _Operators, grid: PermittivityGrid, vec: np.ndarray, beta2: float):
    """Full field set from the reduced eigenvector; returns un-normalised arrays."""
    nh_sites = int(ops.keep_h.sum())
    e_h = np.zeros(ops.shape_h)
    e_v = np.zeros(ops.shape_v)
    e_h[ops.keep_h] = vec[:nh_sites]
    e_v[ops.keep_v] = vec[nh_sites:]
    et = np.concatenate([e_h.ravel(), e_v.ravel()])
    beta = math.sqrt(beta2)
    k0 = ops.k0
    phi = ops.div @ et  # nodes
    e_axial = (-1j / beta) * phi
    # H scaled by eta0:  H = curl E / (-i k0), d/dz -> -i beta
    dez_dv = ops.grad_v @ e_axial.ravel()
    dez_dh = ops.grad_h @ e_axial.ravel()
    # H_h on E_v sites, H_v on E_h sites
    h_h = (dez_dv + 1j * beta * e_v.ravel()) / (-1j * k0)
    h_v = (-1j * beta * e_h.ravel() - dez_dh) / (-1j * k0)
    h_axial = (ops.curl @ et) / (-1j * k0)
    m = grid.mesh
    nh, nv = m.shape
    return (
        e_h,
        e_v,
        e_axial.reshape(nh + 1, nv + 1),
        h_h.reshape(ops.shape_v),
        h_v.reshape(ops.shape_h),
        h_axial.reshape(nh, nv),
    )


def _nodal_count(values: np.ndarray, threshold: float = 0.05) -> int:
    vmax = np.max(np.abs(values))
    if vmax == 0:
        return 0
    sig = values[np.abs(values) > threshold * vmax]
    return int(np.sum(np.signbit(sig[1:]) != np.signbit(sig[:-1])))


def _core_fraction(mode_e_h, mode_e_v, grid: PermittivityGrid) -> float:
    g = grid.geometry
    if g is None:
        return float("nan")
    m = grid.mesh
    area_h, area_v = _site_areas(m)
    half = 0.5 * g.bottom_width
    Hh, Vh = np.meshgrid(m.hc, m.v, indexing="ij")
    Hv, Vv = np.meshgrid(m.h, m.vc, indexing="ij")
    in_h = (np.abs(Hh) <= half) & (Vh >= 0) & (Vh <= g.film_thickness)
    in_v = (np.abs(Hv) <= half) & (Vv >= 0) & (Vv <= g.film_thickness)
    wh = mode_e_h**2 * area_h
    wv = mode_e_v**2 * area_v
    return float((wh[in_h].sum() + wv[in_v].sum()) / (wh.sum() + wv.sum()))


def solve_modes(
    grid: PermittivityGrid,
    wavelength: float | None = None,
    count: int = 4,
    search_index: float | None = None,
    extra: int = 4,
    tol: float = 1e-13,
    residual_tol: float = 1e-8,
) -> list[ModeSolution]:
    """Eigenmodes of ``grid`` with ``n_eff`` nearest below ``search_index``.

    Returns up to ``count`` modes sorted by descending ``n_eff``; modes outside
    ``(max cladding index, max film index)`` are discarded. Labels (``TE0``,
    ``TM0``, ``TE1``...) rank modes within each polarization class.
    """
    if wavelength is not None and not math.isclose(wavelength, grid.wavelength):
        raise ValueError(f"grid rasterized at {grid.wavelength} nm, asked for {wavelength} nm")
    if count < 1:
        raise ValueError("count must be >= 1")
    idx = grid.indices
    n_hi = max(idx.get("n_o", 0), idx.get("n_e", 0)) or math.sqrt(
        max(grid.eps_h.max(), grid.eps_v.max(), grid.eps_axial.max())
    )
    n_lo = max(idx["n_sub"], idx["n_cov"]) if idx else 1.0
    if search_index is None:
        search_index = n_hi
    if not n_lo < search_index <= n_hi + 1e-9:
        raise ValueError(f"search_index {search_index} outside physical bracket ({n_lo}, {n_hi}]")

    ops = _assemble(grid)
    k0 = ops.k0
    n_unknowns = ops.A.shape[0]
    nev = min(count + extra, n_unknowns - 2)
    sigma = (k0 * search_index) ** 2
    v0 = np.random.default_rng(SEED).standard_normal(n_unknowns)
    try:
        vals, vecs = eigs(ops.A, k=nev, sigma=sigma, which="LM", v0=v0, tol=tol, maxiter=5000)
    except ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"ARPACK did not converge: {len(exc.eigenvalues)} of {nev} eigenpairs "
            f"near n={search_index:.5f} at {grid.wavelength} nm ({n_unknowns} unknowns)"
        ) from exc

    modes = []
    area_h, area_v = _site_areas(grid.mesh)
    for lam, vec in zip(vals, vecs.T):
        beta2 = float(lam.real)
        if beta2 <= 0:
            continue
        n_eff = math.sqrt(beta2) / k0
        if not (n_lo < n_eff < n_hi) or n_eff > search_index:
            continue
        # ARPACK vectors of a real operator: rotate to real
        j = np.argmax(np.abs(vec))
        vec = np.real(vec * np.exp(-1j * np.angle(vec[j])))
        res = float(np.linalg.norm(ops.A @ vec - beta2 * vec) / (abs(beta2) * np.linalg.norm(vec)))
        if res > residual_tol:
            raise ConvergenceError(
                f"eigen-residual {res:.2e} > {residual_tol:.0e} for n_eff={n_eff:.6f} at {grid.wavelength} nm"
            )
        e_h, e_v, e_a, h_h, h_v, h_a = _fields(ops, grid, vec, beta2)
        p = _power(grid.mesh, e_h, e_v, h_h, h_v)
        s = 1.0 / math.sqrt(p)
        e_h, e_v, e_a, h_h, h_v, h_a = (a * s for a in (e_h, e_v, e_a, h_h, h_v, h_a))
        # fix the sign so the dominant transverse component is positive at its peak
        dom = e_h if np.sum(e_h**2 * area_h) >= np.sum(e_v**2 * area_v) else e_v
        if dom.flat[np.argmax(np.abs(dom))] < 0:
            e_h, e_v, e_a, h_h, h_v, h_a = (-a for a in (e_h, e_v, e_a, h_h, h_v, h_a))
        wh = float(np.sum(e_h**2 * area_h))
        wv = float(np.sum(e_v**2 * area_v))
        frac = wh / (wh + wv)
        dom = e_h if frac > 0.5 else e_v
        i, jv = np.unravel_index(np.argmax(np.abs(dom)), dom.shape)
        nodes = (_nodal_count(dom[:, jv]), _nodal_count(dom[i, :]))
        modes.append(
            ModeSolution(
                n_eff=n_eff,
                wavelength=grid.wavelength,
                mesh=grid.mesh,
                e_h=e_h,
                e_v=e_v,
                e_axial=e_a,
                h_h=h_h,
                h_v=h_v,
                h_axial=h_a,
                polarization_fraction=frac,
                residual=res,
                core_fraction=_core_fraction(e_h, e_v, grid),
                nodes=nodes,
            )
        )
    modes.sort(key=lambda md: -md.n_eff)
    modes = modes[:count]
    if not modes:
        raise NoModeError(
            f"no eigenpair with n_eff in ({n_lo:.4f}, {min(search_index, n_hi):.4f}) at {grid.wavelength} nm"
        )
    rank = {"TE": 0, "TM": 0}
    for md in modes:
        md.order = rank[md.polarization]
        md.label = f"{md.polarization}{md.order}"
        rank[md.polarization] += 1
    return modes


def find_modes(
    geometry: RibGeometry,
    stack: MaterialStack,
    wavelength: float,
    mesh: Mesh | MeshSpec | str | None = None,
    count: int = 8,
    **kwargs,
) -> list[ModeSolution]:
    """Rasterize, solve and classify lateral guidance against the residual slab.

    A mode is ``guided`` when its index exceeds the fundamental slab index of
    the same polarization (thickness ``h_f - h_e``), or the substrate index when
    that slab is below cutoff. Labels count guided modes only; unguided modes
    (box-discretised slab continuum) are labelled ``slab``.
    """
    grid = rasterize(geometry, stack, wavelength, mesh)
    modes = solve_modes(grid, count=count, **kwargs)
    n_sub = grid.indices["n_sub"]
    refs = {}
    for pol in ("TE", "TM"):
        ns = fundamental_index(stack, geometry.slab_thickness, wavelength, pol)
        refs[pol] = ns if ns is not None else n_sub
    rank = {"TE": 0, "TM": 0}
    for md in modes:
        md.slab_index = refs[md.polarization]
        md.guided = md.n_eff > md.slab_index
        if md.guided:
            md.order = rank[md.polarization]
            md.label = f"{md.polarization}{md.order}"
            rank[md.polarization] += 1
        else:
            md.order = -1
            md.label = f"slab-{md.polarization}"
    return modes


def select_mode(modes, selector: str, min_core: float = 0.3) -> ModeSolution:
    """Pick a mode by label such as ``"TM0"``.

    A fundamental label is only trusted when the mode is confined to the rib
    (``core_fraction >= min_core``). Otherwise the best-confined mode weighted
    by its share of the requested polarization is returned, which is how a
    leaky rib mode hybridised with the slab continuum of the bounding box
    shows up.
    """
    pol, order = selector[:2], int(selector[2:] or 0)
    for md in modes:
        if md.label == selector and (order > 0 or md.core_fraction >= min_core):
            return md
    if order == 0:
        cands = [m for m in modes if _pol_weight(m, pol) >= 0.3]
        if cands:
            best = max(cands, key=lambda m: m.core_fraction * _pol_weight(m, pol))
            if best.core_fraction * _pol_weight(best, pol) >= 0.1:
                return best
    raise LookupError(f"no mode {selector!r} among {[m.label for m in modes]}")


def _pol_weight(m: ModeSolution, pol: str) -> float:
    return m.polarization_fraction if pol == "TE" else 1.0 - m.polarization_fraction


def overlap(a: ModeSolution, b: ModeSolution) -> float:
    """Normalised |<E_t^a, E_t^b>| on a shared mesh."""
    if a.e_h.shape != b.e_h.shape:
        raise ValueError("modes live on different meshes")
    area_h, area_v = _site_areas(a.mesh)
    ab = np.sum(a.e_h * b.e_h * area_h) + np.sum(a.e_v * b.e_v * area_v)
    aa = np.sum(a.e_h**2 * area_h) + np.sum(a.e_v**2 * area_v)
    bb = np.sum(b.e_h**2 * area_h) + np.sum(b.e_v**2 * area_v)
    return float(abs(ab) / math.sqrt(aa * bb))


def _track(reference: ModeSolution, modes, threshold: float):
    best = max(modes, key=lambda m: overlap(reference, m))
    ov = overlap(reference, best)
    if ov < threshold:
        raise TrackingError(
            f"lost {reference.label or 'mode'} at {best.wavelength} nm: best overlap {ov:.3f} < {threshold}"
        )
    return best


class _Solver:
    """Fixed mesh for one geometry, reused across wavelengths."""

    def __init__(self, geometry, stack, mesh=None, count=8):
        self.geometry = geometry
        self.stack = stack
        if isinstance(mesh, Mesh):
            self.mesh = mesh
        else:
            from .geometry import mesh_preset

            spec = mesh_preset(mesh) if isinstance(mesh, str) else mesh
            self.mesh = build_mesh(geometry, spec)
        self.count = count

    def modes(self, wavelength):
        return find_modes(self.geometry, self.stack, wavelength, self.mesh, count=self.count)


def group_index(
    geometry: RibGeometry,
    stack: MaterialStack,
    selector: str,
    wavelength: float,
    delta: float = 1.0,
    mesh=None,
    count: int = 8,
    threshold: float = 0.9,
    richardson: bool = False,
) -> float:
    """Group index ``n_eff - lambda dn_eff/dlambda`` by central difference (nm)."""
    solver = _Solver(geometry, stack, mesh, count)
    ref = select_mode(solver.modes(wavelength), selector)

    def ng(step):
        lo = _track(ref, solver.modes(wavelength - step), threshold)
        hi = _track(ref, solver.modes(wavelength + step), threshold)
        return ref.n_eff - wavelength * (hi.n_eff - lo.n_eff) / (2 * step)

    value = ng(delta)
    if richardson:
        coarse = ng(2 * delta)
        if abs(coarse - value) > 1e-3:
            warnings.warn(
                f"group index step sensitivity: {value:.5f} (step {delta}) vs {coarse:.5f} (step {2 * delta})",
                stacklevel=2,
            )
    return value


@dataclass
class DispersionCurve:
    """Sampled ``n_eff(lambda)`` of one tracked mode with a C2 cubic interpolant."""

    wavelengths: np.ndarray  # nm, strictly increasing
    n_eff: np.ndarray
    selector: str = ""
    geometry: RibGeometry | None = None
    spline: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        lam = np.asarray(self.wavelengths, dtype=float)
        n = np.asarray(self.n_eff, dtype=float)
        if lam.ndim != 1 or lam.shape != n.shape:
            raise ValueError("wavelengths and n_eff must be 1-D and equally long")
        if len(lam) < 5:
            raise ValueError("a dispersion curve needs at least 5 samples")
        if np.any(np.diff(lam) <= 0):
            raise ValueError("sample wavelengths must be strictly increasing")
        self.wavelengths, self.n_eff = lam, n
        self.spline = CubicSpline(lam, n, bc_type="not-a-knot")

    @property
    def range(self) -> tuple[float, float]:
        return float(self.wavelengths[0]), float(self.wavelengths[-1])

    def _check(self, lam):
        lo, hi = self.range
        lam = np.asarray(lam, dtype=float)
        if np.any(lam < lo - 1e-9) or np.any(lam > hi + 1e-9):
            raise ValueError(
                f"{self.selector or 'curve'}: wavelength outside sampled range [{lo}, {hi}] nm"
            )
        return lam

    def __call__(self, wavelength):
        return self.spline(self._check(wavelength))

    def group_index(self, wavelength):
        lam = self._check(wavelength)
        return self.spline(lam) - lam * self.spline(lam, 1)

    def wavenumber(self, omega):
        """k (rad/um) at angular frequency ``omega`` (rad/s)."""
        lam_nm = 2 * math.pi * C_NM_PER_S / np.asarray(omega, dtype=float)
        return self(lam_nm) * 2 * math.pi / (lam_nm * 1e-3)

    def to_rows(self):
        return [(float(l), float(n), float(g)) for l, n, g in
                zip(self.wavelengths, self.n_eff, self.group_index(self.wavelengths))]


C_NM_PER_S = 299792458.0e9


def build_dispersion_curve(
    geometry: RibGeometry,
    stack: MaterialStack,
    selector: str,
    wavelength_range: tuple[float, float],
    samples: int = 7,
    mesh=None,
    count: int = 8,
    threshold: float = 0.9,
    wavelengths=None,
) -> DispersionCurve:
    """Solve and track one mode across ``wavelength_range`` (nm).

    The mode is identified by ``selector`` at the centre sample and followed
    outwards by field overlap, so index crossings cannot swap modes.
    """
    if wavelengths is None:
        lo, hi = wavelength_range
        if not hi > lo:
            raise ValueError("wavelength range must be increasing")
        wavelengths = np.linspace(lo, hi, samples)
    lam = np.asarray(wavelengths, dtype=float)
    if np.any(np.diff(lam) <= 0):
        raise ValueError("sample wavelengths must be strictly increasing")
    solver = _Solver(geometry, stack, mesh, count)
    c = len(lam) // 2
    centre = select_mode(solver.modes(lam[c]), selector)
    found = {c: centre}
    for direction in (-1, 1):
        prev = centre
        k = c + direction
        while 0 <= k < len(lam):
            try:
                prev = _track(prev, solver.modes(lam[k]), threshold)
            except TrackingError as exc:
                good = sorted(found)
                raise TrackingError(
                    f"{exc}; last good sample {lam[k - direction]} nm "
                    f"(solved {[float(lam[i]) for i in good]})"
                ) from exc
            found[k] = prev
            k += direction
    n = np.array([found[k].n_eff for k in range(len(lam))])
    return DispersionCurve(lam, n, selector=selector, geometry=geometry)


SINGLEMODE_MESH = {"lateral_margin": 8000.0, "max_step": 120.0}


def higher_order_margin(
    geometry: RibGeometry,
    stack: MaterialStack,
    wavelength: float,
    pol: str = "TM",
    mesh=None,
    count: int = 40,
) -> float:
    """``n_eff - n_slab`` of the first laterally odd ``pol`` rib mode.

    Positive means the order-1 mode is guided, so the rib is multimode in that
    polarization. Near cutoff the order-1 mode spreads far into the slab, so
    the default mesh widens the lateral margin to keep the walls from pulling
    its index down.
    """
    if mesh is None:
        from .geometry import mesh_preset

        mesh = mesh_preset("default", **SINGLEMODE_MESH)
    modes = find_modes(geometry, stack, wavelength, mesh, count=count)
    cands = [m for m in modes if m.polarization == pol and m.nodes[0] == 1]
    if not cands:
        raise LookupError(f"no laterally odd {pol} mode among {len(modes)} solved modes")
    best = max(cands, key=lambda m: m.core_fraction)
    return best.n_eff - best.slab_index


def single_mode_scan(
    geometry: RibGeometry,
    stack: MaterialStack,
    parameter: str,
    values,
    wavelength: float = 775.0,
    pol: str = "TM",
    mesh=None,
    count: int = 40,
):
    """Order-1 margin along ``parameter`` (``width`` or ``etch_depth``).

    Returns ``(rows, transition)`` where rows are ``(value, margin, multimode)``
    and ``transition`` is the linearly interpolated first zero crossing of the
    margin (``None`` when it never changes sign).
    """
    if parameter not in ("width", "etch_depth"):
        raise ValueError("parameter must be 'width' or 'etch_depth'")
    vals = sorted(float(v) for v in values)
    margins = [
        higher_order_margin(geometry.with_(**{parameter: v}), stack, wavelength, pol, mesh, count)
        for v in vals
    ]
    rows = [(v, m, m > 0) for v, m in zip(vals, margins)]
    transition = None
    for (v0, m0), (v1, m1) in zip(zip(vals, margins), zip(vals[1:], margins[1:])):
        if (m0 > 0) != (m1 > 0):
            transition = v0 + (v1 - v0) * m0 / (m0 - m1)
            break
    return rows, transition
