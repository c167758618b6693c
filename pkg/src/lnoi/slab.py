"""Analytic three-layer slab modes (substrate / LN film / cover).

TE slab modes have E in the film plane along the optic axis and see ``n_e``.
TM slab modes have E normal to the film (crystal X) plus a longitudinal
component (crystal Y); both see ``n_o``, so the isotropic TM relation applies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .materials import MaterialStack

__all__ = ["SlabSpec", "slab_mode_indices", "slab_indices", "dispersion_function", "phase_residual"]


@dataclass(frozen=True)
class SlabSpec:
    thickness: float  # nm
    polarization: str  # "TE" | "TM"
    stack: MaterialStack
    wavelength: float  # nm

    def __post_init__(self):
        if self.polarization not in ("TE", "TM"):
            raise ValueError(f"polarization must be TE or TM, got {self.polarization!r}")
        if self.thickness < 0:
            raise ValueError("slab thickness must be >= 0")

    def layer_indices(self) -> tuple[float, float, float]:
        """(film, substrate, cover) indices seen by this polarization."""
        idx = self.stack.indices(self.wavelength * 1e-3)
        n_film = idx["n_e"] if self.polarization == "TE" else idx["n_o"]
        return n_film, idx["n_sub"], idx["n_cov"]


def _decay(n_eff, n_film, n_clad, pol):
    g = np.sqrt(n_eff**2 - n_clad**2)
    return g * (n_film / n_clad) ** 2 if pol == "TM" else g


def dispersion_function(n_eff, n_film, n_sub, n_cov, thickness, wavelength, pol):
    """Pole-free form ``(kappa^2 - p_s p_c) sin(kappa d) - kappa (p_s + p_c) cos(kappa d)``.

    Everything is scaled by ``k0`` so the function is dimensionless.
    """
    k0d = 2 * np.pi * thickness / wavelength
    kappa = np.sqrt(np.maximum(n_film**2 - n_eff**2, 0.0))
    ps = _decay(n_eff, n_film, n_sub, pol)
    pc = _decay(n_eff, n_film, n_cov, pol)
    return (kappa**2 - ps * pc) * np.sin(kappa * k0d) - kappa * (ps + pc) * np.cos(kappa * k0d)


def phase_residual(n_eff, n_film, n_sub, n_cov, thickness, wavelength, pol, order):
    """Transverse resonance residual ``kappa d - atan(p_s/kappa) - atan(p_c/kappa) - m pi``."""
    k0d = 2 * np.pi * thickness / wavelength
    kappa = np.sqrt(n_film**2 - n_eff**2)
    ps = _decay(n_eff, n_film, n_sub, pol)
    pc = _decay(n_eff, n_film, n_cov, pol)
    return kappa * k0d - np.arctan(ps / kappa) - np.arctan(pc / kappa) - order * np.pi


def slab_indices(
    n_film: float,
    n_sub: float,
    n_cov: float,
    thickness: float,
    wavelength: float,
    pol: str,
    brackets: int = 2000,
    xtol: float = 1e-14,
) -> list[float]:
    """All guided effective indices, descending. Lengths in nm."""
    n_clad = max(n_sub, n_cov)
    if n_film <= n_clad:
        raise ValueError("film index must exceed both cladding indices")
    if thickness <= 0:
        return []
    span = n_film - n_clad
    eps = 1e-12 * span
    grid = np.linspace(n_clad + eps, n_film - eps, brackets + 1)
    args = (n_film, n_sub, n_cov, thickness, wavelength, pol)
    vals = dispersion_function(grid, *args)
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(brentq(dispersion_function, a, b, args=args, xtol=xtol, rtol=1e-15))
    return sorted(roots, reverse=True)


def slab_mode_indices(spec: SlabSpec, brackets: int = 2000) -> list[float]:
    """Guided mode indices of a :class:`SlabSpec`, descending (may be empty)."""
    n_film, n_sub, n_cov = spec.layer_indices()
    return slab_indices(n_film, n_sub, n_cov, spec.thickness, spec.wavelength, spec.polarization, brackets)


def fundamental_index(stack: MaterialStack, thickness: float, wavelength: float, pol: str):
    """Fundamental slab index, or ``None`` below cutoff."""
    roots = slab_mode_indices(SlabSpec(thickness, pol, stack, wavelength)) if thickness > 0 else []
    return roots[0] if roots else None


def thickness_table(stack, thicknesses, wavelength, polarizations=("TE", "TM")):
    """Rows ``(thickness, pol, order, n_eff)`` for a thickness sweep."""
    rows = []
    for t in thicknesses:
        for pol in polarizations:
            for m, n in enumerate(slab_mode_indices(SlabSpec(float(t), pol, stack, wavelength))):
                rows.append((float(t), pol, m, n))
    return rows
