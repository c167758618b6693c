"""Sellmeier dispersion models for the LNOI material stack.

Wavelengths are in micrometres throughout this module. Built-in records:

* ``LN_o`` / ``LN_e`` -- congruent lithium niobate, ordinary and extraordinary
  axes (Zelmon, Small and Jundt, JOSA B 14, 3319 (1997)).
* ``SiO2`` -- fused silica (Malitson, JOSA 55, 1205 (1965)).
* ``air`` -- constant n = 1 exactly.

User models can be loaded from TOML coefficient files with :func:`load_model`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

__all__ = [
    "MaterialRangeError",
    "DielectricModel",
    "MaterialStack",
    "refractive_index",
    "builtin",
    "load_model",
    "default_stack",
    "BUILTIN_MODELS",
]

SUPPORTED_FORMS = ("sellmeier", "constant")


class MaterialRangeError(ValueError):
    """Wavelength outside a model's valid range, or on a Sellmeier pole."""


@dataclass(frozen=True)
class DielectricModel:
    """Refractive index n(lambda) of one tensor axis of one material.

    For ``form == "sellmeier"`` the coefficients are ``(A, B1, C1, B2, C2, ...)``
    with ``n**2 = A + sum_k B_k lam**2 / (lam**2 - C_k)`` (lam in um, C_k in um**2).
    For ``form == "constant"`` the single coefficient is the index itself.
    """

    name: str
    coefficients: tuple[float, ...]
    valid_range: tuple[float, float]
    axis_role: str = "isotropic"
    form: str = "sellmeier"

    def __post_init__(self):
        if self.form not in SUPPORTED_FORMS:
            raise ValueError(f"{self.name}: unknown form {self.form!r}")
        if self.axis_role not in ("ordinary", "extraordinary", "isotropic"):
            raise ValueError(f"{self.name}: unknown axis_role {self.axis_role!r}")
        if self.form == "sellmeier" and len(self.coefficients) % 2 != 1:
            raise ValueError(f"{self.name}: sellmeier needs A followed by (B, C) pairs")
        if self.form == "constant" and len(self.coefficients) != 1:
            raise ValueError(f"{self.name}: constant form takes exactly one coefficient")
        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise ValueError(f"{self.name}: bad valid_range {self.valid_range}")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "valid_range", (float(lo), float(hi)))

    @property
    def poles(self) -> tuple[float, ...]:
        if self.form != "sellmeier":
            return ()
        return self.coefficients[2::2]

    def __call__(self, wavelength):
        return refractive_index(self, wavelength)

    def identifier(self) -> str:
        """Short provenance string: name plus a hash of the coefficients."""
        import hashlib

        payload = repr((self.form, self.coefficients, self.valid_range)).encode()
        return f"{self.name}:{hashlib.sha1(payload).hexdigest()[:10]}"


def refractive_index(model: DielectricModel, wavelength):
    """Evaluate ``model`` at ``wavelength`` (um, scalar or array)."""
    lam = np.asarray(wavelength, dtype=float)
    lo, hi = model.valid_range
    if np.any(~np.isfinite(lam)) or np.any(lam < lo) or np.any(lam > hi):
        raise MaterialRangeError(
            f"{model.name}: wavelength {wavelength} um outside valid range [{lo}, {hi}] um"
        )
    if model.form == "constant":
        n = np.full_like(lam, model.coefficients[0])
        return float(n) if n.ndim == 0 else n
    lam2 = lam * lam
    n2 = np.full_like(lam, model.coefficients[0])
    for b, c in zip(model.coefficients[1::2], model.coefficients[2::2]):
        denom = lam2 - c
        if np.any(denom == 0.0):
            raise MaterialRangeError(f"{model.name}: wavelength on Sellmeier pole C={c} um^2")
        n2 = n2 + b * lam2 / denom
    if np.any(n2 <= 0):
        raise MaterialRangeError(f"{model.name}: non-positive n^2 at {wavelength} um")
    n = np.sqrt(n2)
    return float(n) if n.ndim == 0 else n


BUILTIN_MODELS: dict[str, DielectricModel] = {
    "LN_o": DielectricModel(
        "LN_o",
        (1.0, 2.6734, 0.01764, 1.2290, 0.05914, 12.614, 474.6),
        (0.4, 5.0),
        "ordinary",
    ),
    "LN_e": DielectricModel(
        "LN_e",
        (1.0, 2.9804, 0.02047, 0.5981, 0.0666, 8.9543, 416.08),
        (0.4, 5.0),
        "extraordinary",
    ),
    "SiO2": DielectricModel(
        "SiO2",
        (1.0, 0.6961663, 0.0684043**2, 0.4079426, 0.1162414**2, 0.8974794, 9.896161**2),
        (0.21, 6.7),
    ),
    "air": DielectricModel("air", (1.0,), (0.01, 100.0), form="constant"),
}


def builtin(name: str) -> DielectricModel:
    try:
        return BUILTIN_MODELS[name]
    except KeyError:
        raise KeyError(f"no built-in material {name!r}; have {sorted(BUILTIN_MODELS)}") from None


def load_model(path) -> DielectricModel:
    """Load a :class:`DielectricModel` from a TOML coefficient file.

    Expected keys::

        name = "my_glass"
        form = "sellmeier"            # or "constant"
        coefficients = [1.0, 0.69, 0.0047, ...]
        valid_range_um = [0.3, 2.0]
        axis_role = "isotropic"       # optional
    """
    data = tomllib.loads(Path(path).read_text())
    try:
        return DielectricModel(
            name=str(data["name"]),
            coefficients=tuple(data["coefficients"]),
            valid_range=tuple(data["valid_range_um"]),
            axis_role=str(data.get("axis_role", "isotropic")),
            form=str(data.get("form", "sellmeier")),
        )
    except KeyError as exc:
        raise ValueError(f"{path}: missing key {exc.args[0]!r}") from None


def _resolve(spec) -> DielectricModel:
    if isinstance(spec, DielectricModel):
        return spec
    if isinstance(spec, str) and spec in BUILTIN_MODELS:
        return BUILTIN_MODELS[spec]
    return load_model(spec)


@dataclass(frozen=True)
class MaterialStack:
    """Film (ordinary, extraordinary), under-cladding and top cladding."""

    film_o: DielectricModel = field(default_factory=lambda: BUILTIN_MODELS["LN_o"])
    film_e: DielectricModel = field(default_factory=lambda: BUILTIN_MODELS["LN_e"])
    substrate: DielectricModel = field(default_factory=lambda: BUILTIN_MODELS["SiO2"])
    cover: DielectricModel = field(default_factory=lambda: BUILTIN_MODELS["air"])

    @classmethod
    def from_names(cls, film_o="LN_o", film_e="LN_e", substrate="SiO2", cover="air"):
        """Build a stack from built-in names or coefficient-file paths."""
        return cls(_resolve(film_o), _resolve(film_e), _resolve(substrate), _resolve(cover))

    def indices(self, wavelength_um: float) -> dict[str, float]:
        """All four indices at one wavelength; checks the guidance precondition."""
        out = {
            "n_o": refractive_index(self.film_o, wavelength_um),
            "n_e": refractive_index(self.film_e, wavelength_um),
            "n_sub": refractive_index(self.substrate, wavelength_um),
            "n_cov": refractive_index(self.cover, wavelength_um),
        }
        if min(out["n_o"], out["n_e"]) <= max(out["n_sub"], out["n_cov"]):
            raise ValueError(
                f"film index does not exceed cladding indices at {wavelength_um} um: {out}"
            )
        return out

    def identifiers(self) -> dict[str, str]:
        return {
            "film_o": self.film_o.identifier(),
            "film_e": self.film_e.identifier(),
            "substrate": self.substrate.identifier(),
            "cover": self.cover.identifier(),
        }


def default_stack() -> MaterialStack:
    return MaterialStack()

