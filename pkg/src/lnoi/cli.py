"""Batch front-end: ``lnoi --config run.toml``.

One task per run. Every output is written atomically (temp file + rename) and
listed with its SHA-256 in ``manifest.json`` next to the config hash, material
model identifiers, mesh settings, package version and wall time.

Exit codes: 0 success, 2 configuration error, 3 solver convergence or mode
tracking failure, 4 no phase matching, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from .fde import (
    ConvergenceError,
    TrackingError,
    find_modes,
    group_index,
    higher_order_margin,
    SINGLEMODE_MESH,
)
from .geometry import GeometryError, MeshSpec, RibGeometry, mesh_preset
from .leakage import LeakageMapSpec, crossover_contour, leakage_map
from .materials import MaterialRangeError, MaterialStack
from .slab import thickness_table
from .spdc import (
    JsaGridSpec,
    PhaseMatchingError,
    PumpSpec,
    SpdcProcess,
    build_curves,
    build_jsa,
    group_index_gate,
    pmf_angle,
    purity,
    purity_map,
    solve_poling_period,
)
from .tolerance import ToleranceSweepSpec, tolerance_sweep

log = logging.getLogger("lnoi")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_NO_PM = 0, 1, 2, 3, 4

TASKS = (
    "modes",
    "slab",
    "leakage-map",
    "singlemode-scan",
    "pmf-angle-map",
    "poling",
    "jsa",
    "purity-map",
    "tolerance",
)


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


# --------------------------------------------------------------------------- config

_GEOMETRY_KEYS = {
    "width_nm": "width",
    "etch_depth_nm": "etch_depth",
    "film_thickness_nm": "film_thickness",
    "sidewall_angle_deg": "sidewall_angle",
}
_MESH_KEYS = {
    "fine_step_nm": "fine_step",
    "max_step_nm": "max_step",
    "growth": "growth",
    "lateral_margin_nm": "lateral_margin",
    "substrate_margin_nm": "substrate_margin",
    "cover_margin_nm": "cover_margin",
}


@dataclass
class RunConfig:
    stack: MaterialStack
    geometry: RibGeometry | None
    mesh: str
    mesh_overrides: dict
    count: int | None
    task: str
    params: dict
    out: Path
    source: bytes = b""
    materials: dict = field(default_factory=dict)

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.source).hexdigest()

    def mesh_spec(self, default: str | None = None) -> MeshSpec:
        name = self.mesh or default or "default"
        spec = mesh_preset(name, **self.mesh_overrides)
        spec.validate()
        return spec


def _table(data, name) -> dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def _check_keys(section: str, table: dict, allowed) -> None:
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"[{section}] unknown keys {unknown}; allowed {sorted(allowed)}")


def load_config(path, out: str | None = None, mesh: str | None = None) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = tomllib.loads(raw.decode())
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    _check_keys("top level", data, ("materials", "geometry", "simulation", "task", "output"))

    mats = _table(data, "materials")
    _check_keys("materials", mats, ("film_o", "film_e", "substrate", "cover"))
    names = {"film_o": "LN_o", "film_e": "LN_e", "substrate": "SiO2", "cover": "air"}
    for key, value in mats.items():
        if not isinstance(value, str):
            raise ConfigError(f"[materials] {key} must be a built-in name or a file path")
        if value not in ("LN_o", "LN_e", "SiO2", "air"):
            p = Path(value)
            p = p if p.is_absolute() else path.parent / p
            if not p.is_file():
                raise ConfigError(f"[materials] {key}: coefficient file {p} does not exist")
            value = str(p)
        names[key] = value
    try:
        stack = MaterialStack.from_names(**names)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"[materials] {exc}") from None

    geo = _table(data, "geometry")
    geometry = None
    if geo:
        _check_keys("geometry", geo, _GEOMETRY_KEYS)
        try:
            geometry = RibGeometry(**{_GEOMETRY_KEYS[k]: float(v) for k, v in geo.items()})
        except TypeError as exc:
            raise ConfigError(f"[geometry] {exc}") from None
        except GeometryError as exc:
            raise ConfigError(f"[geometry] {exc}") from None

    sim = _table(data, "simulation")
    _check_keys("simulation", sim, ("mesh", "modes", *_MESH_KEYS))
    overrides = {_MESH_KEYS[k]: float(v) for k, v in sim.items() if k in _MESH_KEYS}
    count = sim.get("modes")
    if count is not None and (not isinstance(count, int) or count < 1):
        raise ConfigError("[simulation] modes must be a positive integer")

    task = dict(_table(data, "task"))
    name = task.pop("name", None)
    if name not in TASKS:
        raise ConfigError(f"[task] name must be one of {list(TASKS)}, got {name!r}")
    outdir = out or _table(data, "output").get("dir", "out")

    cfg = RunConfig(
        stack=stack,
        geometry=geometry,
        mesh=mesh or sim.get("mesh", ""),
        mesh_overrides=overrides,
        count=count,
        task=name,
        params=task,
        out=Path(outdir),
        source=raw,
        materials=names,
    )
    try:
        cfg.mesh_spec()
    except (GeometryError, TypeError) as exc:
        raise ConfigError(f"[simulation] {exc}") from None
    return cfg


def _need_geometry(cfg: RunConfig) -> RibGeometry:
    if cfg.geometry is None:
        raise ConfigError(f"task {cfg.task!r} needs a [geometry] section")
    return cfg.geometry


def _get(params: dict, key: str, default=None, kind=float):
    if key not in params:
        if default is None:
            raise ConfigError(f"[task] missing required key {key!r}")
        return default
    value = params[key]
    try:
        if kind is list:
            return [float(v) for v in (value if isinstance(value, list) else [value])]
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"[task] {key} has invalid value {value!r}") from None


def _axis(params: dict, stem: str, default=None) -> list[float]:
    """Values from ``<stem>_nm = [...]`` or ``<stem>_range_nm = [start, stop, step]``."""
    for unit in ("nm", "mm"):
        if f"{stem}_{unit}" in params:
            return _get(params, f"{stem}_{unit}", kind=list)
        if f"{stem}_range_{unit}" in params:
            r = _get(params, f"{stem}_range_{unit}", kind=list)
            if len(r) != 3 or not r[2] > 0 or r[1] < r[0]:
                raise ConfigError(f"[task] {stem}_range_{unit} must be [start, stop, step] with step > 0")
            n = int(math.floor((r[1] - r[0]) / r[2] + 1e-9)) + 1
            return [r[0] + k * r[2] for k in range(n)]
    if default is not None:
        return list(default)
    raise ConfigError(f"[task] missing {stem}_nm or {stem}_range_nm")


def _pol(params, key="polarization", default="TM") -> str:
    pol = str(params.get(key, default))
    if pol not in ("TE", "TM"):
        raise ConfigError(f"[task] {key} must be TE or TM, got {pol!r}")
    return pol


# --------------------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    if v is None:
        return ""
    return str(v)


class Outputs:
    """Atomic writer that remembers what it wrote for the manifest."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def write_bytes(self, name: str, data: bytes) -> Path:
        target = self.root / name
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self.files[name] = hashlib.sha256(data).hexdigest()
        return target

    def csv(self, name: str, header, rows) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        return self.write_bytes(name, buf.getvalue().encode())

    def json(self, name: str, obj) -> Path:
        return self.write_bytes(name, (json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n").encode())

    def npz(self, name: str, **arrays) -> Path:
        buf = io.BytesIO()
        np.savez(buf, **arrays)
        return self.write_bytes(name, buf.getvalue())


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


# --------------------------------------------------------------------------- tasks


def _count(cfg, default):
    return cfg.count or default


def task_modes(cfg: RunConfig, out: Outputs, jobs: int) -> dict:
    g = _need_geometry(cfg)
    mesh = cfg.mesh_spec("default")
    count = _count(cfg, 24)
    rows, summary = [], {}
    for lam in _get(cfg.params, "wavelengths_nm", [775.0, 1550.0], list):
        modes = find_modes(g, cfg.stack, lam, mesh, count=count)
        ng = {}
        if cfg.params.get("group_index", True):
            for sel in ("TE0", "TM0"):
                try:
                    ng[sel] = group_index(g, cfg.stack, sel, lam, mesh=mesh, count=count)
                except (LookupError, TrackingError) as exc:
                    log.warning("%s at %s nm: %s", sel, lam, exc)
        for m in modes:
            rows.append((lam, m.label, m.n_eff, ng.get(m.label) if m.guided else None,
                         m.polarization_fraction, m.core_fraction, m.guided))
        summary[f"{lam:g}"] = [
            {**m.summary(), "n_g": ng.get(m.label)} for m in modes if m.label in ("TE0", "TM0")
        ]
    out.csv("modes.csv", ("wavelength_nm", "label", "n_eff", "n_g", "polarization_fraction",
                          "core_fraction", "guided"), rows)
    out.json("modes_summary.json", summary)
    return {"fundamental_modes": summary}


def task_slab(cfg: RunConfig, out: Outputs, jobs: int) -> dict:
    thick = _axis(cfg.params, "thickness", None)
    pols = tuple(cfg.params.get("polarizations", ["TE", "TM"]))
    rows = []
    for lam in _get(cfg.params, "wavelengths_nm", [775.0, 1550.0], list):
        rows += [(lam, *r) for r in thickness_table(cfg.stack, thick, lam, pols)]
    out.csv("slab.csv", ("wavelength_nm", "thickness_nm", "polarization", "order", "n_eff"), rows)
    return {"rows": len(rows)}


def task_leakage_map(cfg: RunConfig, out: Outputs, jobs: int) -> dict:
    widths = _axis(cfg.params, "widths", [cfg.geometry.width] if cfg.geometry else None)
    spec = LeakageMapSpec(
        widths=tuple(widths),
        etch_range=tuple(_get(cfg.params, "etch_range_nm", kind=list)),
        thickness_range=tuple(_get(cfg.params, "thickness_range_nm", kind=list)),
        wavelength=_get(cfg.params, "wavelength_nm"),
        guided_pol=_pol(cfg.params, "guided_pol"),
        sidewall_angle=_get(cfg.params, "sidewall_angle_deg",
                            cfg.geometry.sidewall_angle if cfg.geometry else 80.0),
        stack=cfg.stack,
        mesh=cfg.mesh_spec("sweep"),
        count=_count(cfg, 20),
    )
    report = {}
    for lmap in leakage_map(spec, jobs=jobs, progress=_progress):
        tag = f"w{lmap.width:g}"
        out.csv(f"leakage_{tag}.csv", ("h_e_nm", "h_f_nm", "delta_neff", "masked", "slab_below_cutoff"),
                [(he, hf, v, m, bool(lmap.below_cutoff[i // len(lmap.etch_depths), i % len(lmap.etch_depths)]))
                 for i, (he, hf, v, m) in enumerate(lmap.rows())])
        lines = crossover_contour(lmap)
        out.csv(f"contour_{tag}.csv", ("segment", "h_e_nm", "h_f_nm"),
                [(k, p[0], p[1]) for k, line in enumerate(lines) for p in line])
        report[tag] = {
            "reasons": {f"{he:g},{hf:g}": r for (he, hf), r in sorted(lmap.reasons.items())},
            "provenance": lmap.provenance,
            "contour_segments": len(lines),
        }
    return report


def task_singlemode_scan(cfg: RunConfig, out: Outputs, jobs: int) -> dict:
    g = _need_geometry(cfg)
    parameter = str(cfg.params.get("parameter", "etch_depth"))
    if parameter not in ("etch_depth", "width"):
        raise ConfigError("[task] parameter must be etch_depth or width")
    values = _axis(cfg.params, "values")
    lam = _get(cfg.params, "wavelength_nm", 775.0)
    pol = _pol(cfg.params)
    overrides = {**SINGLEMODE_MESH, **cfg.mesh_overrides}
    mesh = mesh_preset(cfg.mesh or "default", **overrides)
    rows, margins = [], []
    for v in sorted(values):
        try:
            gv = g.with_(**{parameter: v})
        except GeometryError as exc:
            raise ConfigError(f"[task] {parameter}={v}: {exc}") from None
        try:
            m = higher_order_margin(gv, cfg.stack, lam, pol, mesh, _count(cfg, 40))
        except LookupError:
            m = math.nan
        margins.append(m)
        rows.append((v, m, 2 if m > 0 else 1))
    transition = None
    for (v0, m0), (v1, m1) in zip(zip(sorted(values), margins), zip(sorted(values)[1:], margins[1:])):
        if np.isfinite(m0) and np.isfinite(m1) and (m0 > 0) != (m1 > 0):
            transition = v0 + (v1 - v0) * m0 / (m0 - m1)
            break
    out.csv("singlemode.csv", (f"{parameter}_nm", f"{pol}1_margin", f"{pol}_mode_count"), rows)
    return {"parameter": parameter, "transition_nm": transition, "polarization": pol, "wavelength_nm": lam}


def _process(cfg: RunConfig) -> SpdcProcess:
    try:
        return SpdcProcess.design(
            str(cfg.params.get("process", "typeII")),
            _get(cfg.params, "pump_nm", 775.0),
            cfg.params.get("signal_nm"),
        )
    except ValueError as exc:
        raise ConfigError(f"[task] {exc}") from None


def task_pmf_angle_map(cfg: RunConfig, out: Outputs, jobs: int) -> dict:
    g = _need_geometry(cfg)
    process = _process(cfg)
    widths = _axis(cfg.params, "widths")
    etches = _axis(cfg.params, "etch_depths")
    mesh = cfg.mesh_spec("default")
    count = _count(cfg, 12)
    rows = []
    for he in etches:
        for w in widths:
            try:
                gv = g.with_(width=w, etch_depth=he)
                ng = [group_index(gv, cfg.stack, wave.selector, wave.wavelength, mesh=mesh, count=count)
                      for wave in (process.pump, process.signal, process.idler)]
                rows.append((he, w, *ng, pmf_angle(*ng), group_index_gate(*ng), ""))
            except (GeometryError, LookupError, ConvergenceError, TrackingError, ValueError) as exc:
                nan = math.nan
                rows.append((he, w, nan, nan, nan, nan, False, f"{type(exc).__name__}: {exc}"))
    out.csv("pmf_angle.csv", ("h_e_nm", "width_nm", "ng_pump", "ng_signal", "ng_idler", "theta_deg",
                              "gate", "error"), rows)
    return {"cells": len(rows), "failed": sum(1 for r in rows if r[-1])}


def _curves(cfg: RunConfig, process: SpdcProcess):
    return build_curves(
        _need_geometry(cfg), cfg.stack, process,
        samples=int(cfg.params.get("curve_samples", 7)), mesh=cfg.mesh_spec("default"),
        count=_count(cfg, 12),
    )


def _write_curves(out: Outputs, curves) -> None:
    rows = [(role, *r) for role, c in zip(("pump", "signal", "idler"), curves) for r in c.to_rows()]
    out.csv("dispersion.csv", ("role", "wavelength_nm", "n_eff", "n_g"), rows)


def _pump(cfg: RunConfig, process: SpdcProcess, bandwidth=None) -> PumpSpec:
    conv = str(cfg.params.get("bandwidth_convention", "1/e"))
    try:
        return PumpSpec.from_bandwidth_nm(
            process.pump.wavelength,
            bandwidth if bandwidth is not None else _get(cfg.params, "bandwidth_nm", 1.5),
            conv,
        )
    except ValueError as exc:
        raise ConfigError(f"[task] {exc}") from None


def _grid(cfg: RunConfig) -> JsaGridSpec:
    return JsaGridSpec(_get(cfg.params, "grid_span_nm", 6.0), int(cfg.params.get("grid_samples", 256)))


def task_poling(cfg: RunConfig, out: Outputs, jobs: int) -> dict:
    process = _process(cfg)
    curves = _curves(cfg, process)
    _write_curves(out, curves)
    period = solve_poling_period(curves, process.pump.wavelength, process.signal.wavelength)
    ng = (
        float(curves.pump.group_index(process.pump.wavelength)),
        float(curves.signal.group_index(process.signal.wavelength)),
        float(curves.idler.group_index(process.idler.wavelength)),
    )
    result = {
        "process": process.type_label,
        "period_um": period,
        "group_indices": {"pump": ng[0], "signal": ng[1], "idler": ng[2]},
        "pmf_angle_deg": pmf_angle(*ng),
        "group_index_gate": group_index_gate(*ng),
    }
    out.json("poling.json", result)
    return result


def _period(cfg, curves, process) -> float:
    if "period_um" in cfg.params:
        return _get(cfg.params, "period_um")
    return solve_poling_period(curves, process.pump.wavelength, process.signal.wavelength)


def task_jsa(cfg: RunConfig, out: Outputs, jobs: int) -> dict:
    process = _process(cfg)
    curves = _curves(cfg, process)
    period = _period(cfg, curves, process)
    pump = _pump(cfg, process)
    length = _get(cfg.params, "length_mm", 5.0)
    jsa = build_jsa(process, curves, pump, length, period, _grid(cfg))
    out.npz("jsa.npz", omega_s=jsa.omega_s, omega_i=jsa.omega_i, jsa_real=jsa.amplitude.real,
            jsa_imag=jsa.amplitude.imag, jsi=jsa.jsi)
    result = {
        "period_um": period,
        "sigma_rad_s": pump.sigma,
        "length_mm": length,
        "purity_amplitude": purity(jsa, True),
        "purity_intensity": purity(jsa, False),
    }
    out.csv("purity.csv", ("period_um", "length_mm", "sigma_rad_s", "purity_amplitude", "purity_intensity"),
            [(period, length, pump.sigma, result["purity_amplitude"], result["purity_intensity"])])
    return result


def task_purity_map(cfg: RunConfig, out: Outputs, jobs: int) -> dict:
    process = _process(cfg)
    curves = _curves(cfg, process)
    period = _period(cfg, curves, process)
    lengths = _axis(cfg.params, "lengths")
    bands = _axis(cfg.params, "bandwidths")
    conv = str(cfg.params.get("bandwidth_convention", "1/e"))
    rows = []
    for use_amp in (True, False):
        pm = purity_map(process, curves, lengths, bands, period, _grid(cfg), conv, use_amp, jobs)
        rows += [("amplitude" if use_amp else "intensity", *r) for r in pm.rows()]
    out.csv("purity_map.csv", ("convention", "length_mm", "bandwidth_nm", "purity"), rows)
    return {"period_um": period, "cells": len(rows) // 2}


def task_tolerance(cfg: RunConfig, out: Outputs, jobs: int) -> dict:
    g = _need_geometry(cfg)
    process = _process(cfg)
    parameter = str(cfg.params.get("parameter", "etch_depth"))
    values = _axis(cfg.params, "values") if parameter != "sidewall_angle" else _get(
        cfg.params, "values_deg", kind=list)
    window = tuple(_get(cfg.params, "window_nm", [1450.0, 1650.0], list))
    if "period_um" in cfg.params:
        period = _get(cfg.params, "period_um")
    else:
        period = solve_poling_period(_curves(cfg, process), process.pump.wavelength, process.signal.wavelength)
    try:
        spec = ToleranceSweepSpec(
            g, parameter, tuple(values), period, _pump(cfg, process), _get(cfg.params, "length_mm", 5.0),
            process, cfg.stack, window, _grid(cfg), cfg.mesh_spec("default"),
            int(cfg.params.get("curve_samples", 13)),
        )
    except (ValueError, GeometryError) as exc:
        raise ConfigError(f"[task] {exc}") from None
    rows = tolerance_sweep(spec, jobs)
    out.csv("tolerance.csv", (parameter, "signal_nm", "idler_nm", "purity_amplitude", "purity_intensity",
                              "energy_residual_per_nm", "error"),
            [(r.value, r.signal_nm, r.idler_nm, r.purity_amplitude, r.purity_intensity,
              r.energy_residual(process.pump.wavelength), r.error or "") for r in rows])
    failed = [r for r in rows if r.error]
    if failed and len(failed) == len(rows):
        raise PhaseMatchingError("; ".join(r.error for r in failed))
    return {"period_um": period, "rows": len(rows), "failed": len(failed)}


TASK_FUNCS = {
    "modes": task_modes,
    "slab": task_slab,
    "leakage-map": task_leakage_map,
    "singlemode-scan": task_singlemode_scan,
    "pmf-angle-map": task_pmf_angle_map,
    "poling": task_poling,
    "jsa": task_jsa,
    "purity-map": task_purity_map,
    "tolerance": task_tolerance,
}


def _progress(done: int, total: int) -> None:
    log.info("progress %d/%d", done, total)


# --------------------------------------------------------------------------- entry point


def run(cfg: RunConfig, jobs: int = 1) -> int:
    """Execute one configured task; returns the process exit status."""
    out = Outputs(cfg.out)
    t0 = time.perf_counter()
    status, error, result = EXIT_OK, None, None
    try:
        result = TASK_FUNCS[cfg.task](cfg, out, max(1, jobs))
    except (ConfigError, GeometryError, MaterialRangeError) as exc:
        status, error = EXIT_CONFIG, exc
    except (ConvergenceError, TrackingError) as exc:
        status, error = EXIT_CONVERGENCE, exc
    except PhaseMatchingError as exc:
        status, error = EXIT_NO_PM, exc
    manifest = {
        "task": cfg.task,
        "status": status,
        "config_sha256": cfg.sha256,
        "materials": cfg.stack.identifiers(),
        "mesh": _mesh_record(cfg),
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "result": result,
        "files": dict(sorted(out.files.items())),
    }
    if error is not None:
        manifest["error"] = {"type": type(error).__name__, "message": str(error), "exit_code": status}
        print(f"lnoi: {type(error).__name__}: {error}", file=sys.stderr)
    out.json("manifest.json", manifest)
    return status


def _mesh_record(cfg):
    try:
        return asdict(cfg.mesh_spec())
    except GeometryError:
        return {"preset": cfg.mesh}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lnoi", description="LNOI rib waveguide mode, leakage and SPDC studies")
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--jobs", type=int, default=1, help="maximum worker processes (default 1)")
    p.add_argument("--out", help="output directory (overrides [output] dir)")
    p.add_argument("--mesh", help="mesh preset: fine, default, sweep or coarse")
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        print("lnoi: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, out=args.out, mesh=args.mesh)
    except (ConfigError, GeometryError, MaterialRangeError) as exc:
        print(f"lnoi: config error: {exc}", file=sys.stderr)
        record = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": EXIT_CONFIG}}
        print(json.dumps(record), file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, args.jobs)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
