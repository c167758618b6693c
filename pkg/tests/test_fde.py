import math

import numpy as np
import pytest

from lnoi.fde import (
    ConvergenceError,
    DispersionCurve,
    TrackingError,
    build_dispersion_curve,
    find_modes,
    group_index,
    overlap,
    select_mode,
    solve_modes,
)
from lnoi.geometry import Mesh, PermittivityGrid, RibGeometry, mesh_preset, rasterize
from lnoi.materials import MaterialStack

NOMINAL = RibGeometry(800, 200, 800, 80)
STACK = MaterialStack()


@pytest.fixture(scope="module")
def modes_1550():
    return find_modes(NOMINAL, STACK, 1550, "default", count=8)


def _homogeneous(n, wavelength, width=4000.0, height=3000.0, cells=(80, 60)):
    mesh = Mesh(np.linspace(-width / 2, width / 2, cells[0] + 1), np.linspace(0, height, cells[1] + 1))
    e = n * n
    nh, nv = cells
    return PermittivityGrid(
        mesh, wavelength, np.full((nh, nv + 1), e), np.full((nh + 1, nv), e), np.full((nh + 1, nv + 1), e),
        np.ones((nh, nv)),
    )


def test_fundamentals_present(modes_1550):
    te = select_mode(modes_1550, "TE0")
    tm = select_mode(modes_1550, "TM0")
    assert te.guided and tm.guided
    assert te.n_eff == pytest.approx(1.9729, abs=2e-3)
    assert tm.n_eff == pytest.approx(1.9792, abs=2e-3)


def test_mode_invariants(modes_1550):
    idx = STACK.indices(1.55)
    for m in modes_1550:
        assert idx["n_sub"] < m.n_eff < max(idx["n_o"], idx["n_e"])
        assert m.power() == pytest.approx(1.0, abs=1e-10)
        assert m.residual < 1e-8
        assert 0.0 <= m.polarization_fraction <= 1.0
        assert (m.polarization == "TE") == (m.polarization_fraction > 0.5)
        assert m.label.startswith(m.polarization) or m.label.startswith("slab-")
    n = [m.n_eff for m in modes_1550]
    assert n == sorted(n, reverse=True)


def test_field_mirror_symmetry(modes_1550):
    for m in modes_1550[:4]:
        for f in (m.e_h, m.e_v):
            norm = np.linalg.norm(f)
            sym = np.linalg.norm(f - f[::-1, :]) / norm
            anti = np.linalg.norm(f + f[::-1, :]) / norm
            assert min(sym, anti) < 1e-6


def test_longitudinal_and_magnetic_fields(modes_1550):
    m = select_mode(modes_1550, "TE0")
    assert np.all(np.real(m.e_axial) == 0)
    assert np.abs(m.e_axial).max() > 0
    assert m.intensity().shape == m.mesh.shape
    assert m.beta == pytest.approx(2 * math.pi * m.n_eff / 1550)


def test_mode_dump(tmp_path, modes_1550):
    m = modes_1550[0]
    m.to_npz(tmp_path / "m.npz")
    data = np.load(tmp_path / "m.npz")
    assert np.array_equal(data["e_h"], m.e_h)
    assert set(m.summary()) >= {"label", "n_eff", "polarization_fraction"}


def test_overlap_self_and_orthogonal(modes_1550):
    te = select_mode(modes_1550, "TE0")
    tm = select_mode(modes_1550, "TM0")
    assert overlap(te, te) == pytest.approx(1.0, abs=1e-12)
    assert overlap(te, tm) < 0.1


@pytest.mark.parametrize("lam", [775.0, 1550.0])
def test_lateral_margin_insensitivity_tm(lam):
    a = find_modes(NOMINAL, STACK, lam, mesh_preset("default", lateral_margin=3000), count=8)
    b = find_modes(NOMINAL, STACK, lam, mesh_preset("default", lateral_margin=5000), count=8)
    ma, mb = select_mode(a, "TM0"), select_mode(b, "TM0")
    assert ma.n_eff > ma.slab_index
    assert abs(ma.n_eff - mb.n_eff) < 1e-5


def test_lateral_margin_insensitivity_te_1550():
    # TE0 sits only 0.016 above the TE slab index, so its lateral tail decays
    # over ~1 um and needs a wider box before the walls stop pulling it
    a = find_modes(NOMINAL, STACK, 1550, mesh_preset("default", lateral_margin=5000), count=8)
    b = find_modes(NOMINAL, STACK, 1550, mesh_preset("default", lateral_margin=8000), count=8)
    assert abs(select_mode(a, "TE0").n_eff - select_mode(b, "TE0").n_eff) < 1e-5


def test_homogeneous_guide_identity():
    """In a uniformly filled PEC guide beta^2 = k0^2 n^2 - const, so n_eff * n_g = n^2."""
    n, lam, d = 1.8, 1550.0, 0.5
    vals = {}
    for l in (lam - d, lam, lam + d):
        (m,) = solve_modes(_homogeneous(n, l), count=1)
        vals[l] = m.n_eff
    ng = vals[lam] - lam * (vals[lam + d] - vals[lam - d]) / (2 * d)
    assert ng * vals[lam] == pytest.approx(n * n, abs=1e-6)


def test_search_index_bracket():
    grid = rasterize(NOMINAL, STACK, 1550, "coarse")
    with pytest.raises(ValueError, match="bracket"):
        solve_modes(grid, search_index=1.2)
    with pytest.raises(ValueError):
        solve_modes(grid, wavelength=775)
    with pytest.raises(ValueError):
        solve_modes(grid, count=0)


def test_no_mode_below_search_is_convergence_error():
    grid = rasterize(RibGeometry(100, 50, 60, 90), STACK, 1550, "coarse")
    with pytest.raises(ConvergenceError):
        solve_modes(grid, search_index=STACK.indices(1.55)["n_sub"] + 1e-4, count=1)


def test_select_mode_lookup_error(modes_1550):
    with pytest.raises(LookupError):
        select_mode(modes_1550, "TE7")


def test_tracking_failure_reports():
    with pytest.raises(TrackingError):
        group_index(NOMINAL, STACK, "TM0", 1550, mesh="coarse", threshold=1.01)


def test_dispersion_curve_invariants():
    lam = np.linspace(1500, 1600, 6)
    n = 2.0 - 1e-4 * (lam - 1550) + 3e-8 * (lam - 1550) ** 2
    c = DispersionCurve(lam, n)
    assert np.allclose(c(lam), n, rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        DispersionCurve(lam[:4], n[:4])
    with pytest.raises(ValueError):
        DispersionCurve(lam[::-1], n[::-1])
    with pytest.raises(ValueError):
        c(1400.0)
    assert c.range == (1500.0, 1600.0)
    assert len(c.to_rows()) == 6


def test_dispersion_curve_holdout_and_group_index():
    mesh = mesh_preset("default")
    curve = build_dispersion_curve(NOMINAL, STACK, "TM0", (1500, 1600), samples=5, mesh=mesh)
    held = select_mode(find_modes(NOMINAL, STACK, 1537.0, mesh, count=8), "TM0")
    assert abs(float(curve(1537.0)) - held.n_eff) < 5e-5
    ng_fd = group_index(NOMINAL, STACK, "TM0", 1550.0, mesh=mesh)
    assert abs(float(curve.group_index(1550.0)) - ng_fd) < 1e-3


def test_dispersion_curve_rejects_reversed_samples():
    with pytest.raises(ValueError):
        build_dispersion_curve(NOMINAL, STACK, "TM0", (1600, 1500))
    with pytest.raises(ValueError):
        build_dispersion_curve(NOMINAL, STACK, "TM0", None, wavelengths=[1600, 1575, 1550, 1525, 1500])
