import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lnoi.spdc import (
    CurveRangeError,
    JsaGrid,
    JsaGridSpec,
    PhaseMatchCurves,
    PhaseMatchingError,
    PumpSpec,
    SpdcProcess,
    Wave,
    build_jsa,
    delta_k,
    group_index_gate,
    idler_wavelength,
    omega,
    pef,
    pmf,
    pmf_angle,
    purity,
    purity_map,
    purity_report,
    solve_poling_period,
    wavelength,
)
from conftest import linear_curve
from oracles import gaussian_purity

PROCESS = SpdcProcess.design("typeII")
PUMP = PumpSpec.from_bandwidth_nm(775, 1.5)


# ---- process descriptors


def test_process_patterns():
    assert SpdcProcess.design("type0").coefficient == "d33"
    t1 = SpdcProcess.design("typeI")
    assert (t1.pump.polarization, t1.signal.polarization, t1.idler.polarization) == ("TE", "TM", "TM")
    t2 = SpdcProcess.design("typeII")
    assert (t2.pump.selector, t2.signal.selector, t2.idler.selector) == ("TM0", "TM0", "TE0")
    assert t2.coefficient == "d31"


def test_process_validation():
    with pytest.raises(ValueError, match="requires"):
        SpdcProcess("typeII", Wave(775, "TE"), Wave(1550, "TM"), Wave(1550, "TE"), "d31")
    with pytest.raises(ValueError, match="uses"):
        SpdcProcess("type0", Wave(775, "TE"), Wave(1550, "TE"), Wave(1550, "TE"), "d31")
    with pytest.raises(ValueError, match="energy"):
        SpdcProcess("type0", Wave(775, "TE"), Wave(1550, "TE"), Wave(1560, "TE"), "d33")
    with pytest.raises(ValueError):
        SpdcProcess.design("typeIII")


def test_nondegenerate_energy_conservation():
    p = SpdcProcess.design("typeII", 775, 1530)
    assert abs(1 / 775 - 1 / 1530 - 1 / p.idler.wavelength) < 1e-15


def test_omega_roundtrip():
    assert wavelength(omega(1550.0)) == pytest.approx(1550.0, rel=1e-15)
    assert idler_wavelength(775, 1550) == pytest.approx(1550)


# ---- pump envelope


def test_pump_conventions():
    dw = 2 * math.pi * 299792458e9 * 1.5 / 775**2
    assert PumpSpec.from_bandwidth_nm(775, 1.5).sigma == pytest.approx(dw, rel=1e-14)
    fwhm = PumpSpec.from_bandwidth_nm(775, 1.5, "fwhm")
    # intensity |pef|^2 falls to one half at +- FWHM / 2
    half = pef(fwhm.omega / 2 + dw / 2, fwhm.omega / 2, fwhm) ** 2
    assert half == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ValueError):
        PumpSpec(775, 0.0)
    with pytest.raises(ValueError):
        PumpSpec.from_bandwidth_nm(775, 1.5, "rms")


def test_pef_values():
    wp = PUMP.omega
    assert pef(0.4 * wp, 0.6 * wp, PUMP) == 1.0
    assert pef(0.4 * wp + PUMP.sigma, 0.6 * wp, PUMP) == pytest.approx(math.exp(-1), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), d=st.floats(-3, 3))
def test_pef_contours_have_slope_minus_one(a, b, d):
    wp = PUMP.omega
    s = PUMP.sigma
    ws, wi = wp / 2 + a * s, wp / 2 + b * s
    assert pef(ws + d * s, wi - d * s, PUMP) == pytest.approx(pef(ws, wi, PUMP), rel=1e-9, abs=1e-300)


# ---- phase matching


def test_poling_period_zeroes_mismatch(synthetic_curves):
    L = solve_poling_period(synthetic_curves, 775, 1550)
    assert L == pytest.approx(0.775 / (2.19472 - (1.97923 + 1.97290) / 2), rel=1e-9)
    assert abs(delta_k(omega(1550), omega(1550), synthetic_curves, L)) < 1e-10


def test_infinite_period_limit(synthetic_curves):
    ws = wi = omega(1550)
    direct = (
        synthetic_curves.pump.wavenumber(ws + wi)
        - synthetic_curves.signal.wavenumber(ws)
        - synthetic_curves.idler.wavenumber(wi)
    )
    assert delta_k(ws, wi, synthetic_curves) == pytest.approx(direct, rel=1e-15)
    assert delta_k(ws, wi, synthetic_curves, 1e300) == pytest.approx(direct, rel=1e-12)


def test_period_bracketed_by_scan(synthetic_curves):
    L = solve_poling_period(synthetic_curves, 775, 1550)
    scan = np.linspace(1, 10, 9001)
    dk = np.array([float(delta_k(omega(1550), omega(1550), synthetic_curves, p)) for p in scan])
    k = np.flatnonzero(np.sign(dk[:-1]) != np.sign(dk[1:]))
    assert len(k) == 1
    assert scan[k[0]] <= L <= scan[k[0] + 1]


def test_negative_mismatch_rejected(synthetic_curves):
    flipped = PhaseMatchCurves(
        linear_curve(775.0, 1.9, 2.4, 765, 785), synthetic_curves.signal, synthetic_curves.idler
    )
    with pytest.raises(PhaseMatchingError, match="higher orders"):
        solve_poling_period(flipped, 775, 1550)


def test_range_error_names_curve(synthetic_curves):
    curves = synthetic_curves._replace(pump=linear_curve(775.0, 2.19472, 2.4277, 700, 850))
    with pytest.raises(CurveRangeError, match="idler"):
        delta_k(omega(1550), omega(1750), curves, 3.5)
    with pytest.raises(CurveRangeError, match="signal"):
        delta_k(omega(1380), omega(1550), curves, 3.5)
    with pytest.raises(CurveRangeError, match="pump"):
        delta_k(omega(1550), omega(1700), synthetic_curves, 3.5)


def test_pmf_values(synthetic_curves):
    L = solve_poling_period(synthetic_curves, 775, 1550)
    v = pmf(omega(1550), omega(1550), synthetic_curves, L, 5.0)
    assert abs(v - 1.0) < 1e-9
    # find a signal detuning where dk L / 2 = pi along the pump line
    wp = omega(775)
    f = lambda ws: abs(float(delta_k(ws, wp - ws, synthetic_curves, L))) * 5e3 / 2 - math.pi
    from scipy.optimize import brentq

    ws = brentq(f, omega(1550), omega(1520), xtol=1)
    assert abs(pmf(ws, wp - ws, synthetic_curves, L, 5.0)) < 1e-6


def _first_null(curves, period, length):
    wp = omega(775)
    ws = np.linspace(omega(1550), omega(1500), 200001)
    mag = np.abs(pmf(ws, wp - ws, curves, period, length))
    k = np.argmax(mag < 1e-3)
    return ws[k] - ws[0]


def test_pmf_null_scales_inverse_length(synthetic_curves):
    L = solve_poling_period(synthetic_curves, 775, 1550)
    w25 = _first_null(synthetic_curves, L, 2.5)
    w5 = _first_null(synthetic_curves, L, 5.0)
    assert w25 / w5 == pytest.approx(2.0, rel=2e-3)


# ---- PMF angle and group-index gate


def test_pmf_angle_cases():
    assert pmf_angle(2.4276, 2.4425, 2.2567) == pytest.approx(4.98, abs=0.01)
    assert pmf_angle(2.3, 2.3, 2.1) == 0.0
    assert pmf_angle(2.3, 2.1, 2.3) == pytest.approx(90.0)
    with pytest.raises(ValueError):
        pmf_angle(2.3, 2.3, 2.3)


@settings(max_examples=200, deadline=None)
@given(p=st.floats(1.5, 3), s=st.floats(1.5, 3), i=st.floats(1.5, 3))
def test_pmf_angle_range(p, s, i):
    if p == s == i:
        return
    theta = pmf_angle(p, s, i)
    assert 0.0 <= theta < 180.0


def test_group_index_gate():
    assert group_index_gate(2.4276, 2.4425, 2.2567)
    assert group_index_gate(2.4276, 2.2567, 2.4425)
    assert not group_index_gate(2.5, 2.4425, 2.2567)


# ---- JSA and purity


def test_jsa_invariants(synthetic_curves):
    L = solve_poling_period(synthetic_curves, 775, 1550)
    jsa = build_jsa(PROCESS, synthetic_curves, PUMP, 5.0, L, JsaGridSpec(6.0, 64))
    assert jsa.amplitude.shape == (64, 64)
    assert np.all(np.diff(jsa.omega_s) > 0) and np.all(np.diff(jsa.omega_i) > 0)
    assert np.abs(jsa.amplitude).max() == pytest.approx(1.0, rel=1e-15)
    assert np.array_equal(jsa.jsi, np.abs(jsa.amplitude) ** 2)
    assert jsa.signal_wavelengths[0] > jsa.signal_wavelengths[-1]


def test_narrow_pump_collapses_to_antidiagonal(synthetic_curves):
    L = solve_poling_period(synthetic_curves, 775, 1550)
    grid = JsaGridSpec(6.0, 65)
    axis = grid.axis(1550.0)
    step = axis[1] - axis[0]
    narrow = PumpSpec(775, step / 10)
    jsa = build_jsa(PROCESS, synthetic_curves, narrow, 5.0, L, grid)
    WS, WI = np.meshgrid(jsa.omega_s, jsa.omega_i, indexing="ij")
    off = np.abs(WS + WI - narrow.omega) > step
    assert np.abs(jsa.amplitude[off]).max() < 1e-6


def test_jsa_peak_near_degeneracy(synthetic_curves):
    L = solve_poling_period(synthetic_curves, 775, 1550)
    jsa = build_jsa(PROCESS, synthetic_curves, PUMP, 5.0, L, JsaGridSpec(6.0, 129))
    i, j = np.unravel_index(np.argmax(jsa.jsi), jsa.jsi.shape)
    assert abs(i - 64) <= 2 and abs(j - 64) <= 2


def test_separable_purity_is_one():
    x = np.linspace(-3, 3, 200)
    f = np.outer(np.exp(-x**2) * (1 + 0.3 * x), np.cos(x) + 2j)
    assert purity(f) == pytest.approx(1.0, abs=1e-10)
    assert purity(f, use_amplitude=False) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("a,b,c", [(1.0, 1.0, 0.3), (2.0, 0.5, -0.6), (1.0, 3.0, 1.2), (1.0, 1.0, 0.0)])
def test_gaussian_purity_matches_closed_form(a, b, c):
    x = np.linspace(-9, 9, 601)
    X, Y = np.meshgrid(x, x, indexing="ij")
    f = np.exp(-a * X**2 - b * Y**2 - 2 * c * X * Y)
    assert purity(f) == pytest.approx(gaussian_purity(a, b, c), abs=1e-4)


def test_purity_invariances(synthetic_curves):
    L = solve_poling_period(synthetic_curves, 775, 1550)
    jsa = build_jsa(PROCESS, synthetic_curves, PUMP, 5.0, L, JsaGridSpec(6.0, 96))
    p = purity(jsa)
    assert purity(7.3 * jsa.amplitude) == pytest.approx(p, abs=1e-12)
    assert purity(jsa.amplitude.T) == pytest.approx(p, abs=1e-12)
    assert 0 < p <= 1
    rep = purity_report(jsa)
    assert rep["amplitude"] == p


def test_purity_of_zero_matrix():
    with pytest.raises(ValueError):
        purity(np.zeros((4, 4)))


def test_jsa_grid_validation():
    with pytest.raises(ValueError):
        JsaGrid(np.arange(3.0), np.arange(3.0), np.zeros((3, 4)))
    with pytest.raises(ValueError):
        JsaGrid(np.array([1.0, 0.0]), np.arange(2.0), np.zeros((2, 2)))


def test_purity_map_cells(synthetic_curves):
    L = solve_poling_period(synthetic_curves, 775, 1550)
    grid = JsaGridSpec(6.0, 48)
    pm = purity_map(PROCESS, synthetic_curves, [2.5, 5.0], [1.0, 1.5, 2.0], L, grid)
    assert pm.values.shape == (2, 3)
    direct = purity(build_jsa(PROCESS, synthetic_curves, PumpSpec.from_bandwidth_nm(775, 1.5), 5.0, L, grid))
    assert pm.values[1, 1] == direct
    rev = purity_map(PROCESS, synthetic_curves, [5.0, 2.5], [2.0, 1.5, 1.0], L, grid)
    assert np.array_equal(rev.values[::-1, ::-1], pm.values)
    single = purity_map(PROCESS, synthetic_curves, [5.0], [1.5], L, grid)
    assert single.values[0, 0] == direct
    assert len(pm.rows()) == 6
