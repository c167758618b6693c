import numpy as np
import pytest

from lnoi.geometry import RibGeometry
from lnoi.leakage import (
    LeakageMap,
    LeakageMapSpec,
    RibCutoffError,
    crossover_contour,
    delta_neff,
    distance_to_contour,
    leakage_map,
    other_polarization,
)
from lnoi.materials import MaterialStack

STACK = MaterialStack()


def _synthetic(values, he, hf, mask=None):
    return LeakageMap(
        width=800.0,
        etch_depths=np.asarray(he, float),
        thicknesses=np.asarray(hf, float),
        values=np.asarray(values, float),
        mask=np.zeros(np.shape(values), bool) if mask is None else mask,
    )


def test_linear_map_contour_is_exact():
    he = np.arange(50, 351, 50.0)
    hf = np.arange(500, 901, 50.0)
    HE, _ = np.meshgrid(he, hf)
    lines = crossover_contour(_synthetic(HE - 200.0, he, hf))
    assert len(lines) == 1
    assert np.allclose(lines[0][:, 0], 200.0)
    assert lines[0][:, 1].min() == 500 and lines[0][:, 1].max() == 900


def test_single_sign_map_has_empty_contour():
    he = np.arange(50, 351, 50.0)
    hf = np.arange(500, 901, 50.0)
    assert crossover_contour(_synthetic(np.ones((len(hf), len(he))), he, hf)) == []
    assert crossover_contour(_synthetic(-np.ones((len(hf), len(he))), he, hf)) == []


def test_masked_cells_ignored_by_contour():
    he = np.array([100.0, 200.0, 300.0])
    hf = np.array([500.0, 600.0])
    vals = np.array([[1.0, 1.0, 1.0], [1.0, 1.0, -5.0]])
    mask = np.array([[False, False, False], [False, False, True]])
    assert crossover_contour(_synthetic(vals, he, hf, mask)) == []


def test_distance_to_contour():
    line = np.array([[200.0, 500.0], [200.0, 900.0]])
    assert distance_to_contour([line], (230.0, 700.0)) == pytest.approx(30.0)
    assert distance_to_contour([line], (200.0, 950.0)) == pytest.approx(50.0)
    assert distance_to_contour([], (0.0, 0.0)) == float("inf")


def test_spec_validation_and_axes():
    spec = LeakageMapSpec((800,), (50, 350, 50), (500, 900, 50), 1550, "TM")
    assert len(spec.etch_depths) == 7 and len(spec.thicknesses) == 9
    with pytest.raises(ValueError):
        LeakageMapSpec((800,), (50, 350, 0), (500, 900, 50), 1550, "TM")
    with pytest.raises(ValueError):
        LeakageMapSpec((800,), (350, 50, 50), (500, 900, 50), 1550, "TM")
    with pytest.raises(ValueError):
        LeakageMapSpec((800,), (50, 350, 50), (500, 900, 50), 1550, "TX")
    assert other_polarization("TE") == "TM"


def test_nominal_pump_tm_not_leaky():
    r = delta_neff(RibGeometry(800, 200, 800, 80), STACK, 775, "TM")
    assert r.delta > 0 and not r.leaky and not r.slab_below_cutoff


@pytest.mark.parametrize(
    "geometry,waves",
    [
        # type 0 and type I recipe
        (RibGeometry(800, 300, 600, 80), [(775, "TE"), (1550, "TE"), (1550, "TM")]),
        # type II recipe
        (RibGeometry(800, 200, 800, 80), [(775, "TM"), (1550, "TM"), (1550, "TE")]),
    ],
)
def test_recipe_geometries_are_leakage_free(geometry, waves):
    for lam, pol in waves:
        assert delta_neff(geometry, STACK, lam, pol).delta > 0, (lam, pol)


def test_full_etch_uses_substrate_reference():
    g = RibGeometry(800, 600, 600, 80)
    r = delta_neff(g, STACK, 1550, "TM")
    assert r.slab_below_cutoff
    assert r.reference_index == STACK.indices(1.55)["n_sub"]
    assert r.delta > 0


def test_cutoff_rib_reports_cutoff():
    with pytest.raises(RibCutoffError):
        delta_neff(RibGeometry(60, 60, 60, 90), STACK, 1550, "TM", mesh="coarse")


def test_single_cell_map_matches_delta_neff():
    spec = LeakageMapSpec((800,), (200, 200, 50), (700, 700, 50), 1550, "TM")
    (lmap,) = leakage_map(spec)
    assert lmap.values.shape == (1, 1)
    direct = delta_neff(RibGeometry(800, 200, 700, 80), STACK, 1550, "TM", "sweep", spec.count)
    assert lmap.values[0, 0] == direct.delta


def test_infeasible_cells_masked_not_computed():
    spec = LeakageMapSpec((800,), (300, 400, 100), (350, 350, 50), 1550, "TM", mesh="coarse")
    (lmap,) = leakage_map(spec)
    assert lmap.mask[0, 1] and "infeasible" in lmap.reasons[(400.0, 350.0)]
    assert np.isnan(lmap.values[0, 1])
    assert not lmap.mask[0, 0] and np.isfinite(lmap.values[0, 0])
    rows = lmap.rows()
    assert rows[1][3] is True
    assert lmap.provenance["materials"] == STACK.identifiers()


def test_map_independent_of_job_count():
    spec = LeakageMapSpec((800,), (150, 250, 100), (600, 700, 100), 1550, "TE", mesh="coarse")
    seen = []
    (a,) = leakage_map(spec, jobs=1, progress=lambda k, n: seen.append(k))
    (b,) = leakage_map(spec, jobs=2)
    assert np.array_equal(a.values, b.values)
    assert seen == sorted(seen) and seen[-1] == 4


def test_margin_increases_with_etch_depth():
    he = [100, 150, 200, 250, 300]
    vals = [delta_neff(RibGeometry(800, h, 700, 80), STACK, 1550, "TM", count=20).delta for h in he]
    assert np.all(np.diff(vals) > 0)


@pytest.mark.slow
@pytest.mark.parametrize(
    "pol,width,safe,leaky",
    [
        # shallow etch: TM becomes leaky below about 740 nm of film
        ("TM", 800, (50, 800), (50, 700)),
        # thin film: the TM boundary reaches the thin end near 200 nm of etch
        ("TM", 800, (250, 500), (150, 500)),
        # thick film: TE leaks unless the etch exceeds about 166 nm
        ("TE", 700, (200, 900), (150, 900)),
    ],
)
def test_crossover_brackets_boundary_bounds(pol, width, safe, leaky):
    """Each reported bound lies between a leak-free cell and a leaky cell."""

    def margin(he, hf):
        return delta_neff(RibGeometry(width, he, hf, 80), STACK, 1550, pol, count=20).delta

    assert margin(*safe) > 0 > margin(*leaky)
