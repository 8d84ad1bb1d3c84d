import numpy as np
import pytest

from disloc.currents import random_test_forms
from disloc.forms import Point, catalog
from disloc.homogenization import (
    CONVERGE_COLUMNS,
    DislocationArray,
    array_jump,
    bound_constant,
    check_gluing,
    converge,
    convergence_bound,
)


@pytest.fixture(scope="module")
def arr2(linear_y):
    return DislocationArray(linear_y, 0.5, 2)


def test_segment_geometry(arr2):
    segs = arr2.segments()
    assert len(segs) == 4
    # tile width a/n on tiles of side 1/n: segments of length a/n^2, centred in each tile
    assert all(s[1] - s[0] == pytest.approx(0.125) for s in segs)
    assert sorted({s[2] for s in segs}) == pytest.approx([0.25, 0.75])
    assert arr2.total_cut_length() == pytest.approx(0.5)


def test_wide_segments(linear_y):
    arr = DislocationArray(linear_y, 0.5, 4, shrink_segments=False)
    assert arr.total_cut_length() == pytest.approx(0.5 * 4)


@pytest.mark.parametrize("n", [2, 4])
def test_cell_circulation_is_cell_area(linear_y, n):
    # int_cell dx^dy = 1/n^2
    arr = DislocationArray(linear_y, 0.5, n)
    for k in range(n):
        for j in range(n):
            assert arr.cell_circulation(k, j) == pytest.approx(1 / n**2, abs=1e-13)


@pytest.mark.parametrize("name", ["dx", "dy"])
def test_closed_forms_exact(name):
    beta = catalog(name)
    arr = DislocationArray(beta, 0.5, 4)
    g = (np.arange(40) + 0.37) / 40
    X, Y = np.meshgrid(g, g)
    got = np.stack(arr(X, Y))
    want = np.stack(np.broadcast_arrays(*beta(X, Y)))
    assert np.max(np.abs(got - want)) < 1e-9


def test_array_jump_is_scaled_tile_jump(arr2):
    k, j = 1, 0
    x_lo, x_hi, y = arr2.tile_segment(k, j)
    x = np.linspace(x_lo, x_hi, 9)[1:-1]
    below = arr2(x, np.full_like(x, y), side="below")[0]
    above = arr2(x, np.full_like(x, y), side="above")[0]
    assert np.max(np.abs(array_jump(arr2, k, j, x) - (below - above))) < 1e-8
    # the jump integral over one segment is the cell circulation
    t, w = np.polynomial.legendre.leggauss(30)
    xs = 0.5 * (x_hi - x_lo) * t + 0.5 * (x_lo + x_hi)
    assert float(np.sum(0.5 * (x_hi - x_lo) * w * array_jump(arr2, k, j, xs))) == pytest.approx(0.25, abs=1e-12)


def test_out_of_square(arr2):
    with pytest.raises(ValueError):
        arr2(1.2, 0.5)
    assert arr2.at(Point(1.0, 1.0)).as_array().shape == (2,)


@pytest.mark.parametrize("n", [2, 4])
def test_gluing(linear_y, n):
    rep = check_gluing(DislocationArray(linear_y, 0.5, n))
    assert rep.ok, rep.violations
    assert rep.value_mismatch < 1e-6 and rep.circulation_mismatch < 1e-8


def test_bound_formula():
    assert convergence_bound(2.0, 4, 1.0, 0.5, 0.3, 1.875) == pytest.approx(0.5 * (1.0 + 0.5 + 0.3 * 1.875))


def test_bound_constant_positive(arr2, linear_y):
    assert 0 < bound_constant(DislocationArray(linear_y, 0.5, 1)) < 10


def test_converge_small(linear_y):
    t = converge(linear_y, 0.5, random_test_forms(7, 2), n_list=(1, 2, 4))
    assert t.columns == CONVERGE_COLUMNS
    assert len(t.rows) == 6
    assert t.meta["all_bounds_ok"]
    gaps = t.column("gap", test_id="alpha0")
    assert abs(gaps[2]) < abs(gaps[0])
    csv = t.to_csv()
    assert csv.startswith(",".join(CONVERGE_COLUMNS) + "\n") and "\r" not in csv
