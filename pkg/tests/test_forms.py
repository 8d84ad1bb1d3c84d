import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from disloc.forms import (
    CATALOG_NAMES,
    AffineMap,
    Covector,
    Point,
    catalog,
    check_derivatives,
    exterior_derivative,
    pullback,
    pushforward,
    tile_map,
    wedge,
)

finite = st.floats(-10, 10, allow_nan=False)


@given(finite, finite, finite, finite)
def test_wedge_antisymmetric(a, b, c, d):
    u, v = Covector(a, b), Covector(c, d)
    assert wedge(u, v) == pytest.approx(-wedge(v, u), abs=1e-12)
    assert wedge(u, u) == 0.0


def test_wedge_basis():
    assert wedge(Covector(1, 0), Covector(0, 1)) == 1.0


@given(finite, finite, finite, finite, finite)
def test_wedge_bilinear(a, b, c, d, s):
    u, v, w = Covector(a, b), Covector(c, d), Covector(d, a)
    assert wedge(u * s + w, v) == pytest.approx(s * wedge(u, v) + wedge(w, v), abs=1e-9)


@given(st.floats(0.1, 4), st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 1), st.floats(0, 1))
def test_affine_inverse_roundtrip(scale, ox, oy, x, y):
    m = AffineMap(scale, (ox, oy))
    u, v = m.inverse()(*m(x, y))
    assert (u, v) == pytest.approx((x, y), abs=1e-12)


def test_tile_map_image():
    assert tile_map(4, 1, 2).image == pytest.approx((0.25, 0.5, 0.5, 0.75))
    with pytest.raises(IndexError):
        tile_map(2, 2, 0)


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_catalog_derivatives_consistent(name):
    assert check_derivatives(catalog(name)) < 1e-5


def test_exterior_derivative_closed_forms():
    pts = np.linspace(0.05, 0.95, 7)
    X, Y = np.meshgrid(pts, pts)
    for name in ("dx", "dy", "dx+dy"):
        assert np.all(exterior_derivative(catalog(name))(X, Y) == 0)
    assert np.allclose(exterior_derivative(catalog("linear_y"))(X, Y), 1.0)


def test_pullback_scales_components(linear_y):
    m = tile_map(4, 3, 1)
    pb = pullback(linear_y, m)
    c1, c2 = pb(0.5, 0.5)
    u, v = m(0.5, 0.5)
    assert c1 == 0.0
    assert c2 == pytest.approx(0.25 * (1 + u))
    # d(m^* beta) = m^*(d beta): density 1 scales by scale^2
    assert exterior_derivative(pb)(0.3, 0.7) == pytest.approx(1 / 16)


def test_pushforward_inverts_pullback(linear_y):
    m = tile_map(2, 1, 0)
    back = pushforward(pullback(linear_y, m), m)
    assert back.at(Point(0.7, 0.2)).as_array() == pytest.approx(linear_y.at(Point(0.7, 0.2)).as_array())


def test_point_validation():
    with pytest.raises(ValueError):
        Point(float("nan"), 0.0)
