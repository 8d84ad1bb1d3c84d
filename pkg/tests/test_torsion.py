import numpy as np
import pytest

from conftest import bump_integral
from disloc.currents import TestFunction, random_test_functions
from disloc.dislocation import DislocationForm
from disloc.forms import Point, catalog
from disloc.homogenization import DislocationArray
from disloc.quadrature import rectangle_path
from disloc.torsion import (
    Coframe,
    DegenerateCoframeError,
    ReferencePointError,
    burgers_vector,
    dual_frame,
    duality_error,
    frame_parallelism,
    parallel_transport,
    torsion_current,
    torsion_density,
    torsion_homogenization,
)

P = Point(1 / 3, 1 / 3)


@pytest.fixture(scope="module")
def smooth_cf():
    return Coframe(catalog("linear_y"), catalog("dx"))


def test_dual_frame_closed_form(smooth_cf):
    # M = [[0, 1 + x], [1, 0]]  =>  e1 = (0, 1/(1 + x)), e2 = (1, 0)
    f = dual_frame(smooth_cf, P)
    assert f.e1 == pytest.approx((0.0, 0.75))
    assert f.e2 == pytest.approx((1.0, 0.0))
    assert duality_error(smooth_cf, P) < 1e-14


def test_parallel_transport(smooth_cf):
    q = Point(0.8, 0.1)
    pi = parallel_transport(smooth_cf, P, q)
    assert pi @ np.array([0.0, 0.75]) == pytest.approx([0.0, 1 / 1.8])
    assert parallel_transport(smooth_cf, P, P) == pytest.approx(np.eye(2))
    assert frame_parallelism(smooth_cf, P) < 1e-6


def test_degenerate_coframe():
    with pytest.raises(DegenerateCoframeError):
        Coframe(catalog("dx"), catalog("dx")).frame_matrix(P)


def test_torsion_density(smooth_cf):
    dens = torsion_density(smooth_cf, P)
    assert dens(0.5, 0.5) == pytest.approx([0.0, 0.75])


def test_smooth_torsion_current(smooth_cf):
    eta = TestFunction(Point(0.5, 0.5), 0.3, 0.8)
    v = torsion_current(smooth_cf, P, eta)
    assert v.as_array() == pytest.approx([0.0, 0.75 * bump_integral(eta)], abs=1e-10)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_singular_current_weak_equals_jump_sum(linear_y, n):
    form = DislocationForm(linear_y, 0.5) if n == 1 else DislocationArray(linear_y, 0.5, n)
    cf = Coframe(form, catalog("dx"))
    for eta in random_test_functions(3, 3):
        strong = torsion_current(cf, P, eta).as_array()
        weak = torsion_current(cf, P, eta, mode="weak").as_array()
        assert np.max(np.abs(strong - weak)) < 1e-7


def test_reference_point_on_cut(nu_half):
    with pytest.raises(ReferencePointError):
        torsion_current(Coframe(nu_half, catalog("dx")), Point(0.5, 0.5), random_test_functions(1, 1)[0])


def test_burgers_singular_loop(nu_half):
    cf = Coframe(nu_half, catalog("dx"))
    e = np.linalg.inv(np.array([nu_half.at(P).as_array(), [1.0, 0.0]]))
    for delta in (0.2, 0.01):
        loop = rectangle_path(0.25 - delta, 0.75 + delta, 0.5 - delta, 0.5 + delta)
        b = burgers_vector(cf, loop, P)
        assert b.as_array() == pytest.approx(e[:, 0] * 1.0, abs=1e-7)
        assert b.norm() >= 0.99 * np.linalg.norm(e[:, 0])


def test_burgers_defect_free_loop(nu_half):
    cf = Coframe(nu_half, catalog("dx"))
    b = burgers_vector(cf, rectangle_path(0.1, 0.9, 0.55, 0.95), P)
    assert b.norm() < 1e-9


def test_burgers_smooth_loop_is_area(smooth_cf):
    b = burgers_vector(smooth_cf, rectangle_path(0.1, 0.6, 0.2, 0.5), P)
    assert b.as_array() == pytest.approx([0.0, 0.75 * 0.5 * 0.3], abs=1e-12)


def test_loop_must_close(smooth_cf):
    with pytest.raises(ValueError):
        burgers_vector(smooth_cf, [(0.1, 0.1), (0.2, 0.1), (0.2, 0.2), (0.1, 0.2)], P)


def test_torsion_homogenization_small(linear_y):
    t = torsion_homogenization(linear_y, 0.5, random_test_functions(5, 2), n_list=(1, 2, 4))
    assert len(t.rows) == 6
    # the dx partner has e1 with zero x component, so component 1 never moves
    assert all(v is None for k, v in t.meta["slopes"].items() if k.endswith("component_1"))
    assert t.meta["frame_gap"]["2"] == pytest.approx(1 / 6, abs=1e-9)
    assert t.meta["frame_gap"]["4"] == pytest.approx(1 / 12, abs=1e-9)
