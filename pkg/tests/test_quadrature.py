import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disloc.forms import catalog
from disloc.quadrature import (
    CutSet,
    QuadratureError,
    QuadratureSpec,
    circulation,
    gauss_legendre,
    integrate_cell,
    integrate_interval,
    integrate_line,
    panel_breaks,
    rectangle_path,
    sup_norm,
)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.lists(st.floats(-3, 3), min_size=1, max_size=24))
def test_gauss_exact_for_polynomials(order, coeffs):
    coeffs = coeffs[: 2 * order]
    t, w = gauss_legendre(order)
    approx = float(np.sum(w * np.polyval(coeffs[::-1], t)))
    exact = sum(c / (k + 1) for k, c in enumerate(coeffs))
    assert approx == pytest.approx(exact, abs=1e-11 * (1 + sum(map(abs, coeffs))))


def test_step_function_exact_with_break():
    f = lambda x: np.where(x < 0.3, 1.0, 2.0)  # noqa: E731
    assert integrate_interval(f, 0.0, 1.0, QuadratureSpec(), [0.3]) == pytest.approx(0.3 + 1.4, abs=1e-14)


def test_panel_breaks_include_extras():
    b = panel_breaks(0.0, 1.0, [0.123], 0.25)
    assert 0.123 in b and b[0] == 0.0 and b[-1] == 1.0
    assert np.max(np.diff(b)) <= 0.25 + 1e-15


def test_spec_validation():
    with pytest.raises(QuadratureError):
        QuadratureSpec(order=0)


def test_line_integral_exact_and_closed():
    loop = rectangle_path(0.1, 0.6, 0.2, 0.9)
    assert integrate_line(catalog("dx"), loop) == pytest.approx(0.0, abs=1e-14)
    # Green: loop integral of (1 + x) dy is the enclosed area
    assert integrate_line(catalog("linear_y"), loop) == pytest.approx(0.5 * 0.7, abs=1e-13)


def test_circulation_of_catalog():
    assert circulation(catalog("linear_y")) == pytest.approx(1.0, abs=1e-13)
    assert circulation(catalog("dx+dy")) == pytest.approx(0.0, abs=1e-13)


def test_cell_integral_with_cut():
    cuts = CutSet(horizontal_segments=((0.2, 0.8, 0.5),))
    dens = lambda x, y: np.where(y < 0.5, x, 2 * x)  # noqa: E731
    assert integrate_cell(dens, (0, 1, 0, 1), cuts) == pytest.approx(0.25 + 0.5, abs=1e-13)


def test_sup_norm_and_on_cut():
    cuts = CutSet(horizontal_segments=((0.25, 0.75, 0.5),))
    assert bool(cuts.on_cut(0.5, 0.5)) and not bool(cuts.on_cut(0.9, 0.5))
    assert cuts.total_length() == pytest.approx(0.5)
    assert sup_norm(lambda x, y: (np.sin(math.pi * x), 0 * y)) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("name", ["dx", "dy", "dx+dy", "linear_y", "shear_x", "mixed"])
def test_stokes_on_random_subcells(name):
    from disloc.forms import exterior_derivative

    beta = catalog(name)
    rng = np.random.default_rng(17)
    for _ in range(20):
        x0, x1 = np.sort(rng.uniform(0, 1, 2))
        y0, y1 = np.sort(rng.uniform(0, 1, 2))
        cell = (x0, x1, y0, y1)
        assert abs(circulation(beta, cell) - integrate_cell(exterior_derivative(beta), cell)) < 1e-8


@pytest.mark.parametrize("name", ["linear_y", "mixed"])
def test_refinement_stability(name):
    spec = QuadratureSpec()
    loop = rectangle_path(0.13, 0.77, 0.21, 0.94)
    base = integrate_line(catalog(name), loop, spec)
    for finer in (spec.refined(order_factor=2), spec.refined(panel_factor=2)):
        assert abs(integrate_line(catalog(name), loop, finer) - base) < 10 * spec.tol
