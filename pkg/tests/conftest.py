import math

import numpy as np
import pytest

from disloc.currents import TestFunction
from disloc.dislocation import DislocationForm
from disloc.forms import Point, catalog


def bump_integral(f: TestFunction) -> float:
    """Closed form of the integral of ``A (1 - rho^2)^3`` over its disk: ``A pi R^2 / 4``."""
    return f.amplitude * math.pi * f.radius**2 / 4.0


def tensor_gauss(fun, box, order=40, panels=8):
    """Plain tensor Gauss-Legendre rule, independent of the package quadrature."""
    t, w = np.polynomial.legendre.leggauss(order)
    x0, x1, y0, y1 = box
    ex = np.linspace(x0, x1, panels + 1)
    ey = np.linspace(y0, y1, panels + 1)
    xs = np.concatenate([0.5 * (b - a) * t + 0.5 * (a + b) for a, b in zip(ex[:-1], ex[1:])])
    ys = np.concatenate([0.5 * (b - a) * t + 0.5 * (a + b) for a, b in zip(ey[:-1], ey[1:])])
    wx = np.concatenate([0.5 * (b - a) * w for a, b in zip(ex[:-1], ex[1:])])
    wy = np.concatenate([0.5 * (b - a) * w for a, b in zip(ey[:-1], ey[1:])])
    X, Y = np.meshgrid(xs, ys)
    return float(np.sum(fun(X, Y) * np.outer(wy, wx)))


@pytest.fixture(scope="session")
def linear_y():
    return catalog("linear_y")


@pytest.fixture(scope="session")
def nu_half(linear_y):
    return DislocationForm(linear_y, 0.5)


@pytest.fixture
def bump():
    return TestFunction(Point(0.45, 0.55), 0.2, 1.3, name="f")


# -- acceptance summary ----------------------------------------------------------

ACCEPTANCE: dict = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    """Store one pass/fail line per acceptance criterion (last write wins)."""
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
