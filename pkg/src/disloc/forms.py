"""Points, affine tile maps and analytic 1-/2-forms on the unit square.

Forms are vectorised: every evaluator takes broadcastable arrays ``x, y`` and
returns an array of the broadcast shape. A :class:`SmoothOneForm` carries its
own partial derivatives so that later constructions never difference it
numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def check_in_square(self) -> "Point":
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValueError(f"point ({self.x}, {self.y}) outside [0,1]^2")
        return self

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class Covector:
    """Components of a covector in the basis dx, dy."""

    c1: float
    c2: float

    def __post_init__(self):
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise ValueError("covector entries must be finite")

    def __add__(self, other: "Covector") -> "Covector":
        return Covector(self.c1 + other.c1, self.c2 + other.c2)

    def __sub__(self, other: "Covector") -> "Covector":
        return Covector(self.c1 - other.c1, self.c2 - other.c2)

    def __mul__(self, s: float) -> "Covector":
        return Covector(self.c1 * s, self.c2 * s)

    __rmul__ = __mul__

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2])


def wedge(omega: Covector, eta: Covector) -> float:
    """Coefficient of dx^dy in ``omega ^ eta``."""
    return omega.c1 * eta.c2 - omega.c2 * eta.c1


def wedge_arrays(w1, w2, e1, e2):
    return w1 * e2 - w2 * e1


@dataclass(frozen=True)
class AffineMap:
    """``p -> scale * p + shift`` with ``scale > 0``.

    ``tile_map(n, k, j)`` is the map ``S_{1/n} o tau_(k,j)``.
    """

    scale: float
    shift: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ValueError("affine map scale must be positive")
        object.__setattr__(self, "shift", (float(self.shift[0]), float(self.shift[1])))

    def __call__(self, x, y):
        return self.scale * x + self.shift[0], self.scale * y + self.shift[1]

    def apply(self, p: Point) -> Point:
        x, y = self(p.x, p.y)
        return Point(x, y)

    def inverse(self) -> "AffineMap":
        s = 1.0 / self.scale
        return AffineMap(s, (-self.shift[0] * s, -self.shift[1] * s))

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """``self o inner``."""
        return AffineMap(
            self.scale * inner.scale,
            (self.scale * inner.shift[0] + self.shift[0], self.scale * inner.shift[1] + self.shift[1]),
        )

    def inverse_call(self, x, y):
        return (x - self.shift[0]) / self.scale, (y - self.shift[1]) / self.scale

    @property
    def image(self) -> tuple[float, float, float, float]:
        """Image of the unit square as ``(x0, x1, y0, y1)``."""
        x0, y0 = self.shift
        return x0, x0 + self.scale, y0, y0 + self.scale


IDENTITY = AffineMap(1.0)


def tile_map(n: int, k: int, j: int) -> AffineMap:
    """Map of the unit square onto tile ``(k, j)`` of the ``n``-by-``n`` tiling."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not (0 <= k < n and 0 <= j < n):
        raise IndexError(f"tile index ({k}, {j}) out of range for n={n}")
    return AffineMap(1.0 / n, (k / n, j / n))


def _zero(x, y):
    return np.zeros(np.broadcast(x, y).shape)


def _const(c):
    def f(x, y):
        return np.full(np.broadcast(x, y).shape, float(c))

    return f


@dataclass(frozen=True)
class TwoForm:
    """Density of ``density(x, y) dx^dy``."""

    density: Evaluator
    name: str = ""

    def __call__(self, x, y):
        return self.density(x, y)


@dataclass(frozen=True)
class SmoothOneForm:
    """``beta = b1 dx + b2 dy`` with analytic partials.

    Required partials are the first derivatives of both components and the
    second derivatives ``b1_xx`` and ``b1_xy``, which is what the layering
    construction consumes.
    """

    b1: Evaluator
    b2: Evaluator
    b1_x: Evaluator
    b1_y: Evaluator
    b2_x: Evaluator
    b2_y: Evaluator
    b1_xx: Evaluator = _zero
    b1_xy: Evaluator = _zero
    name: str = ""
    closed: bool = field(default=False, compare=False)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.b1(x, y), self.b2(x, y)

    def at(self, p: Point) -> Covector:
        c1, c2 = self(p.x, p.y)
        return Covector(float(c1), float(c2))

    @property
    def cuts(self):
        from .quadrature import CutSet

        return CutSet()

    def pieces(self, box):
        return [(box, self.cuts, self)]

    def __add__(self, other: "SmoothOneForm") -> "SmoothOneForm":
        def add(f, g):
            return lambda x, y: f(x, y) + g(x, y)

        return SmoothOneForm(
            add(self.b1, other.b1),
            add(self.b2, other.b2),
            add(self.b1_x, other.b1_x),
            add(self.b1_y, other.b1_y),
            add(self.b2_x, other.b2_x),
            add(self.b2_y, other.b2_y),
            add(self.b1_xx, other.b1_xx),
            add(self.b1_xy, other.b1_xy),
            name=f"{self.name}+{other.name}",
            closed=self.closed and other.closed,
        )

    def scaled(self, s: float) -> "SmoothOneForm":
        def mul(f):
            return lambda x, y: s * f(x, y)

        return SmoothOneForm(
            *(mul(f) for f in (self.b1, self.b2, self.b1_x, self.b1_y, self.b2_x, self.b2_y, self.b1_xx, self.b1_xy)),
            name=f"{s}*{self.name}",
            closed=self.closed,
        )


def exterior_derivative(beta: SmoothOneForm) -> TwoForm:
    """``d beta`` as the density ``b2_x - b1_y``."""

    def density(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return beta.b2_x(x, y) - beta.b1_y(x, y)

    return TwoForm(density, name=f"d({beta.name})")


def pullback(beta: SmoothOneForm, m: AffineMap) -> SmoothOneForm:
    """``m^* beta``: components scale by ``m.scale``, k-th partials by ``scale^(k+1)``."""
    s = m.scale

    def lift(f, power):
        c = s**power

        def g(x, y):
            u, v = m(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
            return c * f(u, v)

        return g

    return SmoothOneForm(
        lift(beta.b1, 1),
        lift(beta.b2, 1),
        lift(beta.b1_x, 2),
        lift(beta.b1_y, 2),
        lift(beta.b2_x, 2),
        lift(beta.b2_y, 2),
        lift(beta.b1_xx, 3),
        lift(beta.b1_xy, 3),
        name=beta.name,
        closed=beta.closed,
    )


def pushforward(omega: SmoothOneForm, m: AffineMap) -> SmoothOneForm:
    """``m_* omega``, defined on ``m([0,1]^2)``; equals the pullback under ``m^-1``."""
    return pullback(omega, m.inverse())


def pushforward_covector(c: Covector, m: AffineMap) -> Covector:
    return Covector(c.c1 / m.scale, c.c2 / m.scale)


def check_derivatives(beta: SmoothOneForm, points=None, step: float = 1e-4, rtol: float = 1e-5) -> float:
    """Largest mismatch between supplied partials and centred differences.

    The mismatch of each partial is measured relative to ``1 + |value|``.
    Raises ``ValueError`` when it exceeds ``rtol``; returns it otherwise.
    Points default to a 9x9 grid kept ``step`` away from the boundary.
    """
    if points is None:
        g = np.linspace(step, 1.0 - step, 9)
        xs, ys = np.meshgrid(g, g)
    else:
        xs = np.array([p[0] for p in points], dtype=float)
        ys = np.array([p[1] for p in points], dtype=float)
    h = step

    def dx(f):
        return (f(xs + h, ys) - f(xs - h, ys)) / (2 * h)

    def dy(f):
        return (f(xs, ys + h) - f(xs, ys - h)) / (2 * h)

    pairs = [
        ("b1_x", beta.b1_x(xs, ys), dx(beta.b1)),
        ("b1_y", beta.b1_y(xs, ys), dy(beta.b1)),
        ("b2_x", beta.b2_x(xs, ys), dx(beta.b2)),
        ("b2_y", beta.b2_y(xs, ys), dy(beta.b2)),
        ("b1_xx", beta.b1_xx(xs, ys), dx(beta.b1_x)),
        ("b1_xy", beta.b1_xy(xs, ys), dy(beta.b1_x)),
    ]
    worst = 0.0
    for label, exact, approx in pairs:
        err = float(np.max(np.abs(exact - approx) / (1.0 + np.abs(exact))))
        if err > rtol:
            raise ValueError(f"{beta.name}: supplied {label} disagrees with finite differences ({err:.3e})")
        worst = max(worst, err)
    return worst


# ----------------------------------------------------------------------------
# catalog


def _dx():
    return SmoothOneForm(_const(1.0), _zero, _zero, _zero, _zero, _zero, name="dx", closed=True)


def _dy():
    return SmoothOneForm(_zero, _const(1.0), _zero, _zero, _zero, _zero, name="dy", closed=True)


def _dx_plus_dy():
    return SmoothOneForm(_const(1.0), _const(1.0), _zero, _zero, _zero, _zero, name="dx+dy", closed=True)


def _linear_y():
    # (1 + x) dy, d beta = dx^dy
    return SmoothOneForm(
        _zero,
        lambda x, y: 1.0 + x + 0.0 * y,
        _zero,
        _zero,
        _const(1.0),
        _zero,
        name="linear_y",
    )


def _shear_x():
    # -y dx, d beta = dx^dy
    return SmoothOneForm(
        lambda x, y: -y + 0.0 * x,
        _zero,
        _zero,
        _const(-1.0),
        _zero,
        _zero,
        name="shear_x",
    )


def _mixed():
    # (1 + x) dy + sin(pi y) dx
    pi = math.pi
    return SmoothOneForm(
        lambda x, y: np.sin(pi * y) + 0.0 * x,
        lambda x, y: 1.0 + x + 0.0 * y,
        _zero,
        lambda x, y: pi * np.cos(pi * y) + 0.0 * x,
        _const(1.0),
        _zero,
        name="mixed",
    )


_CATALOG = {
    "dx": _dx,
    "dy": _dy,
    "dx+dy": _dx_plus_dy,
    "linear_y": _linear_y,
    "shear_x": _shear_x,
    "mixed": _mixed,
}

CATALOG_NAMES = tuple(_CATALOG)


def catalog(name: str) -> SmoothOneForm:
    """Named test forms: ``dx``, ``dy``, ``dx+dy``, ``linear_y`` = (1+x)dy,
    ``shear_x`` = -y dx and ``mixed`` = (1+x)dy + sin(pi y)dx."""
    try:
        return _CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown form {name!r}; choose from {', '.join(CATALOG_NAMES)}") from None
