"""1-currents induced by (possibly singular) 1-forms, and their boundaries.

A 1-form ``omega`` acts on compactly supported test 1-forms by
``T_omega(alpha) = int omega ^ alpha``; its boundary acts on test functions by
``dT_omega(f) = T_omega(df)``. For smooth ``omega`` integration by parts gives
``dT_omega(f) = int f d(omega)``; for a closed form with a cut the boundary
current concentrates on the cut with the jump as density.

Forms used here expose ``__call__(x, y) -> (c1, c2)`` and
``pieces(box) -> [(cell, cuts, evaluator), ...]`` which splits an
integration box into smooth-geometry pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._parallel import parallel_map
from .forms import Covector, Point, exterior_derivative
from .quadrature import QuadratureSpec, integrate_cell, integrate_interval

_UNIT = (0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class TestFunction:
    """Bump ``(1 - rho^2)^3`` with ``rho = |p - center| / radius``, scaled by ``amplitude``."""

    __test__ = False  # not a pytest class

    center: Point
    radius: float
    amplitude: float = 1.0
    name: str = ""

    def __post_init__(self):
        cx, cy, r = self.center.x, self.center.y, self.radius
        if not r > 0:
            raise ValueError("radius must be positive")
        if not (cx - r > 0 and cx + r < 1 and cy - r > 0 and cy + r < 1):
            raise ValueError("test function support must lie strictly inside (0,1)^2")

    def __call__(self, x, y):
        return self.amplitude * _kernels.bump(x, y, self.center.x, self.center.y, self.radius)

    def gradient(self, x, y):
        gx, gy = _kernels.bump_grad(x, y, self.center.x, self.center.y, self.radius)
        return self.amplitude * gx, self.amplitude * gy

    def at(self, p: Point) -> float:
        return float(self(p.x, p.y))

    def gradient_at(self, p: Point) -> Covector:
        gx, gy = self.gradient(p.x, p.y)
        return Covector(float(gx), float(gy))

    @property
    def box(self):
        cx, cy, r = self.center.x, self.center.y, self.radius
        return (cx - r, cx + r, cy - r, cy + r)

    def differential(self) -> "TestOneForm":
        """``df`` as a test 1-form."""
        return TestOneForm(self, self, kind="gradient", name=f"d{self.name}")


@dataclass(frozen=True)
class TestOneForm:
    """Compactly supported test 1-form ``alpha = c1 b1 dx + c2 b2 dy``.

    With ``kind="gradient"`` both fields refer to one bump ``f`` and the
    form is ``df``.
    """

    __test__ = False

    first: TestFunction | None
    second: TestFunction | None
    kind: str = "bumps"
    name: str = ""

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "gradient":
            return self.first.gradient(x, y)
        zero = np.zeros(np.broadcast(x, y).shape)
        a1 = self.first(x, y) if self.first is not None else zero
        a2 = self.second(x, y) if self.second is not None else zero
        return a1, a2

    def d(self, x, y):
        """Density of ``d alpha``."""
        if self.kind == "gradient":
            return np.zeros(np.broadcast(x, y).shape)
        zero = np.zeros(np.broadcast(x, y).shape)
        a2x = self.second.gradient(x, y)[0] if self.second is not None else zero
        a1y = self.first.gradient(x, y)[1] if self.first is not None else zero
        return a2x - a1y

    @property
    def box(self):
        boxes = [f.box for f in (self.first, self.second) if f is not None]
        if not boxes:
            return None
        return (
            min(b[0] for b in boxes),
            max(b[1] for b in boxes),
            min(b[2] for b in boxes),
            max(b[3] for b in boxes),
        )

    def sup_norm(self, resolution: int = 401) -> float:
        """Euclidean sup norm, sampled on a grid through the bump centres."""
        box = self.box
        if box is None:
            return 0.0
        xs = np.linspace(box[0], box[1], resolution)
        ys = np.linspace(box[2], box[3], resolution)
        extra_x = [f.center.x for f in (self.first, self.second) if f is not None]
        extra_y = [f.center.y for f in (self.first, self.second) if f is not None]
        X, Y = np.meshgrid(np.union1d(xs, extra_x), np.union1d(ys, extra_y))
        a1, a2 = self(X, Y)
        return float(np.max(np.hypot(a1, a2)))


ZERO_FORM = TestOneForm(None, None, name="0")


def random_test_functions(seed: int, count: int, center_range=(0.3, 0.7), radius_range=(0.12, 0.25)):
    """Reproducible bumps with supports strictly inside the square."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        cx, cy = rng.uniform(*center_range, size=2)
        r = rng.uniform(*radius_range)
        r = min(r, cx - 1e-3, 1 - cx - 1e-3, cy - 1e-3, 1 - cy - 1e-3)
        amp = rng.uniform(0.5, 1.5)
        out.append(TestFunction(Point(float(cx), float(cy)), float(r), float(amp), name=f"f{len(out)}"))
    return out


def random_test_forms(seed: int, count: int, center_range=(0.3, 0.7), radius_range=(0.12, 0.25)):
    """Reproducible test 1-forms; each component is its own bump."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        comps = []
        for _ in range(2):
            cx, cy = rng.uniform(*center_range, size=2)
            r = rng.uniform(*radius_range)
            r = min(r, cx - 1e-3, 1 - cx - 1e-3, cy - 1e-3, 1 - cy - 1e-3)
            amp = rng.uniform(-1.5, 1.5)
            comps.append(TestFunction(Point(float(cx), float(cy)), float(r), float(amp)))
        out.append(TestOneForm(comps[0], comps[1], name=f"alpha{i}"))
    return out


def _clip(box, cell):
    return (max(box[0], cell[0]), min(box[1], cell[1]), max(box[2], cell[2]), min(box[3], cell[3]))


@dataclass(frozen=True)
class CurrentPairing:
    """The 1-current ``T_omega`` with the quadrature used to evaluate it."""

    form: object
    spec: QuadratureSpec = QuadratureSpec()

    def __call__(self, alpha: TestOneForm) -> float:
        return pair(self, alpha)


def _integrate_pieces(pieces, integrand_for, spec):
    def work(piece):
        cell, cuts, ev = piece
        if cell[1] <= cell[0] or cell[3] <= cell[2]:
            return 0.0
        return integrate_cell(integrand_for(ev), cell, cuts, spec)

    return math.fsum(parallel_map(work, pieces))


def pair(T: CurrentPairing, alpha: TestOneForm) -> float:
    """``T_omega(alpha) = int omega ^ alpha`` over the support of ``alpha``."""
    box = alpha.box
    if box is None:
        return 0.0
    box = _clip(box, _UNIT)

    def integrand_for(ev):
        def g(x, y):
            w1, w2 = ev(x, y)
            a1, a2 = alpha(x, y)
            return w1 * a2 - w2 * a1

        return g

    return _integrate_pieces(T.form.pieces(box), integrand_for, T.spec)


def boundary_smooth(T: CurrentPairing, f: TestFunction) -> float:
    """``dT(f) = T(df)`` by area quadrature. Valid for any form, smooth or not."""
    return pair(T, f.differential())


def boundary_density(beta, f: TestFunction, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """``int f d(beta)`` for a smooth form; equals ``dT_beta(f)`` after integration by parts."""
    dens = exterior_derivative(beta)
    box = _clip(f.box, _UNIT)
    return integrate_cell(lambda x, y: f(x, y) * dens(x, y), box, None, spec)


def boundary_singular(d, f: TestFunction, spec: QuadratureSpec = QuadratureSpec(order=16, max_panel=1 / 64)) -> float:
    """``int_Gamma f [nu]`` summed over the cut segments of ``d``.

    ``d`` exposes ``jump_segments()`` yielding ``(x_lo, x_hi, y, jump)``
    (arrays and single dislocations both do).
    """
    parts = []
    for x_lo, x_hi, y, jump in d.jump_segments():
        cx, cy, r = f.center.x, f.center.y, f.radius
        if abs(y - cy) >= r:
            continue
        half = math.sqrt(r * r - (y - cy) ** 2)
        lo, hi = max(x_lo, cx - half), min(x_hi, cx + half)
        if hi <= lo:
            continue
        parts.append(integrate_interval(lambda x, y=y, jump=jump: f(x, np.full_like(x, y)) * jump(x), lo, hi, spec))
    return math.fsum(parts)


class _Difference:
    def __init__(self, primary, other):
        self.primary = primary
        self.other = other

    def pieces(self, box):
        extra = getattr(self.other, "cuts", None)
        out = []
        for cell, cuts, ev in self.primary.pieces(box):
            if extra is not None:
                cuts = cuts.merge(extra)

            def diff(x, y, ev=ev):
                p1, p2 = ev(x, y)
                q1, q2 = self.other(x, y)
                return p1 - q1, p2 - q2

            out.append((cell, cuts, diff))
        return out


def gap(omega1, omega2, alpha: TestOneForm, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """``T_{omega1 - omega2}(alpha)`` as one integral of the difference.

    Pieces come from whichever form splits the domain more finely, and
    the cut sets of both forms are merged into every piece.
    """
    box = alpha.box
    if box is None:
        return 0.0
    box = _clip(box, _UNIT)
    n1 = len(omega1.pieces(box))
    n2 = len(omega2.pieces(box))
    if n1 >= n2:
        diff = _Difference(omega1, omega2)
        sign = 1.0
    else:
        diff = _Difference(omega2, omega1)
        sign = -1.0
    return sign * pair(CurrentPairing(diff, spec), alpha)
