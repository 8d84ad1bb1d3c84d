"""Single edge-dislocation layering form on the unit square.

Given a smooth 1-form ``beta`` and a width ``a``, :class:`DislocationForm`
builds a potential ``f`` that is discontinuous across the segment
``Gamma_a = [1/2 - a/2, 1/2 + a/2] x {1/2}`` (and across the ray joining it to
``q0 = (1, 1/2)``), and evaluates ``nu_a = df`` from closed-form derivative
expressions. ``nu_a`` is closed off ``Gamma_a``, agrees with ``beta`` on the
left and right edges, keeps the horizontal component of ``beta`` outside the
strip ``|x - 1/2| < a/2`` and has the same circulation as ``beta``.

The boundary potential runs counter-clockwise from ``q0``, so ``f`` jumps by
the circulation when crossing the ray upward. Inside the strip the jump of
``nu_a`` across ``Gamma_a`` sits in the ``dx`` component.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .forms import Covector, Point, SmoothOneForm
from .quadrature import CutSet, QuadratureSpec, batched_integral, integrate_interval

A_MIN, A_MAX = 0.05, 0.95
Y_CUT = 0.5
_EDGE_SPEC = QuadratureSpec(order=20, max_panel=0.125)


class ParameterError(ValueError):
    pass


class CutEvaluationError(ValueError):
    """Evaluation requested exactly on a cut without choosing a side."""


@dataclass(frozen=True)
class SmoothingFunction:
    """Monotone transition ``r`` from 0 (t <= -1/2) to 1 (t >= 1/2) with derivative ``dr``."""

    name: str
    r: Callable
    dr: Callable

    def __call__(self, t):
        return self.r(t)

    def max_derivative(self, samples: int = 20001) -> float:
        t = np.linspace(-0.5, 0.5, samples)
        return float(np.max(np.abs(self.dr(t))))

    def validate(self, samples: int = 4001) -> list[str]:
        """Return a list of violated properties (empty when ``r`` is admissible)."""
        issues = []
        t = np.linspace(-0.75, 0.75, samples)
        rv = np.asarray(self.r(t), dtype=float)
        dv = np.asarray(self.dr(t), dtype=float)
        if np.any(np.diff(rv) < -1e-14) or np.any(dv < -1e-14):
            issues.append("not monotone")
        if np.any(np.abs(rv[t <= -0.5]) > 0) or np.any(np.abs(rv[t >= 0.5] - 1.0) > 0):
            issues.append("boundary values")
        total = integrate_interval(self.dr, -0.5, 0.5, QuadratureSpec(order=16, max_panel=1 / 16))
        if abs(total - 1.0) > 1e-10:
            issues.append(f"integral of r' is {total!r}")
        h = 1e-5
        tc = np.linspace(-0.49, 0.49, 99)
        fd = (self.r(tc + h) - self.r(tc - h)) / (2 * h)
        if np.max(np.abs(fd - self.dr(tc))) > 1e-6:
            issues.append("r' inconsistent with r")
        return issues


def quintic() -> SmoothingFunction:
    """C^2 quintic smoothstep ``6s^5 - 15s^4 + 10s^3``, ``s = t + 1/2``; ``max r' = 15/8``."""
    return SmoothingFunction("quintic", _kernels.smoothstep, _kernels.smoothstep_deriv)


def _psi(s):
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)


def _dpsi(s):
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        safe = np.where(s > 0, s, 1.0)
        return np.where(s > 0, np.exp(-1.0 / safe) / safe**2, 0.0)


def smooth_transition() -> SmoothingFunction:
    """C-infinity transition ``g(s) / (g(s) + g(1 - s))`` with ``g(s) = exp(-1/s)``."""

    def r(t):
        s = np.clip(np.asarray(t, dtype=float) + 0.5, 0.0, 1.0)
        a, b = _psi(s), _psi(1.0 - s)
        return a / (a + b)

    def dr(t):
        s = np.clip(np.asarray(t, dtype=float) + 0.5, 0.0, 1.0)
        a, b = _psi(s), _psi(1.0 - s)
        da, db = _dpsi(s), _dpsi(1.0 - s)
        return (da * b + a * db) / (a + b) ** 2

    return SmoothingFunction("cinf", r, dr)


def corrupted() -> SmoothingFunction:
    """Fault-injection transition: non-monotone ``r`` whose ``r'`` ignores the wiggle."""

    def r(t):
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) < 0.5
        return _kernels.smoothstep(t) + np.where(inside, 0.3 * np.sin(2 * np.pi * (t + 0.5)), 0.0)

    return SmoothingFunction("corrupted", r, _kernels.smoothstep_deriv)


SMOOTHING = {"quintic": quintic, "cinf": smooth_transition}


def smoothing(name: str, allow_faulty: bool = False) -> SmoothingFunction:
    if name == "corrupted" and allow_faulty:
        return corrupted()
    try:
        return SMOOTHING[name]()
    except KeyError:
        raise KeyError(f"unknown smoothing function {name!r}; choose from {', '.join(SMOOTHING)}") from None


def check_width(a: float) -> float:
    a = float(a)
    if not (A_MIN <= a <= A_MAX):
        raise ParameterError(f"a={a} outside the admissible range [{A_MIN}, {A_MAX}]")
    return a


class DislocationForm:
    """The layering form ``nu_a`` with a single edge dislocation on ``Gamma_a``.

    Parameters
    ----------
    beta : SmoothOneForm
        Smooth layering form to be dislocated; should not vanish.
    a : float
        Relative width of the dislocation segment.
    r : SmoothingFunction, optional
        Interpolating transition; the quintic smoothstep by default.
    check_range : bool
        Enforce ``a`` in ``[0.05, 0.95]``. Tile-level forms inside an array
        use smaller widths and switch this off.
    inner_order, inner_panel
        Gauss rule for the horizontal integrals of ``beta`` evaluated at
        every query point.
    """

    def __init__(
        self,
        beta: SmoothOneForm,
        a: float,
        r: SmoothingFunction | None = None,
        *,
        check_range: bool = True,
        inner_order: int = 20,
        inner_panel: float = 0.5,
    ):
        a = check_width(a) if check_range else float(a)
        if not 0.0 < a < 1.0:
            raise ParameterError("a must lie in (0, 1)")
        self.beta = beta
        self.a = a
        self.r = r or quintic()
        self.x_left = 0.5 - 0.5 * a
        self.x_right = 0.5 + 0.5 * a
        self._order = inner_order
        self._panel = inner_panel

        b1, b2 = beta.b1, beta.b2
        self._k_right_upper = integrate_interval(lambda s: b2(1.0, s), 0.5, 1.0, _EDGE_SPEC)
        self._k_right_lower = integrate_interval(lambda s: b2(1.0, s), 0.0, 0.5, _EDGE_SPEC)
        self._k_top = integrate_interval(lambda s: b1(s, 1.0), 0.0, 1.0, _EDGE_SPEC)
        self._k_left = integrate_interval(lambda s: b2(0.0, s), 0.0, 1.0, _EDGE_SPEC)
        self._k_bottom = integrate_interval(lambda s: b1(s, 0.0), 0.0, 1.0, _EDGE_SPEC)
        self.circulation = math.fsum(
            [self._k_bottom, self._k_right_lower, self._k_right_upper, -self._k_top, -self._k_left]
        )
        if not check_range:
            return
        probe = np.linspace(0.0, 1.0, 11)
        px, py = np.meshgrid(probe, probe)
        c1, c2 = beta(px, py)
        if np.min(np.hypot(c1, c2)) == 0.0:
            warnings.warn(f"layering form {beta.name!r} vanishes somewhere; construction still evaluated", stacklevel=2)

    def __repr__(self):
        return f"DislocationForm(beta={self.beta.name!r}, a={self.a!r}, r={self.r.name!r})"

    # -- geometry -------------------------------------------------------------

    @property
    def segment(self) -> tuple[float, float, float]:
        return (self.x_left, self.x_right, Y_CUT)

    @property
    def cuts(self) -> CutSet:
        return CutSet((self.segment,), vertical_lines=(self.x_left, self.x_right))

    def pieces(self, box):
        return [(box, self.cuts, self)]

    def to_record(self) -> dict:
        return {"beta": self.beta.name, "a": self.a, "r": self.r.name}

    # -- horizontal and boundary integrals -------------------------------------

    def _int_x(self, fun, lo, hi, y):
        """``int_lo^hi fun(s, y) ds`` for arrays of bounds and heights."""
        y = np.asarray(y, dtype=float)
        return batched_integral(lambda s: fun(s, y[..., None]), lo, hi, self._order, self._panel)

    def _int_y(self, fun, lo, hi):
        return batched_integral(fun, lo, hi, self._order, self._panel)

    def _f0_left(self, y):
        b2 = self.beta.b2
        tail = self._int_y(lambda s: b2(0.0, s), y, np.ones_like(y))
        return (self._k_right_upper - self._k_top) - tail

    def _f0_right(self, y, below):
        b2 = self.beta.b2
        rise = self._int_y(lambda s: b2(1.0, s), np.full_like(y, 0.5), y)
        return rise + np.where(below, self.circulation, 0.0)

    def boundary_potential(self, q: Point) -> float:
        """``f0(q)``: integral of ``beta`` counter-clockwise along the boundary from ``q0 = (1, 1/2)``.

        ``f0(q0) = 0``; approaching ``q0`` from below gives the circulation.
        """
        x, y = float(q.x), float(q.y)
        b1, b2 = self.beta.b1, self.beta.b2
        on = [abs(x - 1.0) <= 1e-14, abs(y - 1.0) <= 1e-14, abs(x) <= 1e-14, abs(y) <= 1e-14]
        if not any(on) or not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ValueError(f"point ({x}, {y}) is not on the boundary of the unit square")
        spec = _EDGE_SPEC
        if on[0] and y >= 0.5:
            return integrate_interval(lambda s: b2(1.0, s), 0.5, y, spec)
        if on[1]:
            return self._k_right_upper - integrate_interval(lambda s: b1(s, 1.0), x, 1.0, spec)
        if on[2]:
            return self._k_right_upper - self._k_top - integrate_interval(lambda s: b2(0.0, s), y, 1.0, spec)
        if on[3]:
            base = self._k_right_upper - self._k_top - self._k_left
            return base + integrate_interval(lambda s: b1(s, 0.0), 0.0, x, spec)
        return self.circulation - integrate_interval(lambda s: b2(1.0, s), y, 0.5, spec)

    def _below(self, y, side):
        # exactly on the cut height the side flag decides; "auto" means below
        if side not in ("auto", "above", "below"):
            raise ValueError(f"side must be 'auto', 'above' or 'below', got {side!r}")
        return (y < Y_CUT) | ((y == Y_CUT) & (side != "above"))

    def _edge_data(self, y, below):
        """Per-height values of fbar and its y-derivative at both strip edges,
        plus the beta_1 jets needed by the Taylor interpolants."""
        beta = self.beta
        xl, xr = self.x_left, self.x_right
        zeros, ones = np.zeros_like(y), np.ones_like(y)
        F_L = self._f0_left(y) + self._int_x(beta.b1, zeros, np.full_like(y, xl), y)
        F_R = self._f0_right(y, below) - self._int_x(beta.b1, np.full_like(y, xr), ones, y)
        G_L = beta.b2(0.0, y) + self._int_x(beta.b1_y, zeros, np.full_like(y, xl), y)
        G_R = beta.b2(1.0, y) - self._int_x(beta.b1_y, np.full_like(y, xr), ones, y)
        jl = [f(xl, y) for f in (beta.b1, beta.b1_x, beta.b1_y, beta.b1_xy)]
        jr = [f(xr, y) for f in (beta.b1, beta.b1_x, beta.b1_y, beta.b1_xy)]
        return F_L, F_R, G_L, G_R, jl, jr

    def _taylor(self, x, y, below):
        """``(pL, pL_x, pL_y, pR, pR_x, pR_y)`` at arrays of points."""
        pairs = np.stack([y, below.astype(float)], axis=-1)
        uniq, inv = np.unique(pairs, axis=0, return_inverse=True)
        inv = inv.ravel()
        uy, ub = uniq[:, 0], uniq[:, 1] > 0.5
        F_L, F_R, G_L, G_R, jl, jr = self._edge_data(uy, ub)
        dl = x - self.x_left
        dr = x - self.x_right
        b1l, b1xl, b1yl, b1xyl = (v[inv] for v in jl)
        b1r, b1xr, b1yr, b1xyr = (v[inv] for v in jr)
        pl = F_L[inv] + b1l * dl + 0.5 * b1xl * dl * dl
        plx = b1l + b1xl * dl
        ply = G_L[inv] + b1yl * dl + 0.5 * b1xyl * dl * dl
        pr = F_R[inv] + b1r * dr + 0.5 * b1xr * dr * dr
        prx = b1r + b1xr * dr
        pry = G_R[inv] + b1yr * dr + 0.5 * b1xyr * dr * dr
        return pl, plx, ply, pr, prx, pry

    def _regions(self, x, y, side):
        left = x <= self.x_left
        right = x >= self.x_right
        strip = ~(left | right)
        on_gamma = strip & (y == Y_CUT)
        if side == "auto" and np.any(on_gamma):
            raise CutEvaluationError("evaluation on Gamma_a needs side='above' or 'below'")
        return left, right, strip

    # -- public evaluators -----------------------------------------------------

    def __call__(self, x, y, side: str = "auto"):
        """Components ``(c1, c2)`` of ``nu_a`` at arrays of points."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        shape = x.shape
        x, y = x.ravel(), y.ravel()
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("non-finite evaluation point")
        left, right, strip = self._regions(x, y, side)
        beta = self.beta
        c1 = np.empty_like(x)
        c2 = np.empty_like(x)
        if np.any(left):
            xs, ys = x[left], y[left]
            c1[left] = beta.b1(xs, ys)
            c2[left] = beta.b2(0.0, ys) + self._int_x(beta.b1_y, np.zeros_like(xs), xs, ys)
        if np.any(right):
            xs, ys = x[right], y[right]
            c1[right] = beta.b1(xs, ys)
            c2[right] = beta.b2(1.0, ys) - self._int_x(beta.b1_y, xs, np.ones_like(xs), ys)
        if np.any(strip):
            xs, ys = x[strip], y[strip]
            below = self._below(ys, side)
            pl, plx, ply, pr, prx, pry = self._taylor(xs, ys, below)
            t = (xs - 0.5) / self.a
            s1, s2 = _kernels.strip_combine(1.0 / self.a, self.r(t), self.r.dr(t), pl, pr, plx, prx, ply, pry)
            c1[strip] = s1
            c2[strip] = s2
        if not (np.all(np.isfinite(c1)) and np.all(np.isfinite(c2))):
            raise ValueError("non-finite value of the layering form (check beta derivatives)")
        return c1.reshape(shape), c2.reshape(shape)

    def at(self, p: Point, side: str = "auto") -> Covector:
        c1, c2 = self(p.x, p.y, side)
        return Covector(float(c1), float(c2))

    def horizontal_potential(self, x, y, side: str = "auto"):
        """``fbar``: boundary potential plus the horizontal integral from the nearest side."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if np.any(np.abs(x - 0.5) < 0.5 * self.a):
            raise ValueError("horizontal potential is undefined inside the middle strip")
        left = x <= self.x_left
        out = np.empty(x.shape)
        if np.any(left):
            xs, ys = x[left], y[left]
            out[left] = self._f0_left(ys) + self._int_x(self.beta.b1, np.zeros_like(xs), xs, ys)
        if np.any(~left):
            xs, ys = x[~left], y[~left]
            out[~left] = self._f0_right(ys, self._below(ys, side)) - self._int_x(
                self.beta.b1, xs, np.ones_like(xs), ys
            )
        return out

    def taylor_interpolant(self, which: str, x, y, side: str = "auto"):
        """Second-order Taylor expansion of ``fbar`` in ``x`` about the left
        (``"L"``) or right (``"R"``) strip edge."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        shape = x.shape
        pl, _, _, pr, _, _ = self._taylor(x.ravel(), y.ravel(), self._below(y.ravel(), side))
        if which == "L":
            return pl.reshape(shape)
        if which == "R":
            return pr.reshape(shape)
        raise ValueError("which must be 'L' or 'R'")

    def potential(self, x, y, side: str = "auto"):
        """The discontinuous potential ``f`` with ``df = nu_a``.

        On the ray from ``Gamma_a`` to ``q0`` the below-side value is used
        unless ``side='above'``.
        """
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        shape = x.shape
        x, y = x.ravel(), y.ravel()
        left, right, strip = self._regions(x, y, side)
        out = np.empty_like(x)
        outside = left | right
        if np.any(outside):
            out[outside] = self.horizontal_potential(x[outside], y[outside], side)
        if np.any(strip):
            xs, ys = x[strip], y[strip]
            pl, _, _, pr, _, _ = self._taylor(xs, ys, self._below(ys, side))
            rv = self.r((xs - 0.5) / self.a)
            out[strip] = (1.0 - rv) * pl + rv * pr
        return out.reshape(shape)

    def jump(self, x):
        """Density of the boundary current on ``Gamma_a``: ``(1/a) r'((x - 1/2)/a)`` times the circulation."""
        x = np.asarray(x, dtype=float)
        t = (x - 0.5) / self.a
        inside = np.abs(t) < 0.5
        return np.where(inside, self.r.dr(t) / self.a * self.circulation, 0.0)

    def jump_from_limits(self, x):
        """One-sided limits across ``Gamma_a``: ``nu(below) - nu(above)`` per component.

        With the counter-clockwise orientation of the square and
        ``Gamma_a`` oriented left to right this equals :meth:`jump` in the
        ``dx`` component and vanishes in ``dy``.
        """
        x = np.asarray(x, dtype=float)
        y = np.full_like(x, Y_CUT)
        b1, b2 = self(x, y, side="below")
        a1, a2 = self(x, y, side="above")
        return b1 - a1, b2 - a2

    def jump_segments(self):
        """``[(x_lo, x_hi, y, jump)]`` for the boundary current."""
        return [(self.x_left, self.x_right, Y_CUT, self.jump)]

    def jump_integral(self, spec: QuadratureSpec = QuadratureSpec(order=16)) -> float:
        return integrate_interval(self.jump, self.x_left, self.x_right, spec)
