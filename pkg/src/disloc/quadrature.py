"""Composite Gauss-Legendre quadrature with panels snapped to known cuts.

Integrands here are piecewise smooth with discontinuities on known
horizontal segments, so panels are placed a priori: every cut coordinate
becomes a panel boundary and no Gauss node ever lands on a cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels

_SNAP = 1e-12


class QuadratureError(ValueError):
    """A path or integrand violates the cut geometry."""


@dataclass(frozen=True)
class QuadratureSpec:
    order: int = 8
    max_panel: float = 1.0 / 64
    tol: float = 1e-9

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise QuadratureError("quadrature order must be an integer >= 2")
        if not self.max_panel > 0:
            raise QuadratureError("max_panel must be positive")
        if not self.tol > 0:
            raise QuadratureError("tol must be positive")

    def refined(self, order_factor: int = 1, panel_factor: int = 1) -> "QuadratureSpec":
        return QuadratureSpec(self.order * order_factor, self.max_panel / panel_factor, self.tol)


@dataclass(frozen=True)
class CutSet:
    """Cut geometry of a piecewise-smooth form.

    ``horizontal_segments`` are genuine discontinuities ``(x_lo, x_hi, y)``;
    line integrals may not cross them. ``vertical_lines`` and
    ``horizontal_lines`` only mark where the integrand loses smoothness
    (tile skeleton, interpolation seams) and are used for panel snapping.
    """

    horizontal_segments: tuple = ()
    vertical_lines: tuple = ()
    horizontal_lines: tuple = ()

    def __post_init__(self):
        segs = tuple(sorted((float(a), float(b), float(y)) for a, b, y in self.horizontal_segments))
        for x_lo, x_hi, y in segs:
            if not (x_lo < x_hi):
                raise ValueError(f"cut segment needs x_lo < x_hi, got ({x_lo}, {x_hi})")
            if not (0.0 <= x_lo and x_hi <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError("cut segment must lie in [0,1]^2")
        object.__setattr__(self, "horizontal_segments", segs)
        object.__setattr__(self, "vertical_lines", tuple(sorted(set(float(v) for v in self.vertical_lines))))
        object.__setattr__(self, "horizontal_lines", tuple(sorted(set(float(v) for v in self.horizontal_lines))))

    def merge(self, other: "CutSet") -> "CutSet":
        return CutSet(
            tuple(set(self.horizontal_segments) | set(other.horizontal_segments)),
            self.vertical_lines + other.vertical_lines,
            self.horizontal_lines + other.horizontal_lines,
        )

    def x_breaks(self) -> list[float]:
        xs = list(self.vertical_lines)
        for x_lo, x_hi, _ in self.horizontal_segments:
            xs += [x_lo, x_hi]
        return xs

    def y_breaks(self) -> list[float]:
        return [y for _, _, y in self.horizontal_segments] + list(self.horizontal_lines)

    def total_length(self) -> float:
        return math.fsum(b - a for a, b, _ in self.horizontal_segments)

    def on_cut(self, x, y) -> np.ndarray:
        """Mask of points lying on the open interior of a cut segment."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        hit = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        for x_lo, x_hi, yc in self.horizontal_segments:
            hit |= (np.abs(y - yc) <= _SNAP) & (x > x_lo) & (x < x_hi)
        return hit

    def distance(self, x: float, y: float) -> float:
        """Euclidean distance from a point to the nearest cut segment."""
        best = math.inf
        for x_lo, x_hi, yc in self.horizontal_segments:
            dx = max(x_lo - x, 0.0, x - x_hi)
            best = min(best, math.hypot(dx, y - yc))
        return best


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    t, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (t + 1.0), 0.5 * w


def panel_breaks(lo: float, hi: float, extra, max_panel: float) -> np.ndarray:
    """Sorted panel boundaries on ``[lo, hi]`` including every ``extra`` point
    strictly inside, with no panel wider than ``max_panel``."""
    pts = sorted({lo, hi, *(float(e) for e in extra if lo + _SNAP < e < hi - _SNAP)})
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        m = max(1, math.ceil((b - a) / max_panel - 1e-9))
        out += [a + (b - a) * i / m for i in range(1, m)] + [b]
    return np.array(out)


def panel_nodes(breaks: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened composite nodes and weights for the given panel boundaries."""
    t, w = gauss_legendre(order)
    h = np.diff(breaks)
    nodes = breaks[:-1, None] + h[:, None] * t[None, :]
    weights = h[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def integrate_interval(fun, lo: float, hi: float, spec: QuadratureSpec = QuadratureSpec(), breaks=()) -> float:
    """``int_lo^hi fun(t) dt`` with panels split at ``breaks``."""
    if hi == lo:
        return 0.0
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    nodes, weights = panel_nodes(panel_breaks(lo, hi, breaks, spec.max_panel), spec.order)
    vals = np.asarray(fun(nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite integrand value")
    return sign * _kernels.weighted_sum(vals, weights)


def batched_integral(fun, lo, hi, order: int = 20, max_panel: float = 0.5) -> np.ndarray:
    """Integrals of ``fun`` over many intervals ``[lo_i, hi_i]`` at once.

    Every interval is split into the same number of equal panels, enough
    that the longest one respects ``max_panel``. ``fun`` receives an array of
    shape ``lo.shape + (panels * order,)``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    if lo.size == 0:
        return np.zeros(lo.shape)
    span = hi - lo
    m = max(1, math.ceil(float(np.max(np.abs(span))) / max_panel - 1e-9))
    t, w = gauss_legendre(order)
    u = ((np.arange(m)[:, None] + t[None, :]) / m).ravel()
    ww = np.tile(w, m) / m
    nodes = lo[..., None] + span[..., None] * u
    vals = fun(nodes)
    return span * (vals @ ww)


def _segment_crossings(p, q, cuts: CutSet):
    """Parameters in (0,1) where segment p->q meets cut/snap lines, and a
    diagnostic string if it crosses a cut segment transversally."""
    (x0, y0), (x1, y1) = p, q
    ts = []
    for xv in cuts.vertical_lines:
        if (x0 - xv) * (x1 - xv) < 0:
            ts.append((xv - x0) / (x1 - x0))
    for yh in cuts.horizontal_lines:
        if (y0 - yh) * (y1 - yh) < 0:
            ts.append((yh - y0) / (y1 - y0))
    for x_lo, x_hi, yc in cuts.horizontal_segments:
        ts += [(xe - x0) / (x1 - x0) for xe in (x_lo, x_hi) if (x0 - xe) * (x1 - xe) < 0]
        if abs(y0 - yc) <= _SNAP and abs(y1 - yc) <= _SNAP:
            lo, hi = min(x0, x1), max(x0, x1)
            if min(hi, x_hi) - max(lo, x_lo) > _SNAP:
                raise QuadratureError(
                    f"path segment {p}->{q} runs along cut [{x_lo}, {x_hi}] x {{{yc}}}"
                )
            continue
        if (y0 - yc) * (y1 - yc) < 0:
            t = (yc - y0) / (y1 - y0)
            xc = x0 + t * (x1 - x0)
            if x_lo < xc < x_hi:
                raise QuadratureError(
                    f"path segment {p}->{q} crosses cut [{x_lo}, {x_hi}] x {{{yc}}} at x={xc:.6g}"
                )
            ts.append(t)
    return [t for t in ts if _SNAP < t < 1 - _SNAP]


def integrate_line(form, path, spec: QuadratureSpec = QuadratureSpec(), cuts: CutSet | None = None) -> float:
    """``int_path form`` along a polyline of ``(x, y)`` vertices.

    ``form(x, y)`` returns the component arrays ``(c1, c2)``. Panels are split
    where the path meets cut or snap lines; a transversal crossing of a cut
    segment interior raises :class:`QuadratureError`.
    """
    if cuts is None:
        cuts = getattr(form, "cuts", CutSet())
    pts = [(float(p[0]), float(p[1])) for p in path]
    if len(pts) < 2:
        raise ValueError("a path needs at least two vertices")
    t_nodes, t_w = gauss_legendre(spec.order)
    parts = []
    for p, q in zip(pts[:-1], pts[1:]):
        length = math.hypot(q[0] - p[0], q[1] - p[1])
        if length == 0.0:
            continue
        breaks = panel_breaks(0.0, 1.0, _segment_crossings(p, q, cuts), spec.max_panel / length)
        h = np.diff(breaks)
        t = (breaks[:-1, None] + h[:, None] * t_nodes[None, :]).ravel()
        w = (h[:, None] * t_w[None, :]).ravel()
        dx, dy = q[0] - p[0], q[1] - p[1]
        c1, c2 = form(p[0] + t * dx, p[1] + t * dy)
        vals = np.asarray(c1, dtype=float) * dx + np.asarray(c2, dtype=float) * dy
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("non-finite integrand value on path")
        parts.append(_kernels.weighted_sum(vals, w))
    return math.fsum(parts)


def rectangle_path(x0: float, x1: float, y0: float, y1: float) -> list[tuple[float, float]]:
    """Counter-clockwise boundary of a rectangle, closed."""
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]


def integrate_cell(density, cell, cuts: CutSet | None = None, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """``int int density dx dy`` over ``cell = (x0, x1, y0, y1)``.

    Tensor-product Gauss panels, with panel edges at every cut or snap
    coordinate that falls inside the cell.
    """
    cuts = cuts or CutSet()
    x0, x1, y0, y1 = map(float, cell)
    if x1 <= x0 or y1 <= y0:
        return 0.0
    xn, xw = panel_nodes(panel_breaks(x0, x1, cuts.x_breaks(), spec.max_panel), spec.order)
    yn, yw = panel_nodes(panel_breaks(y0, y1, cuts.y_breaks(), spec.max_panel), spec.order)
    X, Y = np.meshgrid(xn, yn)
    vals = np.asarray(density(X, Y), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite density value in cell")
    return _kernels.weighted_sum(vals, np.outer(yw, xw))


def sup_norm(field_fn, cuts: CutSet | None = None, resolution: int = 128, cell=(0.0, 1.0, 0.0, 1.0)) -> float:
    """Max of ``|field_fn|`` over a cell-centred grid.

    Grid coordinates that coincide with a cut line are nudged by 1e-12 so
    that no sample sits exactly on a discontinuity.
    """
    if resolution < 64:
        raise ValueError("sup_norm needs resolution >= 64")
    cuts = cuts or CutSet()
    x0, x1, y0, y1 = cell
    xs = x0 + (np.arange(resolution) + 0.5) * (x1 - x0) / resolution
    ys = y0 + (np.arange(resolution) + 0.5) * (y1 - y0) / resolution
    for yc in cuts.y_breaks():
        ys = np.where(np.abs(ys - yc) <= _SNAP, yc + _SNAP, ys)
    X, Y = np.meshgrid(xs, ys)
    return float(np.max(np.abs(field_fn(X, Y))))


def circulation(form, cell=(0.0, 1.0, 0.0, 1.0), spec: QuadratureSpec = QuadratureSpec(), cuts=None) -> float:
    """Counter-clockwise line integral around the boundary of ``cell``."""
    return integrate_line(form, rectangle_path(*cell), spec, cuts)
