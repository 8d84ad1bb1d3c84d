"""Level sets of the layering potential, drawn as a static SVG.

The potential is integrated from ``(0, 0)`` up the left edge and then
horizontally, ``f(x, y) = int_0^y nu_2(0, s) ds + int_0^x nu_1(s, y) ds``.
It jumps across each cut segment and along the horizontal ray from the
segment to the right edge; grid cells straddling those are left out of the
contouring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .quadrature import QuadratureSpec, gauss_legendre, integrate_interval, panel_breaks

_COORD = "{:.6f}"


def _evaluate(form, x, y):
    try:
        return form(x, y, "auto")
    except TypeError:
        return form(x, y)


def integrated_potential(form, xs, ys, order: int = 8):
    """``f`` on the tensor grid ``xs x ys``; ``result[j, i]`` is at ``(xs[i], ys[j])``.

    ``ys`` must avoid the cut heights.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    cuts = getattr(form, "cuts", None)
    x_extra = cuts.x_breaks() if cuts is not None else []
    y_extra = cuts.y_breaks() if cuts is not None else []
    # left edge: nu_2(0, s) cumulated between consecutive grid heights
    left = np.empty(len(ys))
    acc = integrate_interval(lambda s: _evaluate(form, np.zeros_like(s), s)[1], 0.0, ys[0], QuadratureSpec(order, 1 / 16), y_extra)
    left[0] = acc
    parts = [acc]
    for j in range(1, len(ys)):
        parts.append(
            integrate_interval(lambda s: _evaluate(form, np.zeros_like(s), s)[1], ys[j - 1], ys[j], QuadratureSpec(order, 1 / 16), y_extra)
        )
        left[j] = math.fsum(parts)

    # horizontal: cumulative Gauss sums over panels snapped to grid points and seams
    brk = panel_breaks(0.0, float(xs[-1]), list(xs) + list(x_extra), 1.0)
    t, w = gauss_legendre(order)
    h = np.diff(brk)
    nodes = (brk[:-1, None] + h[:, None] * t[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    X, Y = np.meshgrid(nodes, ys)
    c1 = np.asarray(_evaluate(form, X, Y)[0], dtype=float)
    panel_int = (c1 * weights).reshape(len(ys), len(brk) - 1, order).sum(axis=2)
    cum = np.concatenate([np.zeros((len(ys), 1)), np.cumsum(panel_int, axis=1)], axis=1)
    idx = np.searchsorted(brk, xs)
    if np.any(np.abs(brk[np.minimum(idx, len(brk) - 1)] - xs) > 1e-12):
        raise RuntimeError("grid abscissae missing from the panel breaks")
    return left[:, None] + cum[:, idx]


def ray_rows(form) -> list[tuple[float, float]]:
    """``(x_start, y)`` for each horizontal line along which the potential jumps.

    Segments whose jump vanishes (closed forms) do not start a ray.
    """
    segments = getattr(form, "jump_segments", None)
    if segments is None:
        return []
    starts = {}
    for x_lo, x_hi, y, jump in segments():
        if abs(float(np.asarray(jump(np.array([0.5 * (x_lo + x_hi)])))[0])) <= 1e-14:
            continue
        starts[y] = min(starts.get(y, math.inf), x_lo)
    return sorted((x, y) for y, x in starts.items())


@dataclass
class Contours:
    """Contour chains per level plus bookkeeping for endpoint counting."""

    levels: list
    chains: dict = field(default_factory=dict)
    segments: list = field(default_factory=list)
    grid: tuple = ()

    def endpoints(self):
        """Endpoints of all open chains (including those at the grid border)."""
        return [p for chains in self.chains.values() for ch in chains if ch[0] != ch[-1] for p in (ch[0], ch[-1])]


def _chain(segs: np.ndarray, ndigits: int = 10) -> list[list[tuple[float, float]]]:
    """Join marching-squares segments into polylines (deterministic order)."""
    key = lambda x, y: (round(float(x), ndigits), round(float(y), ndigits))  # noqa: E731
    adj: dict = {}
    edges = []
    for x0, y0, x1, y1 in segs:
        a, b = key(x0, y0), key(x1, y1)
        if a == b:
            continue
        edges.append((a, b))
        adj.setdefault(a, []).append(len(edges) - 1)
        adj.setdefault(b, []).append(len(edges) - 1)
    used = [False] * len(edges)
    chains = []

    def walk(start):
        path = [start]
        cur = start
        while True:
            nxt = None
            for e in adj[cur]:
                if not used[e]:
                    used[e] = True
                    a, b = edges[e]
                    nxt = b if a == cur else a
                    break
            if nxt is None:
                return path
            path.append(nxt)
            cur = nxt
            if cur == start:
                return path

    for node in sorted(adj):
        if len(adj[node]) == 1 and not used[adj[node][0]]:
            chains.append(walk(node))
    for node in sorted(adj):
        if any(not used[e] for e in adj[node]):
            chains.append(walk(node))
    return chains


def contour_levels(form, h: float, resolution: int = 200, mask_margin: int = 1) -> Contours:
    """Contours ``{f = k h}`` on a cell-centred ``resolution x resolution`` grid.

    Cells within ``mask_margin`` rows of a cut height, and to the right of
    the first segment on that row, are excluded so that the jump of ``f``
    does not produce spurious contour pieces.
    """
    if not h > 0:
        raise ValueError("level spacing h must be positive")
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    g = (np.arange(resolution) + 0.5) / resolution
    xs, ys = g, g.copy()
    rows = ray_rows(form)
    for _, yc in rows:
        if np.any(np.abs(ys - yc) < 1e-9):
            raise ValueError("grid height coincides with a cut; change the resolution")
    f = integrated_potential(form, xs, ys)
    lo, hi = float(np.min(f)), float(np.max(f))
    levels = [k * h for k in range(math.ceil(lo / h), math.floor(hi / h) + 1)]

    masked = np.zeros((resolution - 1, resolution - 1), dtype=bool)
    for x0, yc in rows:
        j = int(np.searchsorted(ys, yc)) - 1
        i0 = max(0, int(np.searchsorted(xs, x0)) - 1)
        masked[max(0, j - mask_margin + 1) : j + mask_margin, i0:] = True

    out = Contours(levels)
    dx = xs[1] - xs[0]
    for lev in levels:
        segs = _kernels.marching_squares(f, xs, ys, lev)
        if len(segs):
            mx = 0.5 * (segs[:, 0] + segs[:, 2])
            my = 0.5 * (segs[:, 1] + segs[:, 3])
            ci = np.clip(((mx - xs[0]) / dx).astype(int), 0, resolution - 2)
            cj = np.clip(((my - ys[0]) / dx).astype(int), 0, resolution - 2)
            segs = segs[~masked[cj, ci]]
        out.segments.extend(map(tuple, segs))
        out.chains[lev] = _chain(segs)
    out.grid = (xs, ys)
    return out


def count_endpoints(contours: Contours, box) -> int:
    """Number of chain endpoints inside ``box = (x0, x1, y0, y1)``."""
    x0, x1, y0, y1 = box
    return sum(1 for x, y in contours.endpoints() if x0 < x < x1 and y0 < y < y1)


def render_svg(contours: Contours, segments, size: int = 600, title: str = "") -> str:
    """Static SVG of the contour chains with the cut segments overlaid in red."""

    def px(x, y):
        return _COORD.format(x * size), _COORD.format((1.0 - y) * size)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
    ]
    if title:
        lines.append(f"<title>{title}</title>")
    lines.append(f'<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black"/>')
    lines.append('<g fill="none" stroke="#1f4e9a" stroke-width="1">')
    for lev in contours.levels:
        for ch in contours.chains.get(lev, []):
            pts = " ".join(",".join(px(x, y)) for x, y in ch)
            lines.append(f'<polyline data-level="{lev!r}" points="{pts}"/>')
    lines.append("</g>")
    lines.append('<g stroke="#c0392b" stroke-width="3">')
    for x_lo, x_hi, y in segments:
        (a, b), (c, d) = px(x_lo, y), px(x_hi, y)
        lines.append(f'<line x1="{a}" y1="{b}" x2="{c}" y2="{d}"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def bravais_svg(form, h: float = 0.1, resolution: int = 200, size: int = 600) -> tuple[str, Contours]:
    contours = contour_levels(form, h, resolution)
    cuts = getattr(form, "cuts", None)
    segs = cuts.horizontal_segments if cuts is not None else ()
    return render_svg(contours, segs, size, title=repr(form)), contours
