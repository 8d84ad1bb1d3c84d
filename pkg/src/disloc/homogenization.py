"""Arrays of ``n x n`` weak dislocations and their convergence to a smooth form.

Tile ``(k, j)`` is the image of the unit square under ``iota = tile_map(n, k, j)``.
On it the array form is the pushforward of a single-dislocation form built
for the pulled-back ``iota^* beta``; pushing forward multiplies components by
``n``. By default the tile-level width is ``a / n`` so that every segment has
length ``a / n^2`` and the segments have total length ``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .currents import TestOneForm, gap
from .dislocation import Y_CUT, DislocationForm, SmoothingFunction, check_width, quintic
from .experiment import ExperimentTable, loglog_slope
from .forms import Covector, Point, SmoothOneForm, exterior_derivative, pullback, tile_map
from .quadrature import CutSet, QuadratureSpec, integrate_cell, integrate_line, rectangle_path, sup_norm

_LOCAL_SNAP = 1e-12


class DislocationArray:
    """The glued form ``nu^(n)`` with one dislocation per tile.

    Parameters
    ----------
    beta : SmoothOneForm
    a : float
        Segment parameter in ``[0.05, 0.95]``.
    n : int
        Tiles per side.
    r : SmoothingFunction, optional
    shrink_segments : bool
        Use tile-level width ``a / n`` (segments of length ``a / n^2``). With
        ``False`` every tile uses width ``a`` and segments have length ``a / n``.
    """

    def __init__(self, beta: SmoothOneForm, a: float, n: int, r: SmoothingFunction | None = None, *, shrink_segments: bool = True):
        if int(n) != n or n < 1:
            raise ValueError("n must be a positive integer")
        self.beta = beta
        self.a = check_width(a)
        self.n = int(n)
        self.r = r or quintic()
        self.shrink_segments = shrink_segments
        self.tile_width = self.a / self.n if shrink_segments else self.a
        self.maps = [[tile_map(self.n, k, j) for j in range(self.n)] for k in range(self.n)]
        self.tiles = [
            [
                DislocationForm(pullback(beta, self.maps[k][j]), self.tile_width, self.r, check_range=False)
                for j in range(self.n)
            ]
            for k in range(self.n)
        ]

    def __repr__(self):
        return f"DislocationArray(beta={self.beta.name!r}, a={self.a!r}, n={self.n}, r={self.r.name!r})"

    # -- geometry -------------------------------------------------------------

    def tile_segment(self, k: int, j: int) -> tuple[float, float, float]:
        m = self.maps[k][j]
        xl, xr, y = self.tiles[k][j].segment
        return (m(xl, 0.0)[0], m(xr, 0.0)[0], m(0.0, y)[1])

    def segments(self) -> list[tuple[float, float, float]]:
        return [self.tile_segment(k, j) for j in range(self.n) for k in range(self.n)]

    def _tile_cuts(self, k: int, j: int) -> CutSet:
        seg = self.tile_segment(k, j)
        return CutSet((seg,), vertical_lines=(seg[0], seg[1]))

    @property
    def cuts(self) -> CutSet:
        segs = self.segments()
        skeleton = [i / self.n for i in range(1, self.n)]
        seams = [s[0] for s in segs] + [s[1] for s in segs]
        return CutSet(tuple(segs), vertical_lines=tuple(skeleton + seams), horizontal_lines=tuple(skeleton))

    def total_cut_length(self) -> float:
        return self.cuts.total_length()

    def to_record(self) -> dict:
        return {
            "beta": self.beta.name,
            "a": self.a,
            "n": self.n,
            "r": self.r.name,
            "tile_width": self.tile_width,
            "segments": [list(s) for s in self.segments()],
        }

    # -- evaluation -----------------------------------------------------------

    def eval_tile(self, k: int, j: int, x, y, side: str = "auto"):
        """``nu^(n)`` on tile ``(k, j)`` at physical points, using that tile's formula
        even on its closed boundary."""
        m = self.maps[k][j]
        u, v = m.inverse_call(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        u = np.clip(u, 0.0, 1.0)
        v = np.clip(v, 0.0, 1.0)
        v = np.where(np.abs(v - Y_CUT) <= _LOCAL_SNAP, Y_CUT, v)
        c1, c2 = self.tiles[k][j](u, v, side)
        return c1 / m.scale, c2 / m.scale

    def tile_index(self, x, y):
        """Half-open tile lookup ``[k/n, (k+1)/n)``; the closing edge at 1 joins the last tile."""
        n = self.n
        k = np.minimum(np.floor(np.asarray(x, dtype=float) * n).astype(int), n - 1)
        j = np.minimum(np.floor(np.asarray(y, dtype=float) * n).astype(int), n - 1)
        return k, j

    def __call__(self, x, y, side: str = "auto"):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        shape = x.shape
        x, y = x.ravel(), y.ravel()
        if np.any((x < 0) | (x > 1) | (y < 0) | (y > 1)):
            raise ValueError("evaluation point outside [0,1]^2")
        k, j = self.tile_index(x, y)
        c1 = np.empty_like(x)
        c2 = np.empty_like(x)
        flat = k * self.n + j
        for t in np.unique(flat):
            sel = flat == t
            kk, jj = divmod(int(t), self.n)
            c1[sel], c2[sel] = self.eval_tile(kk, jj, x[sel], y[sel], side)
        return c1.reshape(shape), c2.reshape(shape)

    def at(self, p: Point, side: str = "auto") -> Covector:
        c1, c2 = self(p.x, p.y, side)
        return Covector(float(c1), float(c2))

    def pieces(self, box):
        """One integration piece per tile meeting ``box``, with that tile's cuts."""
        x0, x1, y0, y1 = box
        n = self.n
        out = []
        for k in range(max(0, int(math.floor(x0 * n))), min(n, int(math.ceil(x1 * n)))):
            for j in range(max(0, int(math.floor(y0 * n))), min(n, int(math.ceil(y1 * n)))):
                cell = (max(x0, k / n), min(x1, (k + 1) / n), max(y0, j / n), min(y1, (j + 1) / n))
                if cell[1] <= cell[0] or cell[3] <= cell[2]:
                    continue
                ev = lambda x, y, k=k, j=j: self.eval_tile(k, j, x, y)  # noqa: E731
                out.append((cell, self._tile_cuts(k, j), ev))
        return out

    # -- boundary current ---------------------------------------------------------

    def cell_circulation(self, k: int, j: int) -> float:
        """``oint_{d cell} beta``; equals the circulation of the tile form."""
        return self.tiles[k][j].circulation

    def jump_segments(self):
        out = []
        for j in range(self.n):
            for k in range(self.n):
                x_lo, x_hi, y = self.tile_segment(k, j)
                out.append((x_lo, x_hi, y, lambda x, k=k, j=j: array_jump(self, k, j, x)))
        return out


def build_array(beta: SmoothOneForm, a: float, n: int, r: SmoothingFunction | None = None, **kw) -> DislocationArray:
    return DislocationArray(beta, a, n, r, **kw)


def eval_array(arr: DislocationArray, p: Point, side: str = "auto") -> Covector:
    return arr.at(p, side)


def array_jump(arr: DislocationArray, k: int, j: int, x):
    """Jump ``nu(below) - nu(above)`` of the ``dx`` component across segment ``(k, j)``.

    Equals ``n * (1/w) r'((n x - k - 1/2)/w)`` times the cell circulation,
    with ``w`` the tile-level width; zero off the segment.
    """
    m = arr.maps[k][j]
    u, _ = m.inverse_call(np.asarray(x, dtype=float), 0.0)
    return arr.tiles[k][j].jump(u) / m.scale


# ----------------------------------------------------------------------------
# gluing checks


@dataclass
class GluingReport:
    n: int
    value_mismatch: float
    derivative_mismatch: float
    circulation_mismatch: float
    samples: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "value_mismatch": self.value_mismatch,
            "derivative_mismatch": self.derivative_mismatch,
            "circulation_mismatch": self.circulation_mismatch,
            "samples": self.samples,
            "violations": list(self.violations),
        }


def _one_sided_derivative(fun, x, y, axis: int, direction: float, h: float):
    """Second-order one-sided difference ``(-3 f0 + 4 f1 - f2) / (2h)`` stepping into one side."""
    def shift(s):
        return (x + direction * s * h, y) if axis == 0 else (x, y + direction * s * h)

    f0 = np.stack(fun(*shift(0)))
    f1 = np.stack(fun(*shift(1)))
    f2 = np.stack(fun(*shift(2)))
    return direction * (-3 * f0 + 4 * f1 - f2) / (2 * h)


def check_gluing(arr: DislocationArray, samples: int = 400, tol: float = 1e-6, circ_tol: float = 1e-8, h: float = 1e-4, seed: int = 0) -> GluingReport:
    """C^0 and C^1 matching of ``nu^(n)`` across skeleton lines, and per-cell circulation.

    ``samples`` points are spread over all interior skeleton lines; at each
    the one-sided values from both adjacent tiles and their normal
    derivatives are compared. Each cell's circulation is checked against
    ``int_cell d beta``.
    """
    n = arr.n
    rng = np.random.default_rng(seed)
    violations = []
    val_err = 0.0
    der_err = 0.0
    count = 0
    lines = [(axis, i) for axis in (0, 1) for i in range(1, n)]
    if lines:
        per_line = max(1, samples // len(lines))
        for axis, i in lines:
            c = i / n
            t = np.sort(rng.uniform(0.0, 1.0, per_line))
            # keep a margin so the finite-difference stencil stays in one tile row
            t = np.clip(t, 3 * h, 1 - 3 * h)
            count += per_line
            for idx in range(n):
                sel = (t >= idx / n + 3 * h) & (t <= (idx + 1) / n - 3 * h)
                if not np.any(sel):
                    continue
                s = t[sel]
                if axis == 0:
                    x, y = np.full_like(s, c), s
                    lo = lambda X, Y, idx=idx: arr.eval_tile(i - 1, idx, X, Y)  # noqa: E731
                    hi = lambda X, Y, idx=idx: arr.eval_tile(i, idx, X, Y)  # noqa: E731
                else:
                    x, y = s, np.full_like(s, c)
                    lo = lambda X, Y, idx=idx: arr.eval_tile(idx, i - 1, X, Y)  # noqa: E731
                    hi = lambda X, Y, idx=idx: arr.eval_tile(idx, i, X, Y)  # noqa: E731
                v_lo, v_hi = np.stack(lo(x, y)), np.stack(hi(x, y))
                val_err = max(val_err, float(np.max(np.abs(v_lo - v_hi))))
                d_lo = _one_sided_derivative(lo, x, y, axis, -1.0, h)
                d_hi = _one_sided_derivative(hi, x, y, axis, +1.0, h)
                der_err = max(der_err, float(np.max(np.abs(d_lo - d_hi))))
    if val_err > tol:
        violations.append(f"C0 mismatch {val_err:.3e} across skeleton")
    if der_err > tol:
        violations.append(f"C1 mismatch {der_err:.3e} across skeleton")

    dbeta = exterior_derivative(arr.beta)
    spec = QuadratureSpec(order=16, max_panel=1 / 8)
    circ_err = 0.0
    for k in range(n):
        for j in range(n):
            x0, x1, y0, y1 = arr.maps[k][j].image
            ev = lambda X, Y, k=k, j=j: arr.eval_tile(k, j, X, Y)  # noqa: E731
            line = integrate_line(ev, rectangle_path(x0, x1, y0, y1), spec, arr._tile_cuts(k, j))
            area = integrate_cell(dbeta, (x0, x1, y0, y1), None, spec)
            err = abs(line - area)
            circ_err = max(circ_err, err)
            if err > circ_tol:
                violations.append(f"cell ({k},{j}) circulation {line!r} vs {area!r}")
    return GluingReport(n, val_err, der_err, circ_err, count, violations)


# ----------------------------------------------------------------------------
# convergence experiment


def strip_sup(arr: DislocationArray, resolution: int = 33) -> float:
    """Sampled ``sup |nu^(n) - beta|`` over the middle strips of all tiles."""
    w = arr.tile_width
    u = 0.5 + w * (np.linspace(-0.5, 0.5, resolution + 2)[1:-1])
    v = (np.arange(2 * resolution) + 0.5) / (2 * resolution)
    v = np.where(np.abs(v - Y_CUT) < 1e-9, Y_CUT + 1e-9, v)
    U, V = np.meshgrid(u, v)
    best = 0.0
    for k in range(arr.n):
        for j in range(arr.n):
            m = arr.maps[k][j]
            X, Y = m(U, V)
            c1, c2 = arr.eval_tile(k, j, X, Y)
            b1, b2 = arr.beta(X, Y)
            best = max(best, float(np.max(np.hypot(c1 - b1, c2 - b2))))
    return best


def bound_constant(arr: DislocationArray) -> float:
    """Per-``n`` constant ``C_n`` of the strip term in the convergence bound.

    The strips cover total area equal to the tile-level width ``w`` (``n^2``
    tiles, each with a strip of ``w/n`` by ``1/n``), so
    ``int_strips |nu - beta| <= w * sup_strip |nu - beta|``. Writing this as
    ``C_n * max r' / n`` gives ``C_n = n * w * sup / max r'``.
    """
    return arr.n * arr.tile_width * strip_sup(arr) / arr.r.max_derivative()


def derivative_norms(beta: SmoothOneForm) -> tuple[float, float]:
    """Sampled ``(sup |d beta_2 / dx|, sup |d beta_1 / dy|)``."""
    return sup_norm(beta.b2_x, resolution=128), sup_norm(beta.b1_y, resolution=128)


def convergence_bound(alpha_norm: float, n: int, d2x: float, d1y: float, C: float, r_max: float) -> float:
    """``(|alpha|_inf / n) (|d_x beta_2| + |d_y beta_1| + C |r'|)``."""
    return alpha_norm / n * (d2x + d1y + C * r_max)


CONVERGE_COLUMNS = ("n", "test_id", "gap", "bound", "slope_cum", "bound_ok")


def converge(
    beta: SmoothOneForm,
    a: float,
    test_forms: list[TestOneForm],
    n_list=(1, 2, 4, 8, 16),
    r: SmoothingFunction | None = None,
    spec: QuadratureSpec = QuadratureSpec(),
    shrink_segments: bool = True,
) -> ExperimentTable:
    """Gaps ``T_{nu^(n) - beta}(alpha)`` against the explicit bound for every ``n``.

    ``C`` is measured on the ``n = 1`` form (the first entry of ``n_list``
    must be 1 for that; otherwise the smallest ``n`` is used). Per-``n``
    constants, slopes per test form and the slope of the max gap are stored
    in ``table.meta``.
    """
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ValueError("n_list must be nonempty")
    if n_list != sorted(n_list) or len(set(n_list)) != len(n_list):
        raise ValueError("n_list must be strictly ascending")
    r = r or quintic()
    d2x, d1y = derivative_norms(beta)
    r_max = r.max_derivative()
    norms = [alpha.sup_norm() for alpha in test_forms]
    ids = [alpha.name or f"alpha{i}" for i, alpha in enumerate(test_forms)]

    arrays = {n: DislocationArray(beta, a, n, r, shrink_segments=shrink_segments) for n in n_list}
    per_n_C = {n: bound_constant(arrays[n]) for n in n_list}
    C = per_n_C[n_list[0]]

    jobs = [(n, i) for n in n_list for i in range(len(test_forms))]
    gaps = parallel_map(lambda job: gap(arrays[job[0]], beta, test_forms[job[1]], spec), jobs)
    gap_of = dict(zip(jobs, gaps))

    table = ExperimentTable(CONVERGE_COLUMNS)
    for n in n_list:
        for i, tid in enumerate(ids):
            g = gap_of[(n, i)]
            b = convergence_bound(norms[i], n, d2x, d1y, C, r_max)
            seen = [m for m in n_list if m <= n]
            slope = loglog_slope(seen, [gap_of[(m, i)] for m in seen])
            table.add(n=n, test_id=tid, gap=g, bound=b, slope_cum=slope, bound_ok=abs(g) <= b)
    max_gap = [max(abs(gap_of[(n, i)]) for i in range(len(test_forms))) for n in n_list] if test_forms else []
    table.meta = {
        "C": C,
        "C_per_n": {str(n): per_n_C[n] for n in n_list},
        "r_max": r_max,
        "d_beta2_dx": d2x,
        "d_beta1_dy": d1y,
        "alpha_norms": dict(zip(ids, norms)),
        "slopes": {tid: loglog_slope(n_list, [gap_of[(n, i)] for n in n_list]) for i, tid in enumerate(ids)},
        "max_gap": dict(zip((str(n) for n in n_list), max_gap)),
        "max_gap_slope": loglog_slope(n_list, max_gap),
        "all_bounds_ok": all(r["bound_ok"] for r in table.rows),
        "config": {
            "beta_name": beta.name,
            "a": float(a),
            "r_name": r.name,
            "n_list": n_list,
            "shrink_segments": shrink_segments,
            "quadrature": {"order": spec.order, "max_panel": spec.max_panel, "tol": spec.tol},
        },
    }
    return table
