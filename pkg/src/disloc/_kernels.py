"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time from ``DISLOC_ACCEL``:
``numba`` (default when numba imports) or ``numpy``. Both paths compute the
same quantities; only the reduction kernels may differ in the last bit.
"""

import math
import os

import numpy as np

_requested = os.environ.get("DISLOC_ACCEL", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"DISLOC_ACCEL must be 'numba' or 'numpy', got {_requested!r}")

try:
    if _requested == "numba":
        import numba

        njit = numba.njit(cache=True, nogil=True)
    else:
        numba = None
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

BACKEND = "numba" if numba is not None else "numpy"


# ----------------------------------------------------------------------------
# numpy implementations


def _smoothstep_np(t):
    s = np.clip(np.asarray(t, dtype=float) + 0.5, 0.0, 1.0)
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)


def _smoothstep_deriv_np(t):
    s = np.clip(np.asarray(t, dtype=float) + 0.5, 0.0, 1.0)
    return 30.0 * s * s * (1.0 - s) * (1.0 - s)


def _bump_np(x, y, cx, cy, radius):
    u = (np.asarray(x, dtype=float) - cx) / radius
    v = (np.asarray(y, dtype=float) - cy) / radius
    w = np.maximum(1.0 - (u * u + v * v), 0.0)
    return w * w * w


def _bump_grad_np(x, y, cx, cy, radius):
    u = (np.asarray(x, dtype=float) - cx) / radius
    v = (np.asarray(y, dtype=float) - cy) / radius
    w = np.maximum(1.0 - (u * u + v * v), 0.0)
    g = -6.0 * w * w / radius
    return g * u, g * v


def _weighted_sum_np(values, weights):
    return math.fsum((np.asarray(values, dtype=float) * weights).ravel().tolist())


def _strip_combine_np(inv_a, rv, drv, pl, pr, plx, prx, ply, pry):
    one_minus = 1.0 - rv
    c1 = inv_a * drv * (pr - pl) + one_minus * plx + rv * prx
    c2 = one_minus * ply + rv * pry
    return c1, c2


def _marching_squares_np(field, xs, ys, level):
    # Saddle cells are split by the cell-centre average.
    segs = []
    ny, nx = field.shape
    for j in range(ny - 1):
        for i in range(nx - 1):
            _cell_segments(field, xs, ys, level, i, j, segs)
    if not segs:
        return np.empty((0, 4))
    return np.array(segs, dtype=float)


def _interp(p0, p1, f0, f1, level):
    # flat edges are never crossed; their value is unused
    if f1 == f0:
        return 0.5 * (p0 + p1)
    t = (level - f0) / (f1 - f0)
    return p0 + t * (p1 - p0)


def _cell_segments(field, xs, ys, level, i, j, out):
    f00 = field[j, i]
    f10 = field[j, i + 1]
    f11 = field[j + 1, i + 1]
    f01 = field[j + 1, i]
    if not (np.isfinite(f00) and np.isfinite(f10) and np.isfinite(f11) and np.isfinite(f01)):
        return
    x0, x1 = xs[i], xs[i + 1]
    y0, y1 = ys[j], ys[j + 1]
    idx = 0
    if f00 >= level:
        idx |= 1
    if f10 >= level:
        idx |= 2
    if f11 >= level:
        idx |= 4
    if f01 >= level:
        idx |= 8
    if idx == 0 or idx == 15:
        return
    # edge points: bottom, right, top, left
    eb = (_interp(x0, x1, f00, f10, level), y0)
    er = (x1, _interp(y0, y1, f10, f11, level))
    et = (_interp(x0, x1, f01, f11, level), y1)
    el = (x0, _interp(y0, y1, f00, f01, level))
    pairs = _CASES[idx]
    if idx == 5 or idx == 10:
        centre = 0.25 * (f00 + f10 + f11 + f01)
        if centre < level:
            pairs = _CASES[15 - idx]
    edges = (eb, er, et, el)
    for a, b in pairs:
        pa, pb = edges[a], edges[b]
        out.append((pa[0], pa[1], pb[0], pb[1]))


# case index -> list of (edge, edge) pairs; edges 0=bottom 1=right 2=top 3=left
_CASES = {
    1: ((3, 0),),
    2: ((0, 1),),
    3: ((3, 1),),
    4: ((1, 2),),
    5: ((3, 2), (0, 1)),
    6: ((0, 2),),
    7: ((3, 2),),
    8: ((2, 3),),
    9: ((2, 0),),
    10: ((3, 0), (1, 2)),
    11: ((2, 1),),
    12: ((1, 3),),
    13: ((1, 0),),
    14: ((0, 3),),
}


# ----------------------------------------------------------------------------
# numba implementations

if numba is not None:

    @njit
    def _smoothstep_nb(t):
        out = np.empty(t.size)
        flat = t.ravel()
        for i in range(flat.size):
            s = flat[i] + 0.5
            if s <= 0.0:
                out[i] = 0.0
            elif s >= 1.0:
                out[i] = 1.0
            else:
                out[i] = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
        return out.reshape(t.shape)

    @njit
    def _smoothstep_deriv_nb(t):
        out = np.empty(t.size)
        flat = t.ravel()
        for i in range(flat.size):
            s = flat[i] + 0.5
            if s <= 0.0 or s >= 1.0:
                out[i] = 0.0
            else:
                out[i] = 30.0 * s * s * (1.0 - s) * (1.0 - s)
        return out.reshape(t.shape)

    @njit
    def _bump_nb(x, y, cx, cy, radius):
        out = np.empty(x.size)
        fx = x.ravel()
        fy = y.ravel()
        for i in range(fx.size):
            u = (fx[i] - cx) / radius
            v = (fy[i] - cy) / radius
            w = 1.0 - (u * u + v * v)
            out[i] = w * w * w if w > 0.0 else 0.0
        return out.reshape(x.shape)

    @njit
    def _bump_grad_nb(x, y, cx, cy, radius):
        gx = np.empty(x.size)
        gy = np.empty(x.size)
        fx = x.ravel()
        fy = y.ravel()
        for i in range(fx.size):
            u = (fx[i] - cx) / radius
            v = (fy[i] - cy) / radius
            w = 1.0 - (u * u + v * v)
            if w > 0.0:
                g = -6.0 * w * w / radius
                gx[i] = g * u
                gy[i] = g * v
            else:
                gx[i] = 0.0
                gy[i] = 0.0
        return gx.reshape(x.shape), gy.reshape(x.shape)

    @njit
    def _weighted_sum_nb(values, weights):
        # Neumaier-compensated sum in fixed (row-major) order.
        v = values.ravel()
        w = weights.ravel()
        total = 0.0
        comp = 0.0
        for i in range(v.size):
            term = v[i] * w[i]
            t = total + term
            if abs(total) >= abs(term):
                comp += (total - t) + term
            else:
                comp += (term - t) + total
            total = t
        return total + comp

    @njit
    def _strip_combine_nb(inv_a, rv, drv, pl, pr, plx, prx, ply, pry):
        n = rv.size
        c1 = np.empty(n)
        c2 = np.empty(n)
        frv = rv.ravel()
        fdrv = drv.ravel()
        fpl = pl.ravel()
        fpr = pr.ravel()
        fplx = plx.ravel()
        fprx = prx.ravel()
        fply = ply.ravel()
        fpry = pry.ravel()
        for i in range(n):
            om = 1.0 - frv[i]
            c1[i] = inv_a * fdrv[i] * (fpr[i] - fpl[i]) + om * fplx[i] + frv[i] * fprx[i]
            c2[i] = om * fply[i] + frv[i] * fpry[i]
        return c1.reshape(rv.shape), c2.reshape(rv.shape)

    @njit
    def _ms_interp(p0, p1, f0, f1, level):
        if f1 == f0:
            return 0.5 * (p0 + p1)
        return p0 + (level - f0) / (f1 - f0) * (p1 - p0)

    @njit
    def _marching_squares_nb(field, xs, ys, level):
        ny, nx = field.shape
        out = np.empty(((ny - 1) * (nx - 1) * 2, 4))
        cases = np.array(
            [
                [-1, -1, -1, -1],
                [3, 0, -1, -1],
                [0, 1, -1, -1],
                [3, 1, -1, -1],
                [1, 2, -1, -1],
                [3, 2, 0, 1],
                [0, 2, -1, -1],
                [3, 2, -1, -1],
                [2, 3, -1, -1],
                [2, 0, -1, -1],
                [3, 0, 1, 2],
                [2, 1, -1, -1],
                [1, 3, -1, -1],
                [1, 0, -1, -1],
                [0, 3, -1, -1],
                [-1, -1, -1, -1],
            ]
        )
        ex = np.empty(4)
        ey = np.empty(4)
        m = 0
        for j in range(ny - 1):
            for i in range(nx - 1):
                f00 = field[j, i]
                f10 = field[j, i + 1]
                f11 = field[j + 1, i + 1]
                f01 = field[j + 1, i]
                if not (np.isfinite(f00) and np.isfinite(f10) and np.isfinite(f11) and np.isfinite(f01)):
                    continue
                idx = 0
                if f00 >= level:
                    idx |= 1
                if f10 >= level:
                    idx |= 2
                if f11 >= level:
                    idx |= 4
                if f01 >= level:
                    idx |= 8
                if idx == 0 or idx == 15:
                    continue
                x0 = xs[i]
                x1 = xs[i + 1]
                y0 = ys[j]
                y1 = ys[j + 1]
                ex[0] = _ms_interp(x0, x1, f00, f10, level)
                ey[0] = y0
                ex[1] = x1
                ey[1] = _ms_interp(y0, y1, f10, f11, level)
                ex[2] = _ms_interp(x0, x1, f01, f11, level)
                ey[2] = y1
                ex[3] = x0
                ey[3] = _ms_interp(y0, y1, f00, f01, level)
                row = idx
                if idx == 5 or idx == 10:
                    centre = 0.25 * (f00 + f10 + f11 + f01)
                    if centre < level:
                        row = 15 - idx
                for k in range(0, 4, 2):
                    a = cases[row, k]
                    if a < 0:
                        break
                    b = cases[row, k + 1]
                    out[m, 0] = ex[a]
                    out[m, 1] = ey[a]
                    out[m, 2] = ex[b]
                    out[m, 3] = ey[b]
                    m += 1
        return out[:m].copy()


def _as_float(a):
    return np.ascontiguousarray(a, dtype=float)


def smoothstep(t):
    """Quintic smoothstep on [-1/2, 1/2]: 0 below, 1 above, C^2 in between."""
    if BACKEND == "numba":
        return _smoothstep_nb(np.atleast_1d(_as_float(t))).reshape(np.shape(t))
    return _smoothstep_np(t)


def smoothstep_deriv(t):
    if BACKEND == "numba":
        return _smoothstep_deriv_nb(np.atleast_1d(_as_float(t))).reshape(np.shape(t))
    return _smoothstep_deriv_np(t)


def bump(x, y, cx, cy, radius):
    """Radial bump (1 - rho^2)^3 on rho < 1, zero outside."""
    if BACKEND == "numba":
        x, y = np.broadcast_arrays(_as_float(x), _as_float(y))
        shape = x.shape
        return _bump_nb(np.atleast_1d(_as_float(x)), np.atleast_1d(_as_float(y)), cx, cy, radius).reshape(shape)
    return _bump_np(x, y, cx, cy, radius)


def bump_grad(x, y, cx, cy, radius):
    if BACKEND == "numba":
        x, y = np.broadcast_arrays(_as_float(x), _as_float(y))
        shape = x.shape
        gx, gy = _bump_grad_nb(np.atleast_1d(_as_float(x)), np.atleast_1d(_as_float(y)), cx, cy, radius)
        return gx.reshape(shape), gy.reshape(shape)
    return _bump_grad_np(x, y, cx, cy, radius)


def weighted_sum(values, weights):
    """Deterministic sum of ``values * weights`` (same shape)."""
    values = _as_float(values)
    weights = np.broadcast_to(_as_float(weights), values.shape)
    if BACKEND == "numba":
        return float(_weighted_sum_nb(values, np.ascontiguousarray(weights)))
    return _weighted_sum_np(values, weights)


def strip_combine(inv_a, rv, drv, pl, pr, plx, prx, ply, pry):
    """Covector components inside the interpolation strip.

    Returns ``(c1, c2)`` with
    ``c1 = inv_a r' (pR - pL) + (1 - r) pL_x + r pR_x`` and
    ``c2 = (1 - r) pL_y + r pR_y``.
    """
    if BACKEND == "numba":
        arrs = np.broadcast_arrays(*(_as_float(a) for a in (rv, drv, pl, pr, plx, prx, ply, pry)))
        arrs = [np.ascontiguousarray(a) for a in arrs]
        return _strip_combine_nb(float(inv_a), *arrs)
    return _strip_combine_np(inv_a, rv, drv, pl, pr, plx, prx, ply, pry)


def marching_squares(field, xs, ys, level):
    """Contour segments ``(x0, y0, x1, y1)`` of ``field == level``.

    ``field[j, i]`` is sampled at ``(xs[i], ys[j])``. Non-finite samples
    switch off the cells that touch them.
    """
    field = _as_float(field)
    xs = _as_float(xs)
    ys = _as_float(ys)
    if BACKEND == "numba":
        return _marching_squares_nb(field, xs, ys, float(level))
    return _marching_squares_np(field, xs, ys, float(level))
