"""Invariant suites for single dislocations, arrays and coframes.

Every check returns a :class:`CheckResult`; a suite is a list of them.
The CLI ``check`` command and the acceptance tests both run these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dislocation import Y_CUT, DislocationForm, SmoothingFunction, quintic
from .forms import Point, SmoothOneForm, catalog, check_derivatives, exterior_derivative
from .homogenization import DislocationArray, array_jump, check_gluing
from .quadrature import QuadratureSpec, circulation, integrate_cell, integrate_interval, integrate_line, rectangle_path
from .torsion import Coframe, burgers_vector, duality_error, frame_parallelism, parallel_transport, torsion_current
from .currents import random_test_functions

_LINE = QuadratureSpec(order=16, max_panel=1 / 32)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""

    def to_record(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "value": self.value,
            "tol": self.tol,
            "passed": self.passed,
            "detail": self.detail,
        }


def _result(suite, name, value, tol, detail="", le=True) -> CheckResult:
    value = float(value)
    ok = bool(value <= tol) if le else bool(value >= tol)
    return CheckResult(suite, name, value, float(tol), ok, detail)


# ----------------------------------------------------------------------------
# single dislocation


def _off_cut_points(d: DislocationForm, count: int, rng, margin: float = 1e-3, edge: float = 1e-3):
    pts = []
    while len(pts) < count:
        x, y = rng.uniform(edge, 1 - edge, size=2)
        if abs(x - d.x_left) <= margin or abs(x - d.x_right) <= margin:
            continue
        if d.x_left - margin < x < d.x_right + margin and abs(y - Y_CUT) <= margin:
            continue
        pts.append((x, y))
    return np.array(pts)


def curl_fd(form, x, y, h: float = 1e-5):
    """Centred finite-difference ``d/dx c2 - d/dy c1``."""
    c2p = form(x + h, y)[1]
    c2m = form(x - h, y)[1]
    c1p = form(x, y + h)[0]
    c1m = form(x, y - h)[0]
    return (c2p - c2m) / (2 * h) - (c1p - c1m) / (2 * h)


def c2_norm(beta: SmoothOneForm, resolution: int = 64) -> float:
    g = (np.arange(resolution) + 0.5) / resolution
    X, Y = np.meshgrid(g, g)
    parts = [beta.b1, beta.b2, beta.b1_x, beta.b1_y, beta.b2_x, beta.b2_y, beta.b1_xx, beta.b1_xy]
    return float(max(np.max(np.abs(f(X, Y) + 0.0 * X)) for f in parts))


def dislocation_suite(beta: SmoothOneForm, a: float, r: SmoothingFunction | None = None, seed: int = 0) -> list[CheckResult]:
    """Construction properties of a single dislocation form."""
    r = r or quintic()
    suite = f"dislocation[{beta.name}, a={a!r}, r={r.name}]"
    d = DislocationForm(beta, a, r)
    rng = np.random.default_rng(seed)
    out = []

    issues = r.validate()
    out.append(CheckResult(suite, "smoothing function admissible", float(len(issues)), 0.0, not issues, "; ".join(issues)))
    try:
        err = check_derivatives(beta)
        out.append(_result(suite, "supplied derivatives match finite differences", err, 1e-5))
    except ValueError as exc:
        out.append(CheckResult(suite, "supplied derivatives match finite differences", math.inf, 1e-5, False, str(exc)))

    pts = _off_cut_points(d, 500, rng)
    curl = float(np.max(np.abs(curl_fd(d, pts[:, 0], pts[:, 1]))))
    out.append(_result(suite, "closedness (finite-difference curl)", curl, 1e-4 * (1 + c2_norm(beta))))

    ys = rng.uniform(0.0, 1.0, 100)
    ys = np.where(ys == Y_CUT, 0.25, ys)
    worst = 0.0
    for xe in (0.0, 1.0):
        c1, c2 = d(np.full_like(ys, xe), ys)
        b1, b2 = beta(np.full_like(ys, xe), ys)
        worst = max(worst, float(np.max(np.abs(c1 - b1))), float(np.max(np.abs(c2 - b2))))
    out.append(_result(suite, "matches beta on x=0 and x=1", worst, 1e-10))

    circ_nu = circulation(d, spec=_LINE)
    circ_beta = circulation(beta, spec=_LINE)
    out.append(_result(suite, "circulation preserved", abs(circ_nu - circ_beta), 1e-8))

    xs = np.concatenate([rng.uniform(0, d.x_left, 100), rng.uniform(d.x_right, 1, 100)])
    yv = rng.uniform(0, 1, 200)
    c1, _ = d(xs, yv)
    b1, _ = beta(xs, yv)
    out.append(_result(suite, "horizontal component outside the strip", float(np.max(np.abs(c1 - b1))), 1e-10))

    ji = d.jump_integral()
    out.append(_result(suite, "jump integral equals circulation", abs(ji - circ_beta), 1e-8))

    xj = np.linspace(d.x_left, d.x_right, 41)[1:-1]
    j1, j2 = d.jump_from_limits(xj)
    mism = max(float(np.max(np.abs(j1 - d.jump(xj)))), float(np.max(np.abs(j2))))
    out.append(_result(suite, "one-sided limits reproduce the jump", mism, 1e-8))

    ratio = c1_bound_ratio(d)
    out.append(
        CheckResult(suite, "C1 bound stable under grid refinement", ratio, 0.1, bool(0.9 <= ratio <= 1.1), "ratio of sups at 128 and 256")
    )

    worst_loop = 0.0
    for delta in (0.2, 0.05, 0.01, 1e-3):
        loop = rectangle_path(d.x_left - delta, d.x_right + delta, Y_CUT - delta, Y_CUT + delta)
        worst_loop = max(worst_loop, abs(integrate_line(d, loop, _LINE) - circ_beta))
    out.append(_result(suite, "shrinking loops around the segment keep the circulation", worst_loop, 1e-8))
    return out


def c1_bound_ratio(d: DislocationForm) -> float:
    """Ratio of the sampled C^1 sup norm at grid 256 to that at grid 128."""

    def sup_at(res):
        g = (np.arange(res) + 0.5) / res
        g = g[(g > 2e-4) & (g < 1 - 2e-4)]
        X, Y = np.meshgrid(g, g)
        keep = np.abs(Y - Y_CUT) > 2e-4
        X, Y = X[keep], Y[keep]
        h = 1e-4
        vals = [np.abs(np.stack(d(X, Y)))]
        vals.append(np.abs((np.stack(d(X + h, Y)) - np.stack(d(X - h, Y))) / (2 * h)))
        vals.append(np.abs((np.stack(d(X, Y + h)) - np.stack(d(X, Y - h))) / (2 * h)))
        return max(float(np.max(v)) for v in vals)

    return sup_at(256) / sup_at(128)


# ----------------------------------------------------------------------------
# arrays


def exactness_error(form, beta: SmoothOneForm, resolution: int = 201) -> float:
    """``max |nu - beta|`` over an off-cut ``resolution x resolution`` grid."""
    g = np.linspace(0.0, 1.0, resolution)
    X, Y = np.meshgrid(g, g)
    keep = ~form.cuts.on_cut(X, Y)
    X, Y = X[keep], Y[keep]
    c1, c2 = form(X, Y)
    b1, b2 = beta(X, Y)
    return float(max(np.max(np.abs(c1 - b1)), np.max(np.abs(c2 - b2))))


def array_suite(beta: SmoothOneForm, a: float, n: int, r: SmoothingFunction | None = None) -> list[CheckResult]:
    suite = f"array[{beta.name}, a={a!r}, n={n}]"
    arr = DislocationArray(beta, a, n, r)
    out = []
    segs = arr.segments()
    out.append(CheckResult(suite, "segment count", float(len(segs)), float(n * n), len(segs) == n * n))
    out.append(_result(suite, "total segment length equals a", abs(arr.total_cut_length() - a), 1e-12))
    rep = check_gluing(arr)
    if n > 1:
        out.append(_result(suite, "C0 gluing across skeleton", rep.value_mismatch, 1e-6))
        out.append(_result(suite, "C1 gluing across skeleton", rep.derivative_mismatch, 1e-6))
    out.append(_result(suite, "per-cell circulation equals integral of d beta", rep.circulation_mismatch, 1e-8))
    spec = QuadratureSpec(order=16, max_panel=1 / 16)
    worst = 0.0
    for k in range(n):
        for j in range(n):
            x_lo, x_hi, _ = arr.tile_segment(k, j)
            seg = integrate_interval(lambda x, k=k, j=j: array_jump(arr, k, j, x), x_lo, x_hi, spec)
            worst = max(worst, abs(seg - arr.cell_circulation(k, j)))
    out.append(_result(suite, "segment jump integrals equal cell circulations", worst, 1e-8))
    if beta.closed:
        out.append(_result(suite, "closed beta reproduced exactly", exactness_error(arr, beta), 1e-9))
    return out


# ----------------------------------------------------------------------------
# coframes


def torsion_suite(beta: SmoothOneForm, a: float, p_ref: Point, partner: SmoothOneForm | None = None, seed: int = 0) -> list[CheckResult]:
    partner = partner or catalog("dx")
    suite = f"torsion[{beta.name}, {partner.name}, a={a!r}]"
    out = []
    rng = np.random.default_rng(seed)
    smooth = Coframe(beta, partner)
    singular = Coframe(DislocationForm(beta, a), partner)

    pts = rng.uniform(0.02, 0.98, size=(1000, 2))
    pts = pts[~singular.cuts.on_cut(pts[:, 0], pts[:, 1])]
    dual = max(duality_error(singular, Point(*p)) for p in pts)
    out.append(_result(suite, "duality of frame and coframe", dual, 1e-10))

    worst = 0.0
    for _ in range(50):
        p, q, s = (Point(*rng.uniform(0.02, 0.98, 2)) for _ in range(3))
        lhs = parallel_transport(smooth, q, s) @ parallel_transport(smooth, p, q)
        worst = max(worst, float(np.max(np.abs(lhs - parallel_transport(smooth, p, s)))))
    out.append(_result(suite, "transport composition", worst, 1e-9))

    par = max(frame_parallelism(smooth, Point(*p)) for p in rng.uniform(0.05, 0.95, size=(20, 2)))
    out.append(_result(suite, "frame is parallel", par, 1e-4))

    d_beta = exterior_derivative(beta)
    cells = [(0.1, 0.4, 0.1, 0.3), (0.2, 0.9, 0.6, 0.95)]
    worst = 0.0
    e = smooth.frame_matrix(p_ref)
    for cell in cells:
        b = burgers_vector(smooth, rectangle_path(*cell), p_ref).as_array()
        d2 = exterior_derivative(partner)
        expected = e @ np.array([integrate_cell(d_beta, cell), integrate_cell(d2, cell)])
        worst = max(worst, float(np.max(np.abs(b - expected))))
    out.append(_result(suite, "Burgers vector by Stokes (smooth)", worst, 1e-8))

    fs = random_test_functions(seed, 3)
    worst = 0.0
    for f in fs:
        t1 = torsion_current(singular, p_ref, f).as_array()
        t2 = torsion_current(singular, p_ref, f, mode="weak").as_array()
        worst = max(worst, float(np.max(np.abs(t1 - t2))))
    out.append(_result(suite, "concentrated and weak torsion currents agree", worst, 1e-7))
    return out


def closed_torsion_suite(p_ref: Point, n: int = 2) -> list[CheckResult]:
    """Closed coframes give vanishing torsion along both evaluation paths."""
    suite = f"torsion[closed, n={n}]"
    out = []
    fs = random_test_functions(1, 3)
    for name in ("dx", "dy", "dx+dy"):
        beta = catalog(name)
        partner = catalog("dy" if name == "dx" else "dx")
        if name == "dx+dy":
            partner = catalog("dy")
        smooth = Coframe(beta, partner)
        singular = Coframe(DislocationArray(beta, 0.5, n), partner)
        worst = 0.0
        for f in fs:
            worst = max(
                worst,
                torsion_current(smooth, p_ref, f).norm(),
                torsion_current(singular, p_ref, f).norm(),
            )
        out.append(_result(suite, f"{name}: torsion vanishes", worst, 1e-9))
    return out


def burgers_array_check(beta: SmoothOneForm, a: float, n: int, p_ref: Point, partner: SmoothOneForm | None = None) -> list[CheckResult]:
    """Burgers vector of a loop around a block of cells equals the sum of cell circulations."""
    partner = partner or catalog("dx")
    suite = f"burgers[{beta.name}, n={n}]"
    arr = DislocationArray(beta, a, n)
    cf = Coframe(arr, partner)
    e = cf.frame_matrix(p_ref)
    out = []
    blocks = [(0, 1, 0, 1), (0, n, 0, n), (n // 2, n, 0, max(1, n // 2))] if n > 1 else [(0, 1, 0, 1)]
    worst = 0.0
    for k0, k1, j0, j1 in blocks:
        loop = rectangle_path(k0 / n, k1 / n, j0 / n, j1 / n)
        b = burgers_vector(cf, loop, p_ref).as_array()
        total = math.fsum(arr.cell_circulation(k, j) for k in range(k0, k1) for j in range(j0, j1))
        p_total = integrate_line(partner, loop, _LINE)
        expected = e @ np.array([total, p_total])
        worst = max(worst, float(np.max(np.abs(b - expected))))
    out.append(_result(suite, "Burgers vector equals summed cell circulations", worst, 1e-7))
    return out


# ----------------------------------------------------------------------------


DEFAULT_BETAS = ("dx", "dy", "linear_y", "mixed")
DEFAULT_WIDTHS = (0.2, 0.5, 0.8)


def full_suite(beta_names=DEFAULT_BETAS, widths=DEFAULT_WIDTHS, r: SmoothingFunction | None = None, p_ref: Point = Point(1 / 3, 1 / 3), ns=(1, 2, 4)) -> list[CheckResult]:
    results = []
    for name in beta_names:
        beta = catalog(name)
        for a in widths:
            results += dislocation_suite(beta, a, r)
    for name in beta_names:
        beta = catalog(name)
        for n in ns:
            results += array_suite(beta, 0.5, n, r)
    results += torsion_suite(catalog("linear_y"), 0.5, p_ref)
    results += closed_torsion_suite(p_ref)
    results += burgers_array_check(catalog("linear_y"), 0.5, 2, p_ref)
    return results
