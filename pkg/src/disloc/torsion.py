"""Coframes, dual frames, parallel transport, Burgers vectors and torsion currents.

A coframe ``{theta^1, theta^2}`` may mix smooth forms with singular ones
(single dislocations or dislocation arrays). Vectors are returned in the
coordinate basis ``(d_x, d_y)`` at a reference point ``p_ref``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .currents import TestFunction, boundary_density, boundary_singular, boundary_smooth, CurrentPairing
from .dislocation import CutEvaluationError, DislocationForm, SmoothingFunction
from .experiment import ExperimentTable, loglog_slope
from .forms import Point, SmoothOneForm, catalog, exterior_derivative
from .homogenization import DislocationArray
from .quadrature import CutSet, QuadratureSpec, integrate_line

MAX_CONDITION = 1e8
DEFAULT_P_REF = Point(1.0 / 3.0, 1.0 / 3.0)


class DegenerateCoframeError(ValueError):
    """The coframe matrix is singular or too ill-conditioned at a point."""


class ReferencePointError(ValueError):
    """A reference point lies on a cut."""


def is_singular(member) -> bool:
    return isinstance(member, (DislocationForm, DislocationArray))


def _evaluate(member, x, y, side="auto"):
    if is_singular(member):
        return member(x, y, side)
    return member(x, y)


@dataclass(frozen=True)
class TangentVectorAtP:
    """Vector ``v1 d_x + v2 d_y`` at ``p``."""

    p: Point
    v1: float
    v2: float

    def __post_init__(self):
        if not (math.isfinite(self.v1) and math.isfinite(self.v2)):
            raise ValueError("tangent vector components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.v1, self.v2])

    def norm(self) -> float:
        return math.hypot(self.v1, self.v2)

    def to_record(self) -> dict:
        return {"p_ref": [self.p.x, self.p.y], "components": [self.v1, self.v2]}


@dataclass(frozen=True)
class FrameAtPoint:
    """Frame ``e_1, e_2`` at ``p``; ``e_i`` are the columns of :attr:`matrix`."""

    p: Point
    e1: tuple
    e2: tuple

    @property
    def matrix(self) -> np.ndarray:
        return np.array([self.e1, self.e2]).T

    def to_record(self) -> dict:
        return {"p": [self.p.x, self.p.y], "e1": list(self.e1), "e2": list(self.e2)}


class Coframe:
    """Two pointwise independent 1-forms, each smooth or singular."""

    def __init__(self, theta1, theta2):
        self.theta = (theta1, theta2)
        self.singular = tuple(is_singular(t) for t in self.theta)
        cuts = CutSet()
        for t in self.theta:
            cuts = cuts.merge(getattr(t, "cuts", CutSet()))
        self.cuts = cuts

    def __repr__(self):
        return f"Coframe({self.theta[0]!r}, {self.theta[1]!r})"

    def matrix(self, x, y, side: str = "auto") -> np.ndarray:
        """Component matrices ``M[..., i, :] = theta^i`` at arrays of points."""
        rows = [np.stack(_evaluate(t, x, y, side), axis=-1) for t in self.theta]
        return np.stack(rows, axis=-2)

    def matrix_at(self, p: Point, side: str = "auto") -> np.ndarray:
        if side == "auto" and self.cuts.on_cut(p.x, p.y):
            raise CutEvaluationError(f"point ({p.x}, {p.y}) lies on a cut")
        return self.matrix(np.array(p.x), np.array(p.y), side)

    def frame_matrix(self, p: Point, side: str = "auto") -> np.ndarray:
        """``E`` with the dual frame vectors as columns, ``M E = I``."""
        m = self.matrix_at(p, side)
        cond = np.linalg.cond(m)
        if not np.isfinite(cond) or cond >= MAX_CONDITION:
            raise DegenerateCoframeError(f"coframe is degenerate at ({p.x}, {p.y}) (condition {cond:.3e})")
        return np.linalg.inv(m)

    def condition(self, points) -> float:
        """Largest condition number of the coframe matrix over ``points``."""
        pts = np.asarray(points, dtype=float)
        m = self.matrix(pts[:, 0], pts[:, 1])
        return float(np.max(np.linalg.cond(m)))

    def check(self, samples: int = 1000, seed: int = 0) -> float:
        """Worst condition number at random off-cut points; raises when degenerate."""
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0.0, 1.0, size=(samples, 2))
        pts = pts[~self.cuts.on_cut(pts[:, 0], pts[:, 1])]
        cond = self.condition(pts)
        if not cond < MAX_CONDITION:
            raise DegenerateCoframeError(f"coframe condition number {cond:.3e}")
        return cond


def dual_frame(cf: Coframe, p: Point, side: str = "auto") -> FrameAtPoint:
    e = cf.frame_matrix(p, side)
    return FrameAtPoint(p, (float(e[0, 0]), float(e[1, 0])), (float(e[0, 1]), float(e[1, 1])))


def duality_error(cf: Coframe, p: Point) -> float:
    """``max |theta^i(e_j) - delta_ij|`` at ``p``."""
    return float(np.max(np.abs(cf.matrix_at(p) @ cf.frame_matrix(p) - np.eye(2))))


def parallel_transport(cf: Coframe, p: Point, q: Point) -> np.ndarray:
    """``Pi_p^q = e_i|_q (x) theta^i|_p`` as a matrix acting on coordinate vectors at ``p``."""
    return cf.frame_matrix(q) @ cf.matrix_at(p)


def frame_parallelism(cf: Coframe, p: Point, h: float = 1e-4) -> float:
    """Finite-difference covariant derivative of the frame at ``p``.

    The connection is the one whose transport is :func:`parallel_transport`:
    ``(Pi_{p+hv}^p e_i(p+hv) - e_i(p)) / h`` for ``v`` in both coordinate
    directions. Returns the largest norm found.
    """
    e_p = cf.frame_matrix(p)
    worst = 0.0
    for v in ((h, 0.0), (0.0, h)):
        q = Point(p.x + v[0], p.y + v[1])
        moved = parallel_transport(cf, q, p) @ cf.frame_matrix(q)
        worst = max(worst, float(np.max(np.abs(moved - e_p))) / h)
    return worst


def torsion_density(cf: Coframe, p_ref: Point):
    """``q -> e_i|_{p_ref} * (d theta^i)(q)`` for a smooth coframe; returns shape ``(..., 2)``."""
    if any(cf.singular):
        raise TypeError("torsion density needs a smooth coframe")
    e = cf.frame_matrix(p_ref)
    d = [exterior_derivative(t) for t in cf.theta]

    def density(x, y):
        s = np.stack([d[0](x, y), d[1](x, y)], axis=-1)
        return s @ e.T

    return density


def _check_p_ref(cf: Coframe, p_ref: Point):
    if cf.cuts.on_cut(p_ref.x, p_ref.y):
        raise ReferencePointError(
            f"p_ref ({p_ref.x}, {p_ref.y}) lies on a cut; try ({DEFAULT_P_REF.x!r}, {DEFAULT_P_REF.y!r})"
        )


def boundary_values(cf: Coframe, eta: TestFunction, mode: str = "auto", spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """``(dT_{theta^1}(eta), dT_{theta^2}(eta))``.

    ``mode="auto"`` uses ``int eta d theta`` for smooth members and the
    concentrated jump integral for singular ones; ``mode="weak"`` uses
    ``T_theta(d eta)`` for every member.
    """
    out = []
    for t, sing in zip(cf.theta, cf.singular):
        if mode == "weak":
            out.append(boundary_smooth(CurrentPairing(t, spec), eta))
        elif mode == "auto":
            out.append(boundary_singular(t, eta) if sing else boundary_density(t, eta, spec))
        else:
            raise ValueError("mode must be 'auto' or 'weak'")
    return np.array(out)


def torsion_current(cf: Coframe, p_ref: Point, eta: TestFunction, mode: str = "auto", spec: QuadratureSpec = QuadratureSpec()) -> TangentVectorAtP:
    """``e_i|_{p_ref} dT_{theta^i}(eta)``."""
    _check_p_ref(cf, p_ref)
    v = cf.frame_matrix(p_ref) @ boundary_values(cf, eta, mode, spec)
    return TangentVectorAtP(p_ref, float(v[0]), float(v[1]))


def burgers_vector(cf: Coframe, loop, p_ref: Point, spec: QuadratureSpec = QuadratureSpec(order=16, max_panel=1 / 32)) -> TangentVectorAtP:
    """``e_i|_{p_ref} oint_loop theta^i`` for a closed polyline avoiding the cuts."""
    pts = [tuple(map(float, q)) for q in loop]
    if len(pts) < 4 or pts[0] != pts[-1]:
        raise ValueError("loop must be a closed polyline (first vertex repeated at the end)")
    _check_p_ref(cf, p_ref)
    s = np.array([integrate_line(lambda x, y, t=t: _evaluate(t, x, y), pts, spec, cf.cuts) for t in cf.theta])
    v = cf.frame_matrix(p_ref) @ s
    return TangentVectorAtP(p_ref, float(v[0]), float(v[1]))


def burgers_record(loop, vector: TangentVectorAtP, frame: FrameAtPoint) -> dict:
    return {"loop": [list(map(float, q)) for q in loop], **vector.to_record(), "frame": frame.to_record()}


# ----------------------------------------------------------------------------
# homogenization of torsion

TORSION_COLUMNS = ("n", "eta_id", "gap_component_1", "gap_component_2", "bound_note")
_ZERO = 1e-14


def suggest_p_ref(arrays) -> Point:
    for cand in (DEFAULT_P_REF, Point(1 / 7, 2 / 7), Point(0.3, 0.2)):
        if not any(arr.cuts.on_cut(cand.x, cand.y) for arr in arrays):
            return cand
    raise ReferencePointError("no default reference point avoids the cuts")


def torsion_homogenization(
    beta: SmoothOneForm,
    a: float,
    etas: list[TestFunction],
    n_list=(1, 2, 4, 8),
    partner: SmoothOneForm | None = None,
    p_ref: Point = DEFAULT_P_REF,
    r: SmoothingFunction | None = None,
    spec: QuadratureSpec = QuadratureSpec(),
    shrink_segments: bool = True,
) -> ExperimentTable:
    """Componentwise gaps ``|T_n(eta) - T(eta)|`` of the array torsion currents.

    ``T`` belongs to the smooth coframe ``{beta, partner}`` and ``T_n`` to
    ``{nu^(n), partner}``, both expressed at ``p_ref``. Slopes are fitted
    only for components that are not identically zero.
    """
    partner = partner or catalog("dx")
    n_list = [int(n) for n in n_list]
    if n_list != sorted(n_list) or len(set(n_list)) != len(n_list):
        raise ValueError("n_list must be strictly ascending")
    arrays = {n: DislocationArray(beta, a, n, r, shrink_segments=shrink_segments) for n in n_list}
    for n, arr in arrays.items():
        if arr.cuts.on_cut(p_ref.x, p_ref.y):
            s = suggest_p_ref(arrays.values())
            raise ReferencePointError(f"p_ref ({p_ref.x}, {p_ref.y}) lies on a cut for n={n}; try ({s.x!r}, {s.y!r})")

    smooth = Coframe(beta, partner)
    ids = [eta.name or f"eta{i}" for i, eta in enumerate(etas)]
    target = [torsion_current(smooth, p_ref, eta, spec=spec).as_array() for eta in etas]
    beta_at = np.array(smooth.matrix_at(p_ref)[0])

    table = ExperimentTable(TORSION_COLUMNS)
    gaps = {}
    frame_gaps = {}
    for n in n_list:
        cf = Coframe(arrays[n], partner)
        frame_gaps[n] = float(np.max(np.abs(cf.matrix_at(p_ref)[0] - beta_at)))
        for i, eta in enumerate(etas):
            g = np.abs(torsion_current(cf, p_ref, eta, spec=spec).as_array() - target[i])
            gaps[(n, i)] = g
            table.add(
                n=n,
                eta_id=ids[i],
                gap_component_1=float(g[0]),
                gap_component_2=float(g[1]),
                bound_note=f"frame_gap={frame_gaps[n]!r}",
            )

    slopes = {}
    for i, tid in enumerate(ids):
        for c in range(2):
            series = [gaps[(n, i)][c] for n in n_list]
            key = f"{tid}:component_{c + 1}"
            slopes[key] = None if max(series) <= _ZERO else loglog_slope(n_list, series)
    table.meta = {
        "p_ref": [p_ref.x, p_ref.y],
        "frame_at_p_ref": dual_frame(smooth, p_ref).to_record(),
        "target": {tid: list(map(float, t)) for tid, t in zip(ids, target)},
        "frame_gap": {str(n): frame_gaps[n] for n in n_list},
        "frame_gap_slope": loglog_slope(n_list, [frame_gaps[n] for n in n_list]),
        "slopes": slopes,
        "config": {
            "beta_name": beta.name,
            "partner": partner.name,
            "a": float(a),
            "n_list": n_list,
            "shrink_segments": shrink_segments,
        },
    }
    return table


def dumps_records(records) -> str:
    return json.dumps(records, indent=2, sort_keys=True) + "\n"
