"""Singular edge-dislocation layering forms, their currents, and homogenization experiments."""

from ._kernels import BACKEND
from .currents import (
    CurrentPairing,
    TestFunction,
    TestOneForm,
    boundary_density,
    boundary_singular,
    boundary_smooth,
    gap,
    pair,
    random_test_forms,
    random_test_functions,
)
from .dislocation import CutEvaluationError, DislocationForm, ParameterError, SmoothingFunction, quintic, smoothing
from .forms import (
    AffineMap,
    Covector,
    Point,
    SmoothOneForm,
    TwoForm,
    catalog,
    exterior_derivative,
    pullback,
    pushforward,
    tile_map,
    wedge,
)
from .homogenization import DislocationArray, array_jump, build_array, check_gluing, converge, eval_array
from .quadrature import CutSet, QuadratureError, QuadratureSpec, integrate_cell, integrate_line, sup_norm
from .torsion import (
    Coframe,
    burgers_vector,
    dual_frame,
    parallel_transport,
    torsion_current,
    torsion_density,
    torsion_homogenization,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "BACKEND",
    "Coframe",
    "Covector",
    "CurrentPairing",
    "CutEvaluationError",
    "CutSet",
    "DislocationArray",
    "DislocationForm",
    "ParameterError",
    "Point",
    "QuadratureError",
    "QuadratureSpec",
    "SmoothOneForm",
    "SmoothingFunction",
    "TestFunction",
    "TestOneForm",
    "TwoForm",
    "array_jump",
    "boundary_density",
    "boundary_singular",
    "boundary_smooth",
    "build_array",
    "burgers_vector",
    "catalog",
    "check_gluing",
    "converge",
    "dual_frame",
    "eval_array",
    "exterior_derivative",
    "gap",
    "integrate_cell",
    "integrate_line",
    "pair",
    "parallel_transport",
    "pullback",
    "pushforward",
    "quintic",
    "random_test_forms",
    "random_test_functions",
    "smoothing",
    "sup_norm",
    "tile_map",
    "torsion_current",
    "torsion_density",
    "torsion_homogenization",
    "wedge",
]
