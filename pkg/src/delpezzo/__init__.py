"""Cubic and degree-4 del Pezzo surfaces over finite fields."""

from .cubic import CubicSurface, OutOfRangeError, SingularSurfaceError, SurfaceError, surface_points
from .dp4 import DP4Surface, dp4_lines, dp4_points
from .ffield import FieldCtx, make_field
from .lines import find_lines, is_minimal
from .picard import conjugacy_classes, trace_frobenius
from .cli import analyze_surface, load_fixture, load_surface

__all__ = [
    "CubicSurface",
    "DP4Surface",
    "FieldCtx",
    "OutOfRangeError",
    "SingularSurfaceError",
    "SurfaceError",
    "analyze_surface",
    "conjugacy_classes",
    "dp4_lines",
    "dp4_points",
    "find_lines",
    "is_minimal",
    "load_fixture",
    "load_surface",
    "make_field",
    "surface_points",
    "trace_frobenius",
]
