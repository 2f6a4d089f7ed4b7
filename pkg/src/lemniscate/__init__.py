"""Lemniscatic domains and exterior conformal maps for polynomial preimages of [-1, 1]."""

__version__ = "0.1.0"

from .centers import (IterationTrace, LemniscaticData, centers_double_symmetry_two,
                      centers_iterative, centers_three_double_symmetry, centers_two_components,
                      classify_symmetry, lemniscatic_data, q_critical_points, q_poly,
                      validate_centers)
from .errors import ConvergenceError, LemniscateError, OnSetError, ValidationError
from .polycore import ComplexPoly, roots
from .preimage import (IntervalSet, PreimageData, analyze, capacity, components_of,
                       endpoint_list, endpoint_residual, green_function, outer_critical_points,
                       polynomial_from_endpoints, solve_endpoints, zero_counts)
from .walshmap import (GridSpec, MapContext, make_context, map_grid, phi, phi_inverse,
                       trace_boundary)

__all__ = [
    "ComplexPoly", "roots",
    "IntervalSet", "PreimageData", "analyze", "capacity", "components_of", "endpoint_list",
    "endpoint_residual",
    "green_function", "outer_critical_points", "polynomial_from_endpoints", "solve_endpoints",
    "zero_counts",
    "IterationTrace", "LemniscaticData", "centers_double_symmetry_two", "centers_iterative",
    "centers_three_double_symmetry", "centers_two_components", "classify_symmetry",
    "lemniscatic_data", "q_critical_points", "q_poly", "validate_centers",
    "GridSpec", "MapContext", "make_context", "map_grid", "phi", "phi_inverse", "trace_boundary",
    "ConvergenceError", "LemniscateError", "OnSetError", "ValidationError",
]
