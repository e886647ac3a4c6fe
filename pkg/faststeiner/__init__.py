"faststeiner - Fermat-Steiner problems in the hyperspace of planar compact sets."
__version__ = "0.1.0"

from faststeiner.core import (setup_logging, FastSteinerError, ParseError, CoverageError, GridMismatchError, NoSolutionError,
                              ValidationError, PreconditionError)
from faststeiner.compacts import (GridSpec, FiniteCompact, PolygonCompact, RasterCompact, Empty, DistanceField,
                                  point_to_set_distance, directed_distance, hausdorff_distance, distance_transform,
                                  distance_field, closed_neighborhood, intersect, rasterize, included)
from faststeiner.structure import (Boundary, SteinerSolution, StructureReport, objective, maximal_compact, profile_check,
                                   minimal_prune, verify_structure)
from faststeiner.solver import (SolverConfig, SolveTrace, solve_single_point, solve_dvector, polish_finite, minimal_solution,
                                enumerate_classes)
from faststeiner.triangle import TriangleInstance, solve_t0, cross_validate

__all__ = ["setup_logging", "FastSteinerError", "ParseError", "CoverageError", "GridMismatchError", "NoSolutionError",
           "ValidationError", "PreconditionError", "GridSpec", "FiniteCompact", "PolygonCompact", "RasterCompact", "Empty",
           "DistanceField", "point_to_set_distance", "directed_distance", "hausdorff_distance", "distance_transform",
           "distance_field", "closed_neighborhood", "intersect", "rasterize", "included", "Boundary", "SteinerSolution",
           "StructureReport", "objective", "maximal_compact", "profile_check", "minimal_prune", "verify_structure",
           "SolverConfig", "SolveTrace", "solve_single_point", "solve_dvector", "polish_finite", "minimal_solution",
           "enumerate_classes", "TriangleInstance", "solve_t0", "cross_validate"]
