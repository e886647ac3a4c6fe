"""The Fermat–Steiner objective over compacts, maximal compacts K_d, pruning and the sandwich check.

For a boundary 𝒜 = (A₁, …, Aₙ) the objective of a compact K is S(K) = Σᵢ d_H(K, Aᵢ), and its
profile is the vector of those distances. Every compact whose profile is d lies inside the
maximal compact K_d = ∩ᵢ B_{dᵢ}(Aᵢ) and contains some minimal one.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterator, Literal, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import cdist, pdist

from faststeiner.compacts import (Compact, Empty, FiniteCompact, GridSpec, PolygonCompact, RasterCompact,
                                  closed_neighborhood, grid_around, hausdorff_distance, included, intersect,
                                  points_to_set_distance, probe_points)
from faststeiner.core import GridMismatchError, ParseError, PreconditionError, ValidationError

__all__ = ["Boundary", "DistanceVector", "SteinerSolution", "StructureReport", "objective", "maximal_compact",
           "profile_check", "minimal_prune", "verify_structure"]

_logger = logging.getLogger("faststeiner")

DistanceVector = tuple[float, ...]
Kind = Literal["candidate", "maximal", "minimal"]
KINDS = ("candidate", "maximal", "minimal")


def _extreme_points(K: Compact) -> NDArray[np.float64]:
    return K.vertices if isinstance(K, PolygonCompact) else K.points


@dataclass(frozen=True, eq=False)
class Boundary:
    "An ordered, nonempty family A₁…Aₙ of compacts. Raster members must share one grid."
    compacts: tuple[Compact, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        compacts = tuple(self.compacts)
        if not compacts: raise ParseError("a boundary needs at least one compact")
        names = tuple(self.names) or tuple(f"A{i+1}" for i in range(len(compacts)))
        if len(names) != len(compacts): raise ParseError(f"{len(names)} names for {len(compacts)} compacts")
        grids = {K.grid for K in compacts if isinstance(K, RasterCompact)}
        if len(grids) > 1: raise GridMismatchError("raster boundary members live on different grids")
        object.__setattr__(self, "compacts", compacts)
        object.__setattr__(self, "names", names)

    def __len__(self) -> int: return len(self.compacts)

    def __iter__(self) -> Iterator[Compact]: return iter(self.compacts)

    def __getitem__(self, i: int) -> Compact: return self.compacts[i]

    @cached_property
    def points(self) -> NDArray[np.float64]:
        "Finite points, polygon vertices and raster cells of every member, deduplicated."
        return np.unique(np.vstack([_extreme_points(K) for K in self.compacts]), axis=0)

    @cached_property
    def diameter(self) -> float:
        "Diameter of the union of the members."
        pts = self.points
        if len(pts) < 2: return 0.0
        if len(pts) > 2000:
            try: pts = pts[ConvexHull(pts).vertices]
            except QhullError: return float(np.hypot(*(pts[-1] - pts[0])))  # collinear: lexicographic extremes
        return float(pdist(pts).max())

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        lo, hi = self.points.min(axis=0), self.points.max(axis=0)
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    @property
    def grid(self) -> GridSpec | None:
        "The raster members' shared grid, if any member is a raster."
        return next((K.grid for K in self.compacts if isinstance(K, RasterCompact)), None)


@dataclass(frozen=True, eq=False)
class SteinerSolution:
    "A compact with its realized profile and objective value; ``tolerance`` is the grid resolution behind it."
    K: Compact
    profile: DistanceVector
    value: float
    kind: Kind
    tolerance: float
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS: raise ValueError(f"unknown solution kind {self.kind!r}")
        profile = tuple(float(v) for v in self.profile)
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "value", float(self.value))
        if abs(self.value - math.fsum(profile)) > 1e-12: raise ValidationError(f"value {self.value!r} is not the profile sum {math.fsum(profile)!r}")

    @classmethod
    def of(cls, K: Compact, boundary: Boundary, kind: Kind, tolerance: float, grid: GridSpec | None = None,
           **provenance: Any) -> "SteinerSolution":
        "Evaluate K against ``boundary`` and wrap the result."
        value, profile = objective(K, boundary, grid)
        return cls(K, profile, value, kind, tolerance, dict(provenance))


@dataclass
class StructureReport:
    "Outcome of :func:`verify_structure`; ``failures`` names each clause that did not hold."
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool: return not self.failures

    def __str__(self) -> str: return "ok" if self.ok else "\n".join(self.failures)


def _check_d(boundary: Boundary, d: Sequence[float]) -> DistanceVector:
    d = tuple(float(v) for v in d)
    if len(d) != len(boundary): raise PreconditionError(f"distance vector has {len(d)} entries for {len(boundary)} compacts")
    if not all(math.isfinite(v) and v >= 0 for v in d): raise PreconditionError(f"distance vector entries must be finite and >= 0: {d}")
    return d


def objective(K: Compact, boundary: Boundary, grid: GridSpec | None = None) -> tuple[float, DistanceVector]:
    "S(K) = Σᵢ d_H(K, Aᵢ), with the profile it sums."
    profile = tuple(hausdorff_distance(K, A, grid) for A in boundary)
    return math.fsum(profile), profile


def maximal_compact(boundary: Boundary, d: Sequence[float], grid: GridSpec) -> RasterCompact | Empty:
    "K_d = ∩ᵢ B_{dᵢ}(Aᵢ) on ``grid``; :class:`Empty` when d is infeasible at this resolution."
    d = _check_d(boundary, d)
    K = intersect([closed_neighborhood(A, r, grid) for A, r in zip(boundary, d)])
    _logger.debug(f"maximal_compact d={d} cells={K.count if K else 0}")
    return K


def profile_check(boundary: Boundary, d: Sequence[float], K: Compact, tol: float, grid: GridSpec | None = None) -> bool:
    "Whether |d_H(K, Aᵢ) − dᵢ| ≤ tol for every i."
    d = _check_d(boundary, d)
    return all(abs(hausdorff_distance(K, A, grid) - r) <= tol for A, r in zip(boundary, d))


class _Pruner:
    "Profiles of subsets of a finite K, read off precomputed point-to-point distance tables."
    def __init__(self, K: FiniteCompact, boundary: Boundary, grid: GridSpec):
        pts = K.points
        # to_set[i, k] = ρ(k, Aᵢ); to_probe[i][p, k] = |probe_p(Aᵢ) - k|
        self.to_set = np.vstack([points_to_set_distance(pts, A) for A in boundary])
        self.to_probe = [cdist(probe_points(A, grid), pts) for A in boundary]

    def profile(self, alive: NDArray[np.bool_]) -> NDArray[np.float64]:
        out = self.to_set[:, alive].max(axis=1)
        back = np.array([D[:, alive].min(axis=1).max() for D in self.to_probe])
        return np.maximum(out, back)


def minimal_prune(K: FiniteCompact, boundary: Boundary, d: Sequence[float], tol: float,
                  grid: GridSpec | None = None) -> FiniteCompact:
    """Drop points of K, in lexicographic order, while the profile stays within ``tol`` of d.

    Passes repeat until none removes a point, so the result is a fixed point: no single
    point can be removed any more. ``grid`` only matters for polygon members, whose suprema
    are sampled on it.
    """
    d = _check_d(boundary, d)
    if not profile_check(boundary, d, K, tol, grid): raise PreconditionError("minimal_prune: K does not have profile d within tol")
    pruner = _Pruner(K, boundary, grid or grid_around(K, *boundary))
    target = np.array(d)
    alive = np.ones(len(K), dtype=bool)
    passes, changed = 0, True
    while changed:
        changed, passes = False, passes + 1
        for k in np.flatnonzero(alive):
            if alive.sum() == 1: break
            alive[k] = False
            if np.all(np.abs(pruner.profile(alive) - target) <= tol): changed = True
            else: alive[k] = True
    _logger.debug(f"minimal_prune points={len(K)} kept={int(alive.sum())} passes={passes}")
    return FiniteCompact(K.points[alive])


def verify_structure(K: Compact, K_min: Compact, K_max: Compact, boundary: Boundary, d: Sequence[float], tol: float,
                     grid: GridSpec | None = None) -> StructureReport:
    "Check K_min ⊆ K ⊆ K_max up to ``tol`` and that all three have profile d within ``tol``."
    d = _check_d(boundary, d)
    report = StructureReport()
    if not included(K_min, K, tol, grid): report.failures.append("K_min is not contained in K")
    if not included(K, K_max, tol, grid): report.failures.append("K is not contained in K_max")
    for label, C in (("K_min", K_min), ("K", K), ("K_max", K_max)):
        if not profile_check(boundary, d, C, tol, grid):
            _, profile = objective(C, boundary, grid)
            report.failures.append(f"{label} profile {tuple(round(v, 9) for v in profile)} differs from d={d} beyond tol={tol:.3g}")
    return report
