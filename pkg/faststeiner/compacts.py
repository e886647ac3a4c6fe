"""Planar compact sets and the Hausdorff-distance primitives over them.

A compact is one of three things:

- :class:`FiniteCompact`, a finite point set (distances are exact);
- :class:`PolygonCompact`, a closed simple filled polygon, or a segment when it has two vertices;
- :class:`RasterCompact`, the occupied cell centers of a :class:`GridSpec`.

Raster results carry the tolerance ``grid.tol = cell·√2``. Closed neighborhoods round
outward (a cell joins when its center is within ``r + tol/2``), so they never under-cover.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np
import shapely
from numpy.typing import ArrayLike, NDArray
from scipy.ndimage import distance_transform_edt
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from shapely.geometry import LineString, Polygon, box

from faststeiner.core import CoverageError, GridMismatchError, ParseError, PreconditionError

__all__ = ["Point2", "Bounds", "GridSpec", "FiniteCompact", "PolygonCompact", "RasterCompact", "Empty", "DistanceField",
           "Compact", "point_to_set_distance", "points_to_set_distance", "directed_distance", "hausdorff_distance",
           "distance_method", "hausdorff_by_neighborhoods", "distance_transform", "distance_field",
           "closed_neighborhood", "intersect", "rasterize", "included", "convexity_defect", "bounds_of",
           "probe_points", "grid_around"]

_logger = logging.getLogger("faststeiner")

Point2 = tuple[float, float]
Bounds = tuple[float, float, float, float]

DEFAULT_N = 512
# Beyond this many sites the exact Voronoi clipping gets slow; we rasterize instead.
_VORONOI_LIMIT = 256
# Cells whose centers sit exactly on a threshold must not flicker out through rounding.
_EPS = 1e-9


def _as_points(data: ArrayLike, what: str) -> NDArray[np.float64]:
    "Coerce ``data`` to an (m, 2) float array of finite coordinates."
    try: pts = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as e: raise ParseError(f"{what}: coordinates are not numbers ({e})")
    if pts.ndim == 1 and pts.size == 2: pts = pts.reshape(1, 2)
    if pts.ndim != 2 or pts.shape[1] != 2: raise ParseError(f"{what}: expected (x, y) pairs, got shape {pts.shape}")
    if len(pts) == 0: raise ParseError(f"{what}: a compact must be nonempty")
    if not np.isfinite(pts).all(): raise ParseError(f"{what}: coordinates must be finite")
    return pts


def _frozen(a: NDArray) -> NDArray:
    a.flags.writeable = False
    return a


def _box_of(pts: NDArray[np.float64]) -> Bounds:
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned grid of ``nx × ny`` square cells.

    Cell ``(i, j)`` has its center at ``min_corner + ((i + ½)·cell, (j + ½)·cell)``; masks and
    fields are indexed ``[i, j]``.
    """
    min_corner: Point2
    cell: float
    nx: int
    ny: int

    def __post_init__(self) -> None:
        corner = tuple(float(v) for v in self.min_corner)
        if len(corner) != 2 or not all(math.isfinite(v) for v in corner): raise ParseError(f"grid corner must be two finite numbers, got {self.min_corner}")
        if not (math.isfinite(self.cell) and self.cell > 0): raise ParseError(f"grid cell must be > 0, got {self.cell}")
        if int(self.nx) < 1 or int(self.ny) < 1: raise ParseError(f"grid needs nx, ny >= 1, got {self.nx}x{self.ny}")
        object.__setattr__(self, "min_corner", corner)
        object.__setattr__(self, "cell", float(self.cell))
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))

    @classmethod
    def from_bounds(cls, bounds: Bounds, n: int = DEFAULT_N, pad: float = 0.0) -> "GridSpec":
        "Square-celled grid with ``n`` cells along the longer side of ``bounds`` grown by ``pad``."
        xmin, ymin, xmax, ymax = bounds
        w, h = xmax - xmin + 2 * pad, ymax - ymin + 2 * pad
        side = max(w, h)
        if side <= 0: side = w = h = 1.0
        cell = side / n
        nx = max(1, math.ceil(w / cell - _EPS))
        ny = max(1, math.ceil(h / cell - _EPS))
        cx, cy = (xmin + xmax) / 2, (ymin + ymax) / 2
        return cls((cx - nx * cell / 2, cy - ny * cell / 2), cell, nx, ny)

    @property
    def tol(self) -> float:
        "Worst-case rasterization error, the cell diagonal."
        return self.cell * math.sqrt(2)

    @property
    def shape(self) -> tuple[int, int]: return (self.nx, self.ny)

    @property
    def bounds(self) -> Bounds:
        x0, y0 = self.min_corner
        return (x0, y0, x0 + self.nx * self.cell, y0 + self.ny * self.cell)

    @cached_property
    def axes(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        x0, y0 = self.min_corner
        return (_frozen(x0 + (np.arange(self.nx) + 0.5) * self.cell), _frozen(y0 + (np.arange(self.ny) + 0.5) * self.cell))

    @cached_property
    def centers(self) -> NDArray[np.float64]:
        "All cell centers as an ``(nx·ny, 2)`` array in mask order."
        xs, ys = self.axes
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return _frozen(np.column_stack([X.ravel(), Y.ravel()]))

    def points_of(self, mask: NDArray[np.bool_]) -> NDArray[np.float64]:
        "Centers of the cells set in ``mask``."
        i, j = np.nonzero(mask)
        xs, ys = self.axes
        return np.column_stack([xs[i], ys[j]])

    def covers(self, bounds: Bounds) -> bool:
        gx0, gy0, gx1, gy1 = self.bounds
        slack = _EPS * max(1.0, abs(gx0), abs(gy0), abs(gx1), abs(gy1))
        xmin, ymin, xmax, ymax = bounds
        return xmin >= gx0 - slack and ymin >= gy0 - slack and xmax <= gx1 + slack and ymax <= gy1 + slack

    def require(self, bounds: Bounds, what: str) -> None:
        "Raise :class:`CoverageError` unless the grid spans ``bounds``."
        if not self.covers(bounds):
            gx0, gy0, gx1, gy1 = self.bounds
            need = (min(bounds[0], gx0), min(bounds[1], gy0), max(bounds[2], gx1), max(bounds[3], gy1))
            raise CoverageError(f"grid {self.nx}x{self.ny} does not cover {what}", need)

    def to_dict(self) -> dict:
        return {"min_corner": list(self.min_corner), "cell": self.cell, "nx": self.nx, "ny": self.ny}


@dataclass(frozen=True, eq=False)
class FiniteCompact:
    "A nonempty finite point set, deduplicated exactly and stored in lexicographic (x, y) order."
    points: NDArray[np.float64]

    def __post_init__(self) -> None:
        pts = np.unique(_as_points(self.points, "finite compact"), axis=0)
        object.__setattr__(self, "points", _frozen(pts))

    def __len__(self) -> int: return len(self.points)

    def __repr__(self) -> str: return f"FiniteCompact({self.points.tolist()})"

    @property
    def bounds(self) -> Bounds: return _box_of(self.points)

    @cached_property
    def tree(self) -> cKDTree: return cKDTree(self.points)

    def same_set(self, other: "FiniteCompact") -> bool:
        return self.points.shape == other.points.shape and bool(np.array_equal(self.points, other.points))

    def union(self, other: "FiniteCompact | ArrayLike") -> "FiniteCompact":
        extra = other.points if isinstance(other, FiniteCompact) else _as_points(other, "finite compact")
        return FiniteCompact(np.vstack([self.points, extra]))


@dataclass(frozen=True, eq=False)
class PolygonCompact:
    """A closed simple filled polygon, or a segment when given exactly two vertices.

    A repeated closing vertex is dropped. Self-intersecting loops, zero-area loops and
    zero-length segments are rejected with :class:`ParseError`.
    """
    vertices: NDArray[np.float64]

    def __post_init__(self) -> None:
        pts = _as_points(self.vertices, "polygon")
        if len(pts) > 2 and np.array_equal(pts[0], pts[-1]): pts = pts[:-1]
        if len(pts) < 2: raise ParseError("polygon: need at least two vertices")
        if len(pts) == 2:
            if np.array_equal(pts[0], pts[1]): raise ParseError("segment: endpoints coincide")
        else:
            geom = Polygon(pts)
            if not geom.is_valid or geom.area <= 0: raise ParseError(f"polygon: loop is not simple or has no area ({shapely.is_valid_reason(geom)})")
        object.__setattr__(self, "vertices", _frozen(pts))

    def __repr__(self) -> str:
        kind = "segment" if self.is_segment else "polygon"
        return f"PolygonCompact({kind}, {self.vertices.tolist()})"

    @property
    def is_segment(self) -> bool: return len(self.vertices) == 2

    @cached_property
    def geometry(self) -> LineString | Polygon:
        return LineString(self.vertices) if self.is_segment else Polygon(self.vertices)

    @cached_property
    def convex(self) -> bool:
        if self.is_segment: return True
        geom = self.geometry
        return bool(geom.convex_hull.area - geom.area <= 1e-12 * geom.area)

    @property
    def bounds(self) -> Bounds: return _box_of(self.vertices)


@dataclass(frozen=True, eq=False)
class RasterCompact:
    "The set of occupied cell centers of ``grid``; ``mask`` is ``nx × ny`` and has at least one cell set."
    grid: GridSpec
    mask: NDArray[np.bool_]

    def __post_init__(self) -> None:
        mask = np.array(self.mask, dtype=bool)
        if mask.shape != self.grid.shape: raise GridMismatchError(f"mask shape {mask.shape} does not match grid {self.grid.shape}")
        if not mask.any(): raise ParseError("raster compact: no cell is occupied")
        object.__setattr__(self, "mask", _frozen(mask))

    def __repr__(self) -> str: return f"RasterCompact({self.count} cells on {self.grid.nx}x{self.grid.ny})"

    @property
    def count(self) -> int: return int(self.mask.sum())

    @property
    def area(self) -> float: return self.count * self.grid.cell ** 2

    @cached_property
    def points(self) -> NDArray[np.float64]: return _frozen(self.grid.points_of(self.mask))

    @cached_property
    def tree(self) -> cKDTree: return cKDTree(self.points)

    @property
    def bounds(self) -> Bounds: return _box_of(self.points)

    def as_finite(self) -> FiniteCompact: return FiniteCompact(self.points)


@dataclass(frozen=True)
class Empty:
    "An intersection that no cell survives. Falsy, so ``if K:`` reads naturally."
    grid: GridSpec

    def __bool__(self) -> bool: return False


@dataclass(frozen=True, eq=False)
class DistanceField:
    "Distance from each cell center of ``grid`` to a source set."
    grid: GridSpec
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape: raise GridMismatchError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        if (values < 0).any(): raise ValueError("distance field has negative values")
        object.__setattr__(self, "values", _frozen(values))


Compact = Union[FiniteCompact, PolygonCompact, RasterCompact]


def bounds_of(K: Compact) -> Bounds: return K.bounds


def _same_grid(a: GridSpec, b: GridSpec) -> None:
    if a != b: raise GridMismatchError(f"raster operands live on different grids: {a} vs {b}")


def _is_convex(K: Compact) -> bool:
    if isinstance(K, FiniteCompact): return len(K) == 1
    if isinstance(K, PolygonCompact): return K.convex
    return False


def points_to_set_distance(P: ArrayLike, K: Compact) -> NDArray[np.float64]:
    "Distance from each row of ``P`` to ``K``: nearest point, nearest cell center, or the polygon region (0 inside)."
    P = np.asarray(P, dtype=np.float64).reshape(-1, 2)
    if isinstance(K, (FiniteCompact, RasterCompact)): return K.tree.query(P)[0]
    return np.asarray(shapely.distance(K.geometry, shapely.points(P)), dtype=np.float64)


def point_to_set_distance(p: Point2, K: Compact) -> float:
    "ρ(p, K) = inf over K of |p·|; exact for finite and polygon compacts, over cell centers for rasters."
    pt = _as_points(p, "point")
    if len(pt) != 1: raise ValueError(f"expected a single point, got {len(pt)}")
    return float(points_to_set_distance(pt, K)[0])


def _farthest_from_sites(geom: LineString | Polygon, sites: NDArray[np.float64]) -> float:
    """sup over ``geom`` of the distance to the nearest site.

    Each site's Voronoi cell is clipped to ``geom``; |x - site| is convex, so its maximum over
    a clipped piece sits at one of the piece's vertices.
    """
    if len(sites) == 1: return float(np.hypot(*(shapely.get_coordinates(geom) - sites[0]).T).max())
    xmin, ymin, xmax, ymax = geom.bounds
    xmin, ymin = min(xmin, sites[:, 0].min()), min(ymin, sites[:, 1].min())
    xmax, ymax = max(xmax, sites[:, 0].max()), max(ymax, sites[:, 1].max())
    reach = 4 * (math.hypot(xmax - xmin, ymax - ymin) + 1)
    frame = box(xmin - reach, ymin - reach, xmax + reach, ymax + reach)
    best = 0.0
    for i, s in enumerate(sites):
        cell = frame
        for j, t in enumerate(sites):
            if i == j: continue
            cell = cell.intersection(_halfplane(s, t, 4 * reach))
            if cell.is_empty: break
        piece = geom.intersection(cell)
        if piece.is_empty: continue
        coords = shapely.get_coordinates(piece)
        best = max(best, float(np.hypot(*(coords - s).T).max()))
    return best


def _halfplane(s: NDArray, t: NDArray, reach: float) -> Polygon:
    "The side of the bisector of ``s`` and ``t`` that contains ``s``, as a large rectangle."
    u = (t - s) / math.hypot(*(t - s))
    v = np.array([-u[1], u[0]])
    m = (s + t) / 2
    return Polygon([m + v * reach, m + v * reach - u * reach, m - v * reach - u * reach, m - v * reach])


def _directed(A: Compact, B: Compact, grid: GridSpec | None) -> tuple[float, bool]:
    "sup_{a∈A} ρ(a, B), and whether the value is exact (False: within ``tol`` of a raster)."
    if isinstance(A, RasterCompact) and isinstance(B, RasterCompact):
        _same_grid(A.grid, B.grid)
        return float(distance_transform(B).values[A.mask].max()), True
    if isinstance(A, (FiniteCompact, RasterCompact)): return float(points_to_set_distance(A.points, B).max()), True
    if _is_convex(B): return float(points_to_set_distance(A.vertices, B).max()), True
    if isinstance(B, FiniteCompact) and len(B) <= _VORONOI_LIMIT: return _farthest_from_sites(A.geometry, B.points), True
    g = grid or (B.grid if isinstance(B, RasterCompact) else grid_around(A, B))
    probes = probe_points(A, g)
    return float(points_to_set_distance(probes, B).max()), False


def directed_distance(A: Compact, B: Compact, grid: GridSpec | None = None) -> float:
    "One-sided Hausdorff supremum sup_{a∈A} ρ(a, B)."
    return _directed(A, B, grid)[0]


def _hausdorff(A: Compact, B: Compact, grid: GridSpec | None) -> tuple[float, bool]:
    if isinstance(A, FiniteCompact) and isinstance(B, FiniteCompact) and len(A) * len(B) <= 4_000_000:
        D = cdist(A.points, B.points)
        return float(max(D.min(axis=1).max(), D.min(axis=0).max())), True
    ab, exact_ab = _directed(A, B, grid)
    ba, exact_ba = _directed(B, A, grid)
    return max(ab, ba), exact_ab and exact_ba


def hausdorff_distance(A: Compact, B: Compact, grid: GridSpec | None = None) -> float:
    """d_H(A, B) = max(sup_{a∈A} ρ(a, B), sup_{b∈B} ρ(b, A)).

    Finite pairs are exact. Polygon/segment sides are exact against convex or finite
    partners; the remaining combinations rasterize on ``grid`` (or a default grid around
    both sets) and are within ``grid.tol``. Two rasters must share a grid.
    """
    return _hausdorff(A, B, grid)[0]


def distance_method(A: Compact, B: Compact, grid: GridSpec | None = None) -> str:
    "``'exact'`` or ``'raster'``: the path :func:`hausdorff_distance` takes for this pair."
    return "exact" if _hausdorff(A, B, grid)[1] else "raster"


def distance_transform(sources: RasterCompact) -> DistanceField:
    "Exact Euclidean distance from every cell center to the nearest occupied cell center."
    g = sources.grid
    return DistanceField(g, distance_transform_edt(~sources.mask, sampling=g.cell))


def distance_field(K: Compact, grid: GridSpec) -> DistanceField:
    "ρ(center, K) for every cell of ``grid``: point queries for finite/polygon sets, the distance transform for rasters."
    if isinstance(K, RasterCompact):
        _same_grid(K.grid, grid)
        return distance_transform(K)
    return DistanceField(grid, points_to_set_distance(grid.centers, K).reshape(grid.shape))


def _threshold(r: float, grid: GridSpec) -> float: return r + grid.tol / 2 + _EPS * grid.cell


def closed_neighborhood(K: Compact, r: float, grid: GridSpec) -> RasterCompact:
    "B_r(K) on ``grid``: cells whose center lies within ``r + tol/2`` of K."
    if not (math.isfinite(r) and r >= 0): raise PreconditionError(f"neighborhood radius must be finite and >= 0, got {r}")
    xmin, ymin, xmax, ymax = K.bounds
    grid.require((xmin - r, ymin - r, xmax + r, ymax + r), f"the {r:.6g}-neighborhood")
    return RasterCompact(grid, distance_field(K, grid).values <= _threshold(r, grid))


def intersect(Ks: Sequence[RasterCompact]) -> RasterCompact | Empty:
    "Cellwise intersection; :class:`Empty` when no cell survives."
    if not Ks: raise PreconditionError("intersect needs at least one raster compact")
    grid = Ks[0].grid
    for K in Ks[1:]: _same_grid(grid, K.grid)
    mask = np.logical_and.reduce([K.mask for K in Ks])
    return RasterCompact(grid, mask) if mask.any() else Empty(grid)


def rasterize(K: Compact, grid: GridSpec) -> RasterCompact:
    """Cells of ``grid`` that represent K.

    Points and segments take the cells whose centers are within ``tol/2``; filled polygons
    take the centers inside (boundary included), or the ``tol/2`` rule when no center is inside.
    """
    if isinstance(K, RasterCompact):
        _same_grid(K.grid, grid)
        return K
    grid.require(K.bounds, "the compact")
    if isinstance(K, PolygonCompact) and not K.is_segment:
        X, Y = grid.centers[:, 0], grid.centers[:, 1]
        inside = shapely.intersects_xy(K.geometry, X, Y).reshape(grid.shape)
        if inside.any(): return RasterCompact(grid, inside)
        _logger.debug(f"rasterize=sliver vertices={len(K.vertices)} cell={grid.cell:.6g}")
    return RasterCompact(grid, distance_field(K, grid).values <= _threshold(0.0, grid))


def probe_points(K: Compact, grid: GridSpec) -> NDArray[np.float64]:
    """Points standing in for K when a supremum over K has to be sampled.

    Finite and raster compacts are their own points. Polygons and segments contribute their
    vertices, their boundary split at cell spacing, and their rasterization on ``grid``.
    """
    if isinstance(K, (FiniteCompact, RasterCompact)): return K.points
    boundary = K.geometry if K.is_segment else K.geometry.exterior
    edge = shapely.get_coordinates(shapely.segmentize(boundary, grid.cell))
    inner = rasterize(K, grid).points if grid.covers(K.bounds) else np.empty((0, 2))
    return np.vstack([K.vertices, edge, inner])


def grid_around(*Ks: Compact, n: int = DEFAULT_N, pad: float = 0.0) -> GridSpec:
    "A grid spanning every compact in ``Ks`` plus ``pad``, with a few spare cells on each side."
    boxes = np.array([K.bounds for K in Ks])
    bounds = (boxes[:, 0].min(), boxes[:, 1].min(), boxes[:, 2].max(), boxes[:, 3].max())
    side = max(bounds[2] - bounds[0], bounds[3] - bounds[1]) + 2 * pad
    spare = 2 * (side if side > 0 else 1.0) / n
    return GridSpec.from_bounds(bounds, n, pad + spare)


def included(K: Compact, sup: Compact, tol: float, grid: GridSpec | None = None) -> bool:
    "Tolerance inclusion K ⊆ sup: every point of K lies within ``tol`` of ``sup``."
    return directed_distance(K, sup, grid) <= tol


def hausdorff_by_neighborhoods(A: Compact, B: Compact, grid: GridSpec) -> float:
    """d_H in its infimum form, inf{r : B ⊆ B_r(A) and A ⊆ B_r(B)}, over raster neighborhoods.

    A cell joins B_r(K) when its center is within ``r + tol/2``, so the smallest admissible r
    is read off the two distance fields. Agrees with :func:`hausdorff_distance` within ``tol``.
    """
    ra, rb = rasterize(A, grid), rasterize(B, grid)
    fa, fb = distance_field(A, grid).values, distance_field(B, grid).values
    need = max(float(fa[rb.mask].max()), float(fb[ra.mask].max()))
    return max(0.0, need - grid.tol / 2)


def convexity_defect(R: RasterCompact, pairs: int = 500, rng: np.random.Generator | None = None) -> float:
    """Largest distance from the midpoint of a random pair of occupied cells to R.

    Convex sets stay within ``tol``; a clearly larger value shows R is not convex.
    """
    rng = rng or np.random.default_rng(0)
    pts = R.points
    if len(pts) < 2: return 0.0
    i, j = rng.integers(0, len(pts), size=(2, pairs))
    mid = (pts[i] + pts[j]) / 2
    return float(R.tree.query(mid)[0].max())
