"""Tests for compacts and Hausdorff distances."""

import math

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from faststeiner.compacts import (Empty, FiniteCompact, GridSpec, PolygonCompact, RasterCompact, closed_neighborhood,
                                  convexity_defect, directed_distance, distance_field, distance_method, distance_transform,
                                  grid_around, hausdorff_by_neighborhoods, hausdorff_distance, included, intersect,
                                  point_to_set_distance, points_to_set_distance, rasterize)
from faststeiner.core import CoverageError, GridMismatchError, ParseError, PreconditionError


def _random_finite(rng, lo=1, hi=8):
    return FiniteCompact(rng.uniform(-5, 5, size=(int(rng.integers(lo, hi + 1)), 2)))


def _unit_grid(n=64, half=2.0):
    return GridSpec((-half, -half), 2 * half / n, n, n)


def test_point_to_set_distance_examples():
    """Distances from a point to each kind of compact."""
    assert point_to_set_distance((0, 0), FiniteCompact([[3, 4]])) == 5.0
    square = PolygonCompact([[0, 0], [1, 0], [1, 1], [0, 1]])
    assert point_to_set_distance((0.5, 0.5), square) == 0.0
    assert point_to_set_distance((2, 0.5), square) == pytest.approx(1.0, abs=1e-12)
    segment = PolygonCompact([[0, 0], [2, 0]])
    assert point_to_set_distance((1, 3), segment) == pytest.approx(3.0, abs=1e-12)


def test_finite_compact_is_deduplicated_and_sorted():
    """Points are deduplicated exactly and kept in (x, y) order."""
    K = FiniteCompact([[1, 0], [0, 5], [1, 0], [0, 1]])
    assert K.points.tolist() == [[0, 1], [0, 5], [1, 0]]
    assert len(K) == 3
    assert not K.points.flags.writeable


@pytest.mark.parametrize("data", [[], [[0, math.nan]], [[0, math.inf]], [[1, 2, 3]], "abc"])
def test_finite_compact_rejects_bad_points(data):
    """Empty or non-finite point sets do not parse."""
    with pytest.raises(ParseError): FiniteCompact(data)


def test_polygon_validation():
    """Self-intersecting loops, zero-area loops and zero-length segments are rejected."""
    with pytest.raises(ParseError): PolygonCompact([[0, 0], [1, 1], [1, 0], [0, 1]])
    with pytest.raises(ParseError): PolygonCompact([[0, 0], [1, 0], [2, 0]])
    with pytest.raises(ParseError): PolygonCompact([[1, 1], [1, 1]])
    with pytest.raises(ParseError): PolygonCompact([[1, 1]])
    tri = PolygonCompact([[0, 0], [1, 0], [0, 1], [0, 0]])
    assert len(tri.vertices) == 3 and tri.convex and not tri.is_segment
    L = PolygonCompact([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]])
    assert not L.convex


def test_hausdorff_finite_examples():
    """Exact values on small finite sets."""
    assert hausdorff_distance(FiniteCompact([[0, 0]]), FiniteCompact([[3, 4]])) == 5.0
    assert hausdorff_distance(FiniteCompact([[0, 0]]), FiniteCompact([[0, 0], [1, 0]])) == 1.0
    A = FiniteCompact([[0, 0], [1, 0]])
    assert hausdorff_distance(A, A) == 0.0
    assert distance_method(A, FiniteCompact([[3, 4]])) == "exact"


def test_metric_axioms_on_random_triples():
    """Symmetry (exact), identity and the triangle inequality on 1000 random finite triples."""
    rng = np.random.default_rng(20240601)
    for _ in range(1000):
        A, B, C = _random_finite(rng), _random_finite(rng), _random_finite(rng)
        ab, ba = hausdorff_distance(A, B), hausdorff_distance(B, A)
        assert ab == ba
        assert hausdorff_distance(A, A) == 0.0
        assert ab > 0 or A.same_set(B)
        assert ab <= hausdorff_distance(A, C) + hausdorff_distance(C, B) + 1e-12


def test_point_estimate_and_ball_inclusion():
    """|ρ(x,A) − ρ(x,B)| ≤ d_H(A,B), and each set lies in the d_H-neighborhood of the other."""
    rng = np.random.default_rng(7)
    for _ in range(200):
        A, B = _random_finite(rng), _random_finite(rng)
        d = hausdorff_distance(A, B)
        X = rng.uniform(-8, 8, size=(20, 2))
        gap = np.abs(points_to_set_distance(X, A) - points_to_set_distance(X, B))
        assert (gap <= d + 1e-12).all()
        assert (points_to_set_distance(B.points, A) <= d + 1e-12).all()
        assert (points_to_set_distance(A.points, B) <= d + 1e-12).all()


def test_intermediate_sets_stay_within_bound():
    """For A ⊂ B ⊂ C, d_H(B, D) never exceeds max(d_H(A, D), d_H(C, D)), on 200 constructed cases."""
    rng = np.random.default_rng(11)
    for _ in range(200):
        C_pts = rng.uniform(-3, 3, size=(int(rng.integers(3, 12)), 2))
        nb = int(rng.integers(2, len(C_pts) + 1))
        B_pts = C_pts[:nb]
        A_pts = B_pts[:int(rng.integers(1, nb + 1))]
        A, B, C, D = FiniteCompact(A_pts), FiniteCompact(B_pts), FiniteCompact(C_pts), _random_finite(rng)
        d = max(hausdorff_distance(A, D), hausdorff_distance(C, D))
        assert hausdorff_distance(B, D) <= d + 1e-12


def test_nested_segments_against_parallel_segment():
    """Nested segments A ⊂ B ⊂ C and a parallel D: the middle one is strictly closer."""
    A, B, C = PolygonCompact([[1, 0], [3, 0]]), PolygonCompact([[0, 0], [4, 0]]), PolygonCompact([[-1, 0], [5, 0]])
    D = PolygonCompact([[0, 1], [4, 1]])
    assert hausdorff_distance(A, D) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert hausdorff_distance(C, D) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert hausdorff_distance(B, D) == pytest.approx(1.0, abs=1e-12)
    assert distance_method(B, D) == "exact"
    # samples every 0.01 along the segments give the same values
    def sampled(x0, x1, y):
        xs = np.linspace(x0, x1, round((x1 - x0) * 100) + 1)
        return FiniteCompact(np.column_stack([xs, np.full_like(xs, y)]))
    sA, sB, sC, sD = sampled(1, 3, 0), sampled(0, 4, 0), sampled(-1, 5, 0), sampled(0, 4, 1)
    assert hausdorff_distance(sA, sD) == pytest.approx(math.sqrt(2), abs=1e-9)
    assert hausdorff_distance(sC, sD) == pytest.approx(math.sqrt(2), abs=1e-9)
    assert hausdorff_distance(sB, sD) == pytest.approx(1.0, abs=1e-9)


def test_nested_segments_on_a_raster():
    """The same configuration rasterized agrees within the grid tolerance."""
    grid = GridSpec((-2, -2), 8 / 200, 200, 100)
    B, D = rasterize(PolygonCompact([[0, 0], [4, 0]]), grid), rasterize(PolygonCompact([[0, 1], [4, 1]]), grid)
    A = rasterize(PolygonCompact([[1, 0], [3, 0]]), grid)
    assert hausdorff_distance(B, D) == pytest.approx(1.0, abs=grid.tol)
    assert hausdorff_distance(A, D) == pytest.approx(math.sqrt(2), abs=grid.tol)


def test_distance_transform_matches_brute_force():
    """The distance transform equals the O(N²) brute force on 200 random masks up to 64×64."""
    rng = np.random.default_rng(3)
    for _ in range(200):
        nx, ny = int(rng.integers(1, 65)), int(rng.integers(1, 65))
        grid = GridSpec((float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))), float(rng.uniform(0.01, 0.5)), nx, ny)
        mask = rng.random((nx, ny)) < rng.uniform(0.001, 0.3)
        mask[int(rng.integers(nx)), int(rng.integers(ny))] = True
        R = RasterCompact(grid, mask)
        brute = cdist(grid.centers, R.points).min(axis=1).reshape(grid.shape)
        assert np.abs(distance_transform(R).values - brute).max() < 1e-9


def test_grid_from_bounds():
    """Square cells with the requested count along the long side, centered on the box."""
    g = GridSpec.from_bounds((-1.6, -1.6, 1.6, 1.6), 512)
    assert (g.nx, g.ny) == (512, 512)
    assert g.cell == pytest.approx(3.2 / 512)
    assert g.min_corner == pytest.approx((-1.6, -1.6))
    assert g.tol == pytest.approx(g.cell * math.sqrt(2))
    wide = GridSpec.from_bounds((0, 0, 4, 1), 100, pad=0.5)
    assert wide.nx == 100 and wide.ny == 40
    assert wide.covers((-0.5, -0.5, 4.5, 1.5))
    assert GridSpec.from_bounds((1, 1, 1, 1), 10).covers((1, 1, 1, 1))
    with pytest.raises(ParseError): GridSpec((0, 0), 0.0, 4, 4)
    with pytest.raises(ParseError): GridSpec((0, 0), 1.0, 0, 4)


def test_cell_centers_layout():
    """Cell (i, j) is centered at min_corner + (i + ½, j + ½)·cell, in mask order."""
    g = GridSpec((1.0, 2.0), 0.5, 3, 2)
    assert g.centers.shape == (6, 2)
    assert g.centers[0].tolist() == [1.25, 2.25]
    assert g.centers[1].tolist() == [1.25, 2.75]
    mask = np.zeros(g.shape, dtype=bool)
    mask[2, 1] = True
    assert g.points_of(mask).tolist() == [[2.25, 2.75]]


def test_closed_neighborhood_of_a_point():
    """Cells within r + tol/2 of the point, and nothing that is clearly farther."""
    grid = _unit_grid()
    N = closed_neighborhood(FiniteCompact([[0, 0]]), 1.0, grid)
    d = np.hypot(*grid.centers.T).reshape(grid.shape)
    assert N.mask[d <= 1.0].all()
    assert not N.mask[d > 1.0 + grid.tol / 2 + 1e-9].any()


def test_closed_neighborhood_needs_coverage():
    """The grid must span the dilated set; the error names the required box."""
    grid = _unit_grid(16, 1.0)
    with pytest.raises(CoverageError) as exc: closed_neighborhood(FiniteCompact([[0, 0]]), 1.5, grid)
    assert exc.value.required == pytest.approx((-1.5, -1.5, 1.5, 1.5))
    assert exc.value.exit_code == 3
    with pytest.raises(PreconditionError): closed_neighborhood(FiniteCompact([[0, 0]]), -0.1, grid)


def test_intersect_tangent_and_disjoint_balls():
    """Tangent balls meet near the tangency point; disjoint balls give Empty."""
    grid = GridSpec((-1, -2), 4 / 128, 128, 128)
    A, B = FiniteCompact([[0, 0]]), FiniteCompact([[2, 0]])
    K = intersect([closed_neighborhood(A, 1.0, grid), closed_neighborhood(B, 1.0, grid)])
    assert K
    assert np.abs(K.points[:, 0] - 1).max() <= grid.tol
    assert included(FiniteCompact([[1, 0]]), K, grid.tol)
    far = intersect([closed_neighborhood(A, 0.4, grid), closed_neighborhood(B, 0.4, grid)])
    assert isinstance(far, Empty) and not far


def test_raster_operands_must_share_a_grid():
    """Mixing rasters from different grids raises GridMismatchError."""
    g1, g2 = _unit_grid(16), _unit_grid(32)
    R1, R2 = rasterize(FiniteCompact([[0, 0]]), g1), rasterize(FiniteCompact([[0, 0]]), g2)
    with pytest.raises(GridMismatchError): intersect([R1, R2])
    with pytest.raises(GridMismatchError): hausdorff_distance(R1, R2)
    with pytest.raises(GridMismatchError): RasterCompact(g1, np.ones((3, 3), dtype=bool))
    with pytest.raises(ParseError): RasterCompact(g1, np.zeros(g1.shape, dtype=bool))


def test_rasterize_sliver_polygon():
    """A polygon too thin to hold a cell center still rasterizes to a nonempty set."""
    grid = GridSpec((0, 0), 1.0, 8, 8)
    sliver = PolygonCompact([[1.0, 1.0], [6.0, 1.05], [1.0, 1.1]])
    R = rasterize(sliver, grid)
    assert R.count >= 1
    assert directed_distance(R, sliver) <= grid.tol / 2 + 1e-9
    with pytest.raises(CoverageError): rasterize(PolygonCompact([[0, 0], [20, 0]]), grid)


def test_polygon_to_finite_is_exact():
    """The unit square against two opposite corners: its farthest point is 1 away."""
    square = PolygonCompact([[0, 0], [1, 0], [1, 1], [0, 1]])
    corners = FiniteCompact([[0, 0], [1, 1]])
    assert directed_distance(square, corners) == pytest.approx(1.0, abs=1e-12)
    assert distance_method(square, corners) == "exact"
    inner = FiniteCompact([[0.25, 0.25], [0.75, 0.75], [0.25, 0.75]])
    # brute force over a fine sample of the square
    xs = np.linspace(0, 1, 401)
    X, Y = np.meshgrid(xs, xs)
    brute = points_to_set_distance(np.column_stack([X.ravel(), Y.ravel()]), inner).max()
    assert directed_distance(square, inner) == pytest.approx(brute, abs=2e-3)
    assert directed_distance(square, inner) >= brute - 1e-12


def test_nonconvex_pair_uses_the_raster():
    """Two L-shapes need the raster path and stay within its tolerance of a dense oracle."""
    L1 = PolygonCompact([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]])
    L2 = PolygonCompact([[0.5, 0.5], [3, 0.5], [3, 1.5], [1.5, 1.5], [1.5, 3], [0.5, 3]])
    grid = grid_around(L1, L2, n=256)
    assert distance_method(L1, L2, grid) == "raster"
    dense = grid_around(L1, L2, n=1024)
    oracle = hausdorff_distance(rasterize(L1, dense), rasterize(L2, dense))
    assert hausdorff_distance(L1, L2, grid) == pytest.approx(oracle, abs=grid.tol + dense.tol)


def test_neighborhood_form_agrees_with_supremum_form():
    """inf{r : each set in the other's r-neighborhood} matches d_H within the grid tolerance."""
    rng = np.random.default_rng(5)
    grid = GridSpec((-6, -6), 12 / 128, 128, 128)
    for _ in range(20):
        A, B = _random_finite(rng, 1, 5), _random_finite(rng, 1, 5)
        assert hausdorff_by_neighborhoods(A, B, grid) == pytest.approx(hausdorff_distance(A, B), abs=grid.tol)


def test_distance_field_and_inclusion():
    """Distance fields of finite sets are exact; inclusion is tolerance based."""
    grid = _unit_grid(32)
    K = FiniteCompact([[0.3, -0.2], [1.0, 1.0]])
    field = distance_field(K, grid)
    assert np.allclose(field.values.ravel(), cdist(grid.centers, K.points).min(axis=1))
    small, big = FiniteCompact([[0, 0]]), FiniteCompact([[0, 0], [1, 0]])
    assert included(small, big, 0.0)
    assert not included(big, small, 0.5)
    assert included(big, small, 1.0)


def test_convexity_of_raster_sets():
    """A raster disk passes the midpoint test; a raster annulus sector does not."""
    grid = _unit_grid(128)
    disk = closed_neighborhood(FiniteCompact([[0, 0]]), 1.0, grid)
    assert convexity_defect(disk) <= grid.tol
    ring = RasterCompact(grid, disk.mask & (distance_field(FiniteCompact([[0, 0]]), grid).values >= 0.8))
    assert convexity_defect(ring) > 5 * grid.tol


def test_intermediate_sets_with_both_ends_at_the_bound():
    """Padding A with points exactly d from D gives d_H(A, D) = d_H(C, D) = d, and B in between stays within d."""
    rng = np.random.default_rng(23)
    built = 0
    for _ in range(100):
        A, D = _random_finite(rng), _random_finite(rng)
        d = hausdorff_distance(A, D)
        pads = []
        for q in D.points:
            u = rng.normal(size=2)
            u /= np.hypot(*u)
            # a pair mirrored through q, kept only where q is the nearest point of D
            for p in (q + d * u, q - d * u):
                if point_to_set_distance(p, D) >= d - 1e-12: pads.append(p)
        if not pads: continue
        pads = np.array(pads)
        C = A.union(pads)
        assert hausdorff_distance(C, D) == pytest.approx(d, abs=1e-12)
        for _ in range(5):
            picked = pads[rng.random(len(pads)) < 0.5]
            B = A.union(picked) if len(picked) else A
            assert hausdorff_distance(B, D) <= d + 1e-12
        built += 1
    assert built > 50


def test_raster_disk_area():
    """The closed unit disk at cell 0.01 covers π within 2%."""
    grid = GridSpec((-1.1, -1.1), 0.01, 220, 220)
    disk = closed_neighborhood(FiniteCompact([[0, 0]]), 1.0, grid)
    assert disk.area == pytest.approx(math.pi, rel=0.02)


def test_raster_lens_area():
    """Two unit disks with centers 1 apart meet in a lens of area 2π/3 − √3/2."""
    grid = GridSpec((-1.05, -1.05), 0.005, 620, 420)
    lens = intersect([closed_neighborhood(FiniteCompact([[0, 0]]), 1.0, grid),
                      closed_neighborhood(FiniteCompact([[1, 0]]), 1.0, grid)])
    assert lens.area == pytest.approx(2 * math.pi / 3 - math.sqrt(3) / 2, rel=0.02)


def test_rasterize_unit_square():
    """The unit square at cell 0.1 holds 10 × 10 cell centers."""
    grid = GridSpec((-0.5, -0.5), 0.1, 20, 20)
    R = rasterize(PolygonCompact([[0, 0], [1, 0], [1, 1], [0, 1]]), grid)
    assert R.count == 100
    assert R.area == pytest.approx(1.0)


def test_rasterize_needs_coverage():
    """A point outside the grid cannot be rasterized."""
    with pytest.raises(CoverageError) as exc: rasterize(FiniteCompact([[5, 5]]), _unit_grid())
    assert exc.value.required[2:] == pytest.approx((5, 5))


def test_neighborhood_of_a_convex_polygon_is_convex():
    """The 0.5-neighborhood of a triangle passes the midpoint test."""
    grid = GridSpec((-1, -1), 3 / 128, 128, 128)
    N = closed_neighborhood(PolygonCompact([[0, 0], [1, 0], [0, 1]]), 0.5, grid)
    assert convexity_defect(N) <= grid.tol


def test_rasterized_finite_sets_keep_their_distance():
    """d_H between rasterized point sets stays within the grid tolerance of the exact value."""
    rng = np.random.default_rng(17)
    grid = GridSpec((-6, -6), 12 / 256, 256, 256)
    for _ in range(30):
        A, B = _random_finite(rng), _random_finite(rng)
        raster = hausdorff_distance(rasterize(A, grid), rasterize(B, grid))
        assert raster == pytest.approx(hausdorff_distance(A, B), abs=grid.tol)
