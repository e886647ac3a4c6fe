"""Numerical Fermat–Steiner solver: a derivative-free search over distance vectors.

Every compact with profile d sits inside K_d = ∩ᵢ B_{dᵢ}(Aᵢ), so the search runs over d and
scores F(d) = S(K_d) on a grid. Infeasible vectors (empty K_d) get a penalty above the
singleton baseline. Restarts run in a thread pool and merge deterministically.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.spatial.distance import cdist

from faststeiner.compacts import (Compact, FiniteCompact, GridSpec, PolygonCompact, RasterCompact, distance_field,
                                  points_to_set_distance, probe_points)
from faststeiner.core import NoSolutionError, PreconditionError, thread_count
from faststeiner.structure import Boundary, DistanceVector, SteinerSolution, minimal_prune, objective

__all__ = ["SolverConfig", "TraceRecord", "SolveTrace", "solve_single_point", "solve_dvector", "polish_finite",
           "minimal_solution", "enumerate_classes"]

_logger = logging.getLogger("faststeiner")

# Cells on a threshold must not flicker out through rounding.
_EPS = 1e-9
# Point-to-cell distance tables above this many entries give way to a KD-tree per evaluation.
_TABLE_LIMIT = 4_000_000
_RESCALES = 6


@dataclass(frozen=True)
class SolverConfig:
    "Knobs for :func:`solve_dvector` and friends. ``seed`` fixes every random draw."
    grid: GridSpec
    restarts: int = 30
    max_iters: int = 600
    simplex_tol: float = 1e-4
    seed: int = 0
    polish_steps: int = 30

    def __post_init__(self) -> None:
        if self.restarts < 1: raise PreconditionError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iters < 1: raise PreconditionError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (math.isfinite(self.simplex_tol) and self.simplex_tol > 0): raise PreconditionError(f"simplex_tol must be > 0, got {self.simplex_tol}")
        if self.polish_steps < 0: raise PreconditionError(f"polish_steps must be >= 0, got {self.polish_steps}")

    @property
    def tol(self) -> float: return self.grid.tol

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "restarts": self.restarts, "max_iters": self.max_iters,
                "simplex_tol": self.simplex_tol, "seed": self.seed, "polish_steps": self.polish_steps}


@dataclass(frozen=True)
class TraceRecord:
    restart: int
    d: DistanceVector
    feasible: bool
    value: float


@dataclass
class SolveTrace:
    "Every evaluation of F in restart order, and the best solution each restart reached."
    records: list[TraceRecord] = field(default_factory=list)
    solutions: list[SteinerSolution] = field(default_factory=list)

    @property
    def best_index(self) -> int:
        "Index of the first record attaining the smallest feasible value."
        feasible = [(r.value, i) for i, r in enumerate(self.records) if r.feasible]
        if not feasible: raise NoSolutionError("no feasible evaluation recorded")
        return min(feasible)[1]

    def best_so_far(self) -> NDArray[np.float64]:
        "Running minimum of the recorded values."
        return np.minimum.accumulate(np.array([r.value for r in self.records]))


def _far_points(K: Compact) -> NDArray[np.float64]:
    "Points whose farthest distance from any x equals that of all of K."
    pts = K.vertices if isinstance(K, PolygonCompact) else K.points
    if len(pts) <= 64: return pts
    try: return pts[ConvexHull(pts).vertices]
    except QhullError: return pts[[0, -1]]  # collinear; points are lexicographically sorted


def solve_single_point(boundary: Boundary, grid: GridSpec) -> SteinerSolution:
    """Best singleton {x} over the cell centers of ``grid``.

    d_H({x}, Aᵢ) is the farthest distance from x to Aᵢ, so this minimizes Σᵢ max_{a∈Aᵢ} |xa|.
    The minimizer lies in the hull of the boundary, which ``grid`` must cover.
    """
    grid.require(boundary.bounds, "the boundary hull")
    centers = grid.centers
    total = np.zeros(len(centers))
    for A in boundary: total += cdist(centers, _far_points(A)).max(axis=1)
    x = centers[int(np.argmin(total))]
    sol = SteinerSolution.of(FiniteCompact(x), boundary, "candidate", grid.tol, method="single-point")
    _logger.debug(f"single_point x=({x[0]:.6g}, {x[1]:.6g}) value={sol.value:.9g}")
    return sol


class _Landscape:
    """F(d) on a fixed grid, evaluated through precomputed per-member distance fields.

    A cell belongs to K_d when fieldᵢ ≤ dᵢ + tol/2 for all i. The profile of the cell-center
    set is exact: the forward part is the largest field value over the cells, the backward part
    the farthest probe of Aᵢ from its nearest cell.
    """
    def __init__(self, boundary: Boundary, grid: GridSpec):
        for A in boundary:
            if isinstance(A, RasterCompact) and A.grid != grid: raise PreconditionError("solver grid must be the raster boundary's grid")
            grid.require(A.bounds, "the boundary")
        self.boundary, self.grid, self.n = boundary, grid, len(boundary)
        self.fields = np.stack([distance_field(A, grid).values for A in boundary])
        self.h = grid.tol / 2 + _EPS * grid.cell
        self.probes = [probe_points(A, grid) for A in boundary]
        size = sum(len(P) for P in self.probes) * len(grid.centers)
        self.tables = [cdist(P, grid.centers) for P in self.probes] if size <= _TABLE_LIMIT else None
        self.gaps = np.zeros((self.n, self.n))
        for i in range(self.n):
            for j in range(i + 1, self.n):
                self.gaps[i, j] = float(points_to_set_distance(self.probes[i], boundary[j]).min())
        self.base = self.n * max(boundary.diameter, grid.cell)

    def penalty(self, d: NDArray[np.float64]) -> float:
        "More than the singleton baseline can cost, and growing with the distance to feasibility."
        shortfall = np.maximum(0.0, self.gaps - d[:, None] - d[None, :])[np.triu_indices(self.n, 1)].sum()
        inflation = max(0.0, float((self.fields - d[:, None, None]).max(axis=0).min()))
        negative = float(np.maximum(0.0, -d).sum())
        return self.base + float(shortfall) + inflation + negative

    def mask(self, thresholds: NDArray[np.float64]) -> NDArray[np.bool_]:
        return np.all(self.fields <= thresholds[:, None, None], axis=0)

    def profile(self, mask: NDArray[np.bool_]) -> NDArray[np.float64]:
        forward = np.array([f[mask].max() for f in self.fields])
        if self.tables is not None:
            flat = mask.ravel()
            backward = np.array([T[:, flat].min(axis=1).max() for T in self.tables])
        else:
            tree = cKDTree(self.grid.points_of(mask))
            backward = np.array([tree.query(P)[0].max() for P in self.probes])
        return np.maximum(forward, backward)

    def evaluate(self, d: NDArray[np.float64]) -> tuple[float, NDArray[np.bool_] | None, NDArray[np.float64] | None]:
        "F(d) with the repair step applied, plus the winning mask and its profile (None when infeasible)."
        if (d < 0).any(): return self.penalty(d), None, None
        mask = self.mask(d + self.h)
        if not mask.any(): return self.penalty(d), None, None
        profile = self.profile(mask)
        # thresholds d' = realized profile give a superset whose forward and backward parts are no larger
        repaired = self.mask(profile + _EPS * self.grid.cell)
        repaired_profile = self.profile(repaired)
        if math.fsum(repaired_profile) <= math.fsum(profile): mask, profile = repaired, repaired_profile
        return math.fsum(profile), mask, profile


@dataclass
class _Best:
    value: float = math.inf
    d: NDArray[np.float64] | None = None
    mask: NDArray[np.bool_] | None = None
    profile: NDArray[np.float64] | None = None


def _simplex(x: NDArray[np.float64], step: float) -> NDArray[np.float64]:
    return np.vstack([x, x + step * np.eye(len(x))])


def _run_restart(land: _Landscape, index: int, start: NDArray[np.float64], cfg: SolverConfig,
                 step: float) -> tuple[list[TraceRecord], _Best]:
    "Nelder–Mead from ``start``, restarted from its best vertex with a halved simplex while that helps."
    records: list[TraceRecord] = []
    best = _Best()

    def F(d: NDArray[np.float64]) -> float:
        value, mask, profile = land.evaluate(np.asarray(d, dtype=np.float64))
        records.append(TraceRecord(index, tuple(float(v) for v in d), mask is not None, value))
        if mask is not None and value < best.value: best.value, best.d, best.mask, best.profile = value, np.array(d), mask, profile
        return value

    x, fx = np.asarray(start, dtype=np.float64), math.inf
    for _ in range(_RESCALES):
        res = minimize(F, x, method="Nelder-Mead",
                       options=dict(initial_simplex=_simplex(x, step), maxiter=cfg.max_iters, maxfev=2 * cfg.max_iters,
                                    xatol=cfg.simplex_tol, fatol=cfg.simplex_tol))
        if not res.fun < fx - 1e-12: break
        x, fx, step = res.x, float(res.fun), step / 2
        if step < cfg.grid.cell / 4: break
    _logger.debug(f"restart={index} evals={len(records)} best={best.value:.9g}")
    return records, best


def _starts(boundary: Boundary, baseline: SteinerSolution, cfg: SolverConfig) -> list[NDArray[np.float64]]:
    "The baseline profile, its per-axis shrinks, then uniform draws in [0, diam]ⁿ."
    p0 = np.array(baseline.profile)
    starts = [p0]
    for i in range(len(boundary)):
        p = p0.copy()
        p[i] *= 0.85
        starts.append(p)
    rng = np.random.default_rng(cfg.seed)
    while len(starts) < cfg.restarts: starts.append(rng.uniform(0, boundary.diameter, size=len(boundary)))
    return starts[:cfg.restarts]


def solve_dvector(boundary: Boundary, cfg: SolverConfig) -> tuple[SteinerSolution, SolveTrace]:
    """Minimize F(d) = S(K_d) over distance vectors; the best maximal compact and the full trace.

    Determinism: same boundary and config give the same trace and solution, whatever the thread count.
    """
    grid = cfg.grid
    baseline = solve_single_point(boundary, grid)
    land = _Landscape(boundary, grid)
    step = 0.05 * boundary.diameter + grid.cell
    starts = _starts(boundary, baseline, cfg)
    _logger.debug(f"solve n={len(boundary)} grid={grid.nx}x{grid.ny} restarts={len(starts)} threads={thread_count()}")
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        runs = list(pool.map(lambda a: _run_restart(land, a[0], a[1], cfg, step), enumerate(starts)))
    trace = SolveTrace()
    for index, (records, best) in enumerate(runs):
        trace.records.extend(records)
        if best.mask is None: continue
        trace.solutions.append(SteinerSolution(RasterCompact(grid, best.mask), tuple(best.profile), best.value, "maximal",
                                               grid.tol, {"restart": index, "d": tuple(best.d.tolist()), "evaluations": len(records)}))
    if not trace.solutions: raise NoSolutionError(f"all {len(starts)} starts ended infeasible")
    trace.solutions.sort(key=lambda s: (s.value, s.profile))
    best = trace.solutions[0]
    _logger.debug(f"solve best={best.value:.9g} profile={best.profile} restart={best.provenance['restart']}")
    return best, trace


class _Polisher:
    "Exact S of a finite point set against a boundary, with the data for surrogate steps."
    def __init__(self, boundary: Boundary, grid: GridSpec | None):
        self.boundary = boundary
        self.finite = all(isinstance(A, FiniteCompact) for A in boundary)
        self.probes = [A.points if isinstance(A, FiniteCompact) else probe_points(A, grid or _grid_for(boundary)) for A in boundary]

    def profile(self, X: NDArray[np.float64]) -> NDArray[np.float64]:
        forward = np.array([points_to_set_distance(X, A).max() for A in self.boundary])
        backward = np.array([cdist(P, X).min(axis=1).max() for P in self.probes])
        return np.maximum(forward, backward)

    def value(self, X: NDArray[np.float64]) -> float: return math.fsum(self.profile(X))

    def surrogate_step(self, X: NDArray[np.float64], step: float) -> NDArray[np.float64]:
        """Minimize Σ sᵢ with every nearest-point pairing frozen at X, moving each coordinate at most ``step``.

        The frozen distances bound the true ones from above and agree at X, so the minimizer
        can only lower S.
        """
        m, n = len(X), len(self.boundary)
        rows, cols, targets = [], [], []
        for i, P in enumerate(self.probes):
            D = cdist(X, P)
            for k in range(m): rows.append(i); cols.append(k); targets.append(P[D[k].argmin()])
            for p in range(len(P)): rows.append(i); cols.append(int(D[:, p].argmin())); targets.append(P[p])
        ri, ci, T = np.array(rows), np.array(cols), np.array(targets)

        def gaps(z: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
            diff = z[:2 * m].reshape(m, 2)[ci] - T
            return diff, np.sqrt((diff ** 2).sum(axis=1))

        def cons(z: NDArray[np.float64]) -> NDArray[np.float64]: return z[2 * m:][ri] - gaps(z)[1]

        def cons_jac(z: NDArray[np.float64]) -> NDArray[np.float64]:
            diff, norm = gaps(z)
            J = np.zeros((len(ri), 2 * m + n))
            unit = diff / np.maximum(norm, 1e-15)[:, None]
            J[np.arange(len(ri)), 2 * ci] = -unit[:, 0]
            J[np.arange(len(ri)), 2 * ci + 1] = -unit[:, 1]
            J[np.arange(len(ri)), 2 * m + ri] = 1.0
            return J

        z0 = np.concatenate([X.ravel(), self.profile(X)])
        c = np.concatenate([np.zeros(2 * m), np.ones(n)])
        bounds = [(v - step, v + step) for v in X.ravel()] + [(None, None)] * n
        res = minimize(lambda z: float(z[2 * m:].sum()), z0, jac=lambda z: c, method="SLSQP", bounds=bounds,
                       constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}], options=dict(maxiter=200, ftol=1e-15))
        return res.x[:2 * m].reshape(m, 2)


def _grid_for(boundary: Boundary) -> GridSpec: return GridSpec.from_bounds(boundary.bounds, pad=boundary.diameter / 64)


def _better(new: float, old: float) -> bool: return new < old - 1e-12 * max(1.0, abs(old))


def polish_finite(K: FiniteCompact, boundary: Boundary, steps: int, initial_step: float | None = None,
                  grid: GridSpec | None = None) -> FiniteCompact:
    """Move the points of K to lower S exactly, accepting only strict decreases.

    Each round takes a surrogate step (all-finite boundaries only) and then coordinate
    descent over every point's x and y at the round's step size, which halves per round
    starting from ``initial_step`` (one default-grid cell when omitted).
    """
    if steps <= 0: return K
    pol = _Polisher(boundary, grid)
    X = np.array(K.points)
    value = pol.value(X)
    step = initial_step or max(boundary.diameter, 1.0) / 512
    start = value
    for _ in range(steps):
        if pol.finite:
            Y = pol.surrogate_step(X, step)
            if np.isfinite(Y).all() and _better(v := pol.value(Y), value): X, value = Y, v
        improved, sweeps = True, 0
        while improved and sweeps < 200:
            improved, sweeps = False, sweeps + 1
            for k in range(len(X)):
                for axis in (0, 1):
                    for sign in (1.0, -1.0):
                        Y = X.copy()
                        Y[k, axis] += sign * step
                        if _better(v := pol.value(Y), value):
                            X, value, improved = Y, v, True
                            break
        step /= 2
    _logger.debug(f"polish points={len(X)} rounds={steps} before={start:.12g} after={value:.12g}")
    return FiniteCompact(X)


def minimal_solution(boundary: Boundary, maximal: SteinerSolution, cfg: SolverConfig) -> SteinerSolution:
    """Reduce a maximal compact to a minimal one: prune its cells, polish, prune exactly, polish again."""
    K = maximal.K.as_finite() if isinstance(maximal.K, RasterCompact) else maximal.K
    if not isinstance(K, FiniteCompact): raise PreconditionError("minimal_solution needs a raster or finite compact")
    grid = cfg.grid
    pruned = minimal_prune(K, boundary, maximal.profile, cfg.tol, grid)
    polished = polish_finite(pruned, boundary, cfg.polish_steps, grid.cell, grid)
    _, profile = objective(polished, boundary, grid)
    again = minimal_prune(polished, boundary, profile, 1e-9, grid)
    final = polish_finite(again, boundary, cfg.polish_steps, grid.cell / 8, grid)
    _logger.debug(f"minimal cells={len(K)} pruned={len(pruned)} final={len(final)}")
    return SteinerSolution.of(final, boundary, "minimal", cfg.tol, grid, cells=len(K), pruned=len(pruned))


def _linf(a: Sequence[float], b: Sequence[float]) -> float: return float(np.max(np.abs(np.subtract(a, b))))


def enumerate_classes(boundary: Boundary, cfg: SolverConfig, value_tol: float,
                      trace: SolveTrace | None = None, polish: bool = True) -> list[SteinerSolution]:
    """One representative maximal compact per class found among the near-best restart results.

    Results within ``value_tol`` of the best are first linked when their profiles are within
    ``2·tol + value_tol`` in the max norm. With ``polish``, the best member of each such cluster
    is then reduced to a minimal compact and polished on the exact objective: clusters whose
    polished profiles agree within ``2·tol`` are merged, and clusters whose polished value stays
    more than ``tol/2`` above the lowest one are dropped as stalled restarts (every class of
    Steiner compacts attains the same S, and polished values carry no raster error). Each class
    is represented by its smallest (value, profile) member, with ``polished_S`` in its provenance.

    Best effort only: restarts may miss classes. ``continuum_suspect`` is set on every
    representative when two near-best results tie in value within tol but have profiles more
    than 4·tol apart. That includes finite class sets related by a symmetry of the boundary,
    such as the three classes of the symmetric triangle, so the flag is a prompt to look
    closer, not a verdict.
    """
    if trace is None: _, trace = solve_dvector(boundary, cfg)
    sols = sorted(trace.solutions, key=lambda s: (s.value, s.profile))
    if not sols: raise NoSolutionError("no feasible restart to cluster")
    near = [s for s in sols if s.value <= sols[0].value + value_tol]
    tol, radius = cfg.tol, 2 * cfg.tol + value_tol
    parent = list(range(len(near)))

    def root(i: int) -> int:
        while parent[i] != i: i = parent[i]
        return i

    for i in range(len(near)):
        for j in range(i + 1, len(near)):
            if _linf(near[i].profile, near[j].profile) <= radius: parent[root(j)] = root(i)
    groups: dict[int, list[int]] = {}
    for i in range(len(near)): groups.setdefault(root(i), []).append(i)
    # near is sorted, so each group's first index is its best member
    members = {g[0]: g for g in groups.values()}
    heads = sorted(members)
    polished: dict[int, SteinerSolution] = {}
    if polish:
        with ThreadPoolExecutor(max_workers=thread_count()) as pool:
            polished = dict(zip(heads, pool.map(lambda h: minimal_solution(boundary, near[h], cfg), heads)))
        floor = min(m.value for m in polished.values())
        dropped = [h for h in heads if polished[h].value > floor + tol / 2]
        heads = [h for h in heads if h not in dropped]
        for a in range(len(heads)):
            for b in range(a + 1, len(heads)):
                if _linf(polished[heads[a]].profile, polished[heads[b]].profile) <= 2 * tol: parent[root(heads[b])] = root(heads[a])
        if dropped: _logger.debug(f"classes dropped={[near[h].value for h in dropped]} floor={floor:.12g}")
    merged: dict[int, list[int]] = {}
    for h in heads: merged.setdefault(root(h), []).append(h)
    continuum = any(abs(a.value - b.value) <= tol and _linf(a.profile, b.profile) > 4 * tol
                    for i, a in enumerate(near) for b in near[i + 1:])
    _logger.debug(f"classes near={len(near)} clusters={len(members)} classes={len(merged)} continuum_suspect={continuum}")
    out = []
    for hs in merged.values():
        rep = near[min(hs)]
        prov = {**rep.provenance, "continuum_suspect": continuum, "cluster_size": sum(len(members[h]) for h in hs)}
        if polish: prov["polished_S"] = polished[min(hs)].value
        out.append(replace(rep, provenance=prov))
    return sorted(out, key=lambda s: (s.value, s.profile))
