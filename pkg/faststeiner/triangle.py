"""The symmetric three-compact boundary whose Steiner compacts are known in closed form.

Three two-point compacts Aᵢ = {aᵢ, bᵢ} sit on the unit circle around o: the aᵢ at 2π/3 spacing
(counterclockwise from ``orientation``) and each bᵢ the rotation of aᵢ by π/3. Among the
two-point compacts T(t) = {k_a, k_b}, with k_a at distance t from o along [o, b₁] and k_b
at distance t along [o, a₂],

    d_H(A₁, T) = d_H(A₂, T) = √(1 + t² − t),   d_H(A₃, T) = √(1 + t² + t),

so S(T(t)) = f(t) = 2√(1 + t² − t) + √(1 + t² + t), minimized at the root t₀ of
4t⁴ + t² − 5t + 1 in (0, ½). The minimum is below 3, the best any single point can do.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from faststeiner.compacts import FiniteCompact, GridSpec, included
from faststeiner.core import ValidationError
from faststeiner.solver import SolverConfig, enumerate_classes, minimal_solution, solve_dvector
from faststeiner.structure import Boundary, DistanceVector

__all__ = ["TriangleInstance", "ClosedFormResult", "CrossValidationReport", "f", "f_prime", "f_second",
           "quartic_residual", "omega_of", "t_of", "k_points_by_circles", "solve_t0", "cross_validate"]

_logger = logging.getLogger("faststeiner")

HALF_WIDTH = 1.6


def _rot(theta: float) -> NDArray[np.float64]:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class TriangleInstance:
    "The boundary placed with a₁ at angle ``orientation``; ``mirrored`` reflects everything in the x axis."
    orientation: float = math.pi / 2
    mirrored: bool = False

    @property
    def _flip(self) -> NDArray[np.float64]: return np.diag([1.0, -1.0]) if self.mirrored else np.eye(2)

    @property
    def a(self) -> NDArray[np.float64]:
        angles = self.orientation + 2 * math.pi * np.arange(3) / 3
        return np.column_stack([np.cos(angles), np.sin(angles)]) @ self._flip.T

    @property
    def b(self) -> NDArray[np.float64]:
        angles = self.orientation + math.pi / 3 + 2 * math.pi * np.arange(3) / 3
        return np.column_stack([np.cos(angles), np.sin(angles)]) @ self._flip.T

    def boundary(self) -> Boundary:
        a, b = self.a, self.b
        return Boundary(tuple(FiniteCompact([a[i], b[i]]) for i in range(3)), ("A1", "A2", "A3"))

    def k_points(self, t: float) -> NDArray[np.float64]:
        "[k_a, k_b] = [t·b₁, t·a₂]."
        return np.array([t * self.b[0], t * self.a[1]])

    def rotation(self, k: int = 1) -> NDArray[np.float64]:
        "The symmetry sending Aᵢ to A_{i+k} (indices mod 3)."
        return _rot((-1 if self.mirrored else 1) * 2 * math.pi * k / 3)

    def grid(self, n: int = 512) -> GridSpec:
        "``n × n`` cells over [−1.6, 1.6]²."
        return GridSpec((-HALF_WIDTH, -HALF_WIDTH), 2 * HALF_WIDTH / n, n, n)


def f(t: float) -> float: return 2 * math.sqrt(1 + t * t - t) + math.sqrt(1 + t * t + t)


def f_prime(t: float) -> float:
    return (2 * t - 1) / math.sqrt(t * t - t + 1) + (2 * t + 1) / (2 * math.sqrt(t * t + t + 1))


def f_second(t: float) -> float: return 1.5 / (t * t - t + 1) ** 1.5 + 0.75 / (t * t + t + 1) ** 1.5


def quartic_residual(t: float) -> float: return 4 * t ** 4 + t * t - 5 * t + 1


def omega_of(t: float) -> float:
    "d_H(A₁, T(t)) = √(1 + t² − t)."
    return math.sqrt(1 + t * t - t)


def t_of(omega: float) -> float:
    "Inverse of :func:`omega_of` on t ∈ (0, ½), i.e. ω ∈ (√3/2, 1)."
    if not math.sqrt(3) / 2 < omega < 1: raise ValueError(f"omega must lie in (√3/2, 1), got {omega}")
    return (1 - math.sqrt(4 * omega * omega - 3)) / 2


def _near_intersection(p: NDArray[np.float64], q: NDArray[np.float64], r: float) -> NDArray[np.float64]:
    "Of the two points at distance r from both p and q, the one closer to the origin."
    m, half = (p + q) / 2, np.linalg.norm(q - p) / 2
    u = (q - p) / (2 * half)
    off = math.sqrt(r * r - half * half) * np.array([-u[1], u[0]])
    return min(m + off, m - off, key=lambda x: float(np.hypot(*x)))


def k_points_by_circles(omega: float, instance: TriangleInstance | None = None) -> NDArray[np.float64]:
    "[k_a, k_b] as circle intersections: k_a is ω from a₁ and a₂, k_b is ω from b₁ and b₂."
    inst = instance or TriangleInstance()
    a, b = inst.a, inst.b
    return np.array([_near_intersection(a[0], a[1], omega), _near_intersection(b[0], b[1], omega)])


@dataclass(frozen=True)
class ClosedFormResult:
    t0: float
    omega0: float
    d3: float
    S: float
    k_a: tuple[float, float]
    k_b: tuple[float, float]
    classes: tuple[DistanceVector, DistanceVector, DistanceVector]

    def lines(self) -> list[str]:
        out = [f"t0={self.t0!r}", f"omega0={self.omega0!r}", f"d3={self.d3!r}", f"S={self.S!r}",
               f"k_a=({self.k_a[0]!r}, {self.k_a[1]!r})", f"k_b=({self.k_b[0]!r}, {self.k_b[1]!r})"]
        return out + [f"class{i+1}=({', '.join(repr(v) for v in c)})" for i, c in enumerate(self.classes)]


def _newton_t0() -> float:
    "Root of f′ in [0, ½] by Newton's method, falling back to bisection whenever a step leaves the bracket."
    lo, hi, t = 0.0, 0.5, 0.25
    for _ in range(200):
        g = f_prime(t)
        if g == 0: return t
        if g < 0: lo = t
        else: hi = t
        nxt = t - g / f_second(t)
        if not lo < nxt < hi: nxt = (lo + hi) / 2
        if abs(nxt - t) <= 1e-16: return nxt
        t = nxt
    return t


def solve_t0(instance: TriangleInstance | None = None) -> ClosedFormResult:
    "t₀ from the radical formula, cross-checked against Newton on f′, with every derived quantity."
    inst = instance or TriangleInstance()
    radical = math.sqrt(5) / 4 - 0.5 * math.sqrt(math.sqrt(5) - 7 / 4)
    newton = _newton_t0()
    if abs(radical - newton) > 1e-12: raise ValidationError(f"t0 disagreement: radical={radical!r} newton={newton!r}")
    t0 = radical
    omega0, d3 = omega_of(t0), math.sqrt(1 + t0 * t0 + t0)
    S = 2 * omega0 + d3
    S_radical = math.sqrt(35 / 8 + 3 / 8 * math.sqrt(-47 + 80 * math.sqrt(5)))
    if abs(S - S_radical) > 1e-12: raise ValidationError(f"S disagreement: {S!r} vs radical {S_radical!r}")
    k_a, k_b = inst.k_points(t0)
    classes = ((omega0, omega0, d3), (d3, omega0, omega0), (omega0, d3, omega0))
    _logger.debug(f"closed_form t0={t0!r} newton={newton!r} S={S!r}")
    return ClosedFormResult(t0, omega0, d3, S, (float(k_a[0]), float(k_a[1])), (float(k_b[0]), float(k_b[1])), classes)


@dataclass
class CrossValidationReport:
    "Pass/fail per check, with a detail line each."
    clauses: list[tuple[str, bool, str]] = field(default_factory=list)
    S: float = math.nan

    def add(self, name: str, passed: bool, detail: str) -> None:
        _logger.debug(f"cross_validate clause={name} passed={passed} {detail}")
        self.clauses.append((name, passed, detail))

    @property
    def ok(self) -> bool: return all(passed for _, passed, _ in self.clauses)

    def __str__(self) -> str:
        return "\n".join(f"{'PASS' if passed else 'FAIL'} {name}: {detail}" for name, passed, detail in self.clauses)


def _match(P: NDArray[np.float64], Q: NDArray[np.float64]) -> float:
    "Largest distance in the cheapest one-to-one pairing of P with Q (inf when the sizes differ)."
    if len(P) != len(Q): return math.inf
    D = cdist(P, Q)
    rows, cols = linear_sum_assignment(D)
    return float(D[rows, cols].max())


def cross_validate(cfg: SolverConfig, instance: TriangleInstance | None = None, value_tol: float = 0.01) -> CrossValidationReport:
    """Run the generic solver on the triangle boundary and compare against the closed form.

    Checks the value, the two-point minimal compact, that the maximal compact holds both
    closed-form points, and that the classes found are the three cyclic permutations.
    """
    inst = instance or TriangleInstance()
    closed = solve_t0(inst)
    boundary = inst.boundary()
    tol = cfg.tol
    best, trace = solve_dvector(boundary, cfg)
    report = CrossValidationReport(S=best.value)
    report.add("value", abs(best.value - closed.S) <= 0.01, f"solver S={best.value:.9f} closed S={closed.S:.9f}")

    K0 = inst.k_points(closed.t0)
    candidates = [K0 @ inst.rotation(k).T for k in range(3)]
    minimal = minimal_solution(boundary, best, cfg)
    pts = minimal.K.points
    errs = [_match(pts, C) for C in candidates]
    k = int(np.argmin(errs))
    report.add("minimal", len(pts) == 2 and errs[k] <= 1e-3, f"points={len(pts)} S={minimal.value:.12f} max offset={errs[k]:.3g}")
    inside = included(FiniteCompact(candidates[k]), best.K, tol)
    report.add("maximal", inside, f"closed-form pair within tol={tol:.3g} of the maximal compact: {inside}")

    classes = enumerate_classes(boundary, cfg, value_tol, trace)
    profiles = np.array([c.profile for c in classes])
    expected = np.array(closed.classes)
    if len(classes) == 3:
        D = np.abs(profiles[:, None, :] - expected[None, :, :]).max(axis=2)
        rows, cols = linear_sum_assignment(D)
        worst = float(D[rows, cols].max())
    else: worst = math.inf
    report.add("classes", worst <= 2 * tol, f"clusters={len(classes)} worst profile offset={worst:.3g} (2*tol={2 * tol:.3g})")
    return report
