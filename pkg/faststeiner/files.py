"""Boundary and result files.

Both are JSON. Floats are written with Python's shortest round-trip repr, so a result
re-read from disk verifies bit-for-bit against what the solver computed.

A boundary file looks like::

    {"version": 1,
     "compacts": [{"name": "A1", "kind": "points", "data": [[0, 0], [1, 0]]},
                  {"name": "A2", "kind": "segment", "data": [[0, 1], [2, 1]]},
                  {"name": "A3", "kind": "polygon", "data": [[0, 2], [1, 2], [1, 3]]}],
     "grid": {"bbox": [-1, -1, 3, 4]}}

``grid`` is optional; without it the solver pads the boundary's box by 1.25 diameters.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from faststeiner.compacts import (DEFAULT_N, Bounds, Compact, FiniteCompact, GridSpec, PolygonCompact, RasterCompact)
from faststeiner.core import ParseError
from faststeiner.solver import SolverConfig
from faststeiner.structure import Boundary, SteinerSolution, StructureReport, objective, verify_structure

__all__ = ["BoundaryFile", "ResultFile", "read_boundary", "write_boundary", "read_compact", "read_result",
           "write_result", "verify_result", "compact_to_dict", "compact_from_dict"]

_logger = logging.getLogger("faststeiner")

VERSION = 1
KINDS = ("points", "segment", "polygon")


def _load(path: Path | str) -> dict:
    path = Path(path)
    try: data = json.loads(path.read_text())
    except FileNotFoundError: raise ParseError(f"{path}: no such file")
    except (json.JSONDecodeError, UnicodeDecodeError) as e: raise ParseError(f"{path}: not valid JSON ({e})")
    if not isinstance(data, dict): raise ParseError(f"{path}: top level must be an object")
    if data.get("version") != VERSION: raise ParseError(f"{path}: unsupported version {data.get('version')!r}, expected {VERSION}")
    return data


def _dump(data: dict, path: Path | str) -> None: Path(path).write_text(json.dumps(data, indent=1) + "\n")


def _coords(a: np.ndarray) -> list[list[float]]: return [[float(x), float(y)] for x, y in a]


def _compact(entry: Any, where: str) -> tuple[str, str, Compact]:
    if not isinstance(entry, dict): raise ParseError(f"{where}: compact entries must be objects")
    name, kind, data = entry.get("name"), entry.get("kind"), entry.get("data")
    if not isinstance(name, str) or not name: raise ParseError(f"{where}: compact needs a nonempty name")
    if kind not in KINDS: raise ParseError(f"{where}: compact {name!r} has kind {kind!r}, expected one of {KINDS}")
    if not isinstance(data, list): raise ParseError(f"{where}: compact {name!r} needs a data array")
    try:
        if kind == "points": return name, kind, FiniteCompact(data)
        K = PolygonCompact(data)
    except ParseError as e: raise ParseError(f"{where}: compact {name!r}: {e}")
    if (kind == "segment") != K.is_segment: raise ParseError(f"{where}: compact {name!r} of kind {kind!r} has {len(K.vertices)} vertices")
    return name, kind, K


@dataclass(frozen=True)
class BoundaryFile:
    boundary: Boundary
    kinds: tuple[str, ...]
    bbox: Bounds | None = None

    @classmethod
    def from_dict(cls, data: dict, where: str = "boundary") -> "BoundaryFile":
        entries = data.get("compacts")
        if not isinstance(entries, list) or not entries: raise ParseError(f"{where}: 'compacts' must be a nonempty array")
        names, kinds, compacts = zip(*(_compact(e, where) for e in entries))
        if len(set(names)) != len(names): raise ParseError(f"{where}: compact names must be unique")
        bbox = None
        if "grid" in data:
            raw = (data["grid"] or {}).get("bbox")
            try: bbox = tuple(float(v) for v in raw)
            except (TypeError, ValueError): raise ParseError(f"{where}: grid bbox must be four numbers")
            if len(bbox) != 4 or not (bbox[0] < bbox[2] and bbox[1] < bbox[3]): raise ParseError(f"{where}: grid bbox must be [xmin, ymin, xmax, ymax]")
        return cls(Boundary(tuple(compacts), tuple(names)), tuple(kinds), bbox)

    def to_dict(self) -> dict:
        compacts = [{"name": name, "kind": kind, "data": _coords(K.vertices if isinstance(K, PolygonCompact) else K.points)}
                    for name, kind, K in zip(self.boundary.names, self.kinds, self.boundary)]
        out: dict[str, Any] = {"version": VERSION, "compacts": compacts}
        if self.bbox is not None: out["grid"] = {"bbox": list(self.bbox)}
        return out

    def grid(self, n: int = DEFAULT_N, pad: float = 1.25) -> GridSpec:
        "The bbox hint when present, else the boundary box padded by ``pad`` diameters; ``n`` cells on the long side."
        if self.bbox is not None: return GridSpec.from_bounds(self.bbox, n)
        return GridSpec.from_bounds(self.boundary.bounds, n, pad * self.boundary.diameter)


def read_boundary(path: Path | str) -> BoundaryFile: return BoundaryFile.from_dict(_load(path), str(path))


def write_boundary(bf: BoundaryFile, path: Path | str) -> None: _dump(bf.to_dict(), path)


def read_compact(path: Path | str) -> Compact:
    "The single compact of a one-compact boundary file."
    bf = read_boundary(path)
    if len(bf.boundary) != 1: raise ParseError(f"{path}: expected exactly one compact, found {len(bf.boundary)}")
    return bf.boundary[0]


def compact_to_dict(K: Compact) -> dict:
    if isinstance(K, RasterCompact): return {"kind": "raster", "grid": K.grid.to_dict(), "cells": np.argwhere(K.mask).tolist()}
    if isinstance(K, PolygonCompact): return {"kind": "segment" if K.is_segment else "polygon", "data": _coords(K.vertices)}
    return {"kind": "points", "data": _coords(K.points)}


def _grid_from(data: Any) -> GridSpec:
    try: return GridSpec(tuple(data["min_corner"]), data["cell"], data["nx"], data["ny"])
    except (KeyError, TypeError) as e: raise ParseError(f"malformed grid {data!r} ({e})")


def compact_from_dict(data: dict) -> Compact:
    kind = data.get("kind")
    if kind == "raster":
        grid = _grid_from(data.get("grid"))
        cells = np.asarray(data.get("cells", []), dtype=np.int64).reshape(-1, 2)
        if ((cells < 0) | (cells >= np.array(grid.shape))).any(): raise ParseError("raster cell index outside its grid")
        mask = np.zeros(grid.shape, dtype=bool)
        mask[cells[:, 0], cells[:, 1]] = True
        return RasterCompact(grid, mask)
    if kind == "points": return FiniteCompact(data.get("data"))
    if kind in ("segment", "polygon"): return PolygonCompact(data.get("data"))
    raise ParseError(f"unknown compact kind {kind!r}")


def _solution_to_dict(s: SteinerSolution) -> dict:
    return {"kind": s.kind, "S": s.value, "profile": list(s.profile), "tolerance": s.tolerance,
            "provenance": s.provenance, "compact": compact_to_dict(s.K)}


def _solution_from_dict(data: Any) -> SteinerSolution:
    try: return SteinerSolution(compact_from_dict(data["compact"]), tuple(data["profile"]), data["S"], data["kind"],
                                data["tolerance"], dict(data.get("provenance", {})))
    except (KeyError, TypeError) as e: raise ParseError(f"malformed solution entry ({e})")


@dataclass(frozen=True)
class ResultFile:
    "A solver run: the boundary it ran on, its config, the best maximal and minimal compacts, and the classes found."
    source: BoundaryFile
    config: SolverConfig
    maximal: SteinerSolution
    minimal: SteinerSolution
    classes: tuple[SteinerSolution, ...] = ()

    @property
    def continuum_suspect(self) -> bool: return any(c.provenance.get("continuum_suspect", False) for c in self.classes)

    def to_dict(self) -> dict:
        return {"version": VERSION, "boundary": self.source.to_dict(), "config": self.config.to_dict(),
                "tolerance": self.config.tol,
                "best": {"S": self.maximal.value, "profile": list(self.maximal.profile),
                         "maximal": _solution_to_dict(self.maximal), "minimal": _solution_to_dict(self.minimal)},
                "classes": [_solution_to_dict(c) for c in self.classes], "continuum_suspect": self.continuum_suspect}

    @classmethod
    def from_dict(cls, data: dict, where: str = "result") -> "ResultFile":
        try:
            source = BoundaryFile.from_dict(data["boundary"], where)
            raw = dict(data["config"])
            config = SolverConfig(_grid_from(raw.pop("grid")), **raw)
            best = data["best"]
            return cls(source, config, _solution_from_dict(best["maximal"]), _solution_from_dict(best["minimal"]),
                       tuple(_solution_from_dict(c) for c in data.get("classes", [])))
        except (KeyError, TypeError) as e: raise ParseError(f"{where}: malformed result ({e})")


def write_result(rf: ResultFile, path: Path | str) -> None: _dump(rf.to_dict(), path)


def read_result(path: Path | str) -> ResultFile: return ResultFile.from_dict(_load(path), str(path))


def verify_result(rf: ResultFile) -> StructureReport:
    """Re-check a result from its own contents.

    Stored profiles must match a fresh evaluation, and the minimal compact must sandwich
    inside the maximal one with the maximal profile, up to twice the grid tolerance.
    """
    boundary, grid, tol = rf.source.boundary, rf.config.grid, rf.config.tol
    report = StructureReport()
    for label, s in (("maximal", rf.maximal), ("minimal", rf.minimal), *((f"class{i+1}", c) for i, c in enumerate(rf.classes))):
        _, profile = objective(s.K, boundary, grid)
        drift = max(abs(a - b) for a, b in zip(profile, s.profile))
        if drift > 1e-9: report.failures.append(f"{label}: stored profile differs from a fresh evaluation by {drift:.3g}")
    check = verify_structure(rf.minimal.K, rf.minimal.K, rf.maximal.K, boundary, rf.maximal.profile, 2 * tol, grid)
    report.failures.extend(check.failures)
    _logger.debug(f"verify_result classes={len(rf.classes)} ok={report.ok}")
    return report
