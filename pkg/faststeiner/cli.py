"""Command-line interface for faststeiner.

Each command is a plain function with an ``argv`` parameter so it can be called from tests;
``[project.scripts]`` exposes each one as its own executable, and ``faststeiner`` dispatches
``dist | solve | verify | example triangle`` to them.

Exit codes: 0 ok, 2 unparseable input, 3 grid coverage, 4 no feasible solution, 5 failed validation.
"""

import argparse
import configparser
import sys
from contextlib import contextmanager
from importlib.metadata import version
from pathlib import Path
from typing import Iterator

from faststeiner import core
from faststeiner.compacts import DEFAULT_N, distance_method, grid_around, hausdorff_distance
from faststeiner.core import FastSteinerError, ParseError
from faststeiner.files import ResultFile, read_boundary, read_compact, read_result, verify_result, write_result
from faststeiner.solver import SolverConfig, enumerate_classes, minimal_solution, solve_dvector
from faststeiner.svg import write_svg
from faststeiner.triangle import TriangleInstance, cross_validate, solve_t0

# Single source of truth for defaults; a CLI value equal to its default yields to the config file.
DEFAULT_CONFIG = Path(".faststeiner")
DEFAULTS: dict[str, int | float] = {"grid": DEFAULT_N, "restarts": 30, "seed": 0, "max_iters": 600, "simplex_tol": 1e-4,
                                    "polish_steps": 30, "pad": 1.25}


def _get_config(config_path: Path, **values: int | float) -> dict[str, int | float]:
    """Final value resolution for solver knobs: CLI args > config file ``[solver]`` section > defaults.

    Values equal to their defaults are assumed not to have been given, so a config file
    entry replaces them.
    """
    out = dict(values)
    if not config_path.exists(): return out
    cfg = configparser.ConfigParser()
    cfg.read(config_path)
    if "solver" not in cfg: return out
    for key, value in values.items():
        if key in cfg["solver"] and value == DEFAULTS[key]:
            try: out[key] = type(DEFAULTS[key])(cfg["solver"][key])
            except ValueError: raise ParseError(f"{config_path}: [solver] {key} = {cfg['solver'][key]!r} is not a {type(DEFAULTS[key]).__name__}")
    return out


@contextmanager
def _exits() -> Iterator[None]:
    "Turn faststeiner errors into a message on stderr and their exit code."
    try: yield
    except FastSteinerError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(e.exit_code)


def dist(
    file_a: Path | None = None, # boundary file holding exactly one compact
    file_b: Path | None = None, # boundary file holding exactly one compact
    grid: int = DEFAULT_N, # cells along the long side, for pairs that need a raster
    verbose: bool = False, # Enable debug logging
    argv: list[str] | None = None,
) -> None:
    """Print the Hausdorff distance between the compacts of two files, and how it was computed."""
    parser = argparse.ArgumentParser(prog="faststeiner_dist", description=dist.__doc__)
    parser.add_argument("file_a", type=Path, nargs=None if file_a is None else "?", default=file_a)
    parser.add_argument("file_b", type=Path, nargs=None if file_b is None else "?", default=file_b)
    parser.add_argument("--grid", default=grid, type=int)
    parser.add_argument("-v", "--verbose", action="store_true", default=verbose)
    args = parser.parse_args(argv)

    core.setup_logging(args.verbose)
    with _exits():
        A, B = read_compact(args.file_a), read_compact(args.file_b)
        g = grid_around(A, B, n=args.grid)
        value, method = hausdorff_distance(A, B, g), distance_method(A, B, g)
        print(f"distance={value!r}")
        print(f"method={method}" + (f" tol={g.tol!r}" if method == "raster" else ""))


def solve(
    boundary: Path | None = None, # boundary file
    grid: int = DEFAULT_N, # cells along the long side of the grid
    restarts: int = 30, # Nelder-Mead starts
    seed: int = 0, # seed for the random starts
    max_iters: int = 600, # iterations per Nelder-Mead run
    simplex_tol: float = 1e-4, # simplex convergence tolerance
    polish_steps: int = 30, # rounds of finite-compact polishing
    pad: float = 1.25, # grid padding, in boundary diameters, when the file has no bbox
    value_tol: float | None = None, # class clustering window (default n * tol)
    out: Path | None = None, # result file to write
    svg: Path | None = None, # SVG figure to write
    config_path: Path = DEFAULT_CONFIG, # Path to config file
    verbose: bool = False, # Enable debug logging
    argv: list[str] | None = None,
) -> None:
    """Solve the Fermat-Steiner problem for a boundary file.

    Note: command line arguments take precedence over values from a
    config file, unless they are equal to default values.
    """
    parser = argparse.ArgumentParser(prog="faststeiner_solve", description=solve.__doc__)
    parser.add_argument("boundary", type=Path, nargs=None if boundary is None else "?", default=boundary)
    parser.add_argument("--grid", default=grid, type=int)
    parser.add_argument("--restarts", default=restarts, type=int)
    parser.add_argument("--seed", default=seed, type=int)
    parser.add_argument("--max_iters", default=max_iters, type=int)
    parser.add_argument("--simplex_tol", default=simplex_tol, type=float)
    parser.add_argument("--polish_steps", default=polish_steps, type=int)
    parser.add_argument("--pad", default=pad, type=float)
    parser.add_argument("--value_tol", default=value_tol, type=float)
    parser.add_argument("--out", default=out, type=Path)
    parser.add_argument("--svg", default=svg, type=Path)
    parser.add_argument("--config_path", default=config_path, type=Path)
    parser.add_argument("-v", "--verbose", action="store_true", default=verbose)
    args = parser.parse_args(argv)

    core.setup_logging(args.verbose)
    with _exits():
        knobs = _get_config(args.config_path, grid=args.grid, restarts=args.restarts, seed=args.seed, max_iters=args.max_iters,
                            simplex_tol=args.simplex_tol, polish_steps=args.polish_steps, pad=args.pad)
        bf = read_boundary(args.boundary)
        cfg = SolverConfig(bf.grid(int(knobs["grid"]), float(knobs["pad"])), int(knobs["restarts"]), int(knobs["max_iters"]),
                           float(knobs["simplex_tol"]), int(knobs["seed"]), int(knobs["polish_steps"]))
        best, trace = solve_dvector(bf.boundary, cfg)
        minimal = minimal_solution(bf.boundary, best, cfg)
        vt = args.value_tol if args.value_tol is not None else len(bf.boundary) * cfg.tol
        classes = enumerate_classes(bf.boundary, cfg, vt, trace)
        rf = ResultFile(bf, cfg, best, minimal, tuple(classes))
        print(f"S={best.value!r}")
        print(f"profile=({', '.join(repr(v) for v in best.profile)})")
        print(f"tol={cfg.tol!r}")
        print(f"minimal_S={minimal.value!r} minimal_points={len(minimal.K.points)}")
        print(f"classes={len(classes)}" + (" continuum_suspect" if rf.continuum_suspect else ""))
        if args.out is not None: write_result(rf, args.out)
        if args.svg is not None: write_svg(rf, args.svg)


def verify(
    result: Path | None = None, # result file written by faststeiner_solve
    verbose: bool = False, # Enable debug logging
    argv: list[str] | None = None,
) -> None:
    """Re-check a result file: profile sums, fresh evaluations, and the minimal/maximal sandwich."""
    parser = argparse.ArgumentParser(prog="faststeiner_verify", description=verify.__doc__)
    parser.add_argument("result", type=Path, nargs=None if result is None else "?", default=result)
    parser.add_argument("-v", "--verbose", action="store_true", default=verbose)
    args = parser.parse_args(argv)

    core.setup_logging(args.verbose)
    with _exits():
        report = verify_result(read_result(args.result))
        print(report)
        if not report.ok: sys.exit(5)


def example_triangle(
    grid: int = DEFAULT_N, # cells per side over [-1.6, 1.6]^2
    check: bool = False, # run the generic solver and cross-validate
    restarts: int = 30, # Nelder-Mead starts for --check
    seed: int = 0, # seed for the random starts
    config_path: Path = DEFAULT_CONFIG, # Path to config file
    verbose: bool = False, # Enable debug logging
    argv: list[str] | None = None,
) -> None:
    """Print the closed-form solution of the symmetric triangle boundary; --check cross-validates the solver against it."""
    parser = argparse.ArgumentParser(prog="faststeiner_example_triangle", description=example_triangle.__doc__)
    parser.add_argument("--grid", default=grid, type=int)
    parser.add_argument("--check", action="store_true", default=check)
    parser.add_argument("--restarts", default=restarts, type=int)
    parser.add_argument("--seed", default=seed, type=int)
    parser.add_argument("--config_path", default=config_path, type=Path)
    parser.add_argument("-v", "--verbose", action="store_true", default=verbose)
    args = parser.parse_args(argv)

    core.setup_logging(args.verbose)
    with _exits():
        inst = TriangleInstance()
        for line in solve_t0(inst).lines(): print(line)
        if not args.check: return
        knobs = _get_config(args.config_path, grid=args.grid, restarts=args.restarts, seed=args.seed, max_iters=DEFAULTS["max_iters"],
                            simplex_tol=DEFAULTS["simplex_tol"], polish_steps=DEFAULTS["polish_steps"])
        cfg = SolverConfig(inst.grid(int(knobs["grid"])), int(knobs["restarts"]), int(knobs["max_iters"]),
                           float(knobs["simplex_tol"]), int(knobs["seed"]), int(knobs["polish_steps"]))
        report = cross_validate(cfg, inst)
        print(report)
        if not report.ok: sys.exit(5)


_COMMANDS = {"dist": dist, "solve": solve, "verify": verify}


def main(argv: list[str] | None = None) -> None:
    "faststeiner <dist|solve|verify|example triangle> [options]"
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] in (["--version"], ["-V"]):
        print(f"faststeiner {version('faststeiner')}")
        return
    if argv[:2] == ["example", "triangle"]: return example_triangle(argv=argv[2:])
    if argv and argv[0] in _COMMANDS: return _COMMANDS[argv[0]](argv=argv[1:])
    print(f"usage: {main.__doc__}", file=sys.stderr)
    sys.exit(2)
