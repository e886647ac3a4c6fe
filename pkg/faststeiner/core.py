"""Core plumbing for faststeiner: logging, the error hierarchy, and runtime knobs.

Library code raises the exceptions defined here; only :mod:`faststeiner.cli` turns
them into process exit codes (see ``exit_code`` on each class).
"""

import logging
import os

__all__ = ["setup_logging", "thread_count", "FastSteinerError", "ParseError", "CoverageError", "GridMismatchError",
           "NoSolutionError", "ValidationError", "PreconditionError"]

_logger = logging.getLogger("faststeiner")
_logger.addHandler(logging.NullHandler())

def setup_logging(verbose: bool=False) -> None:
    "Configure standard logging for faststeiner usage."
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format="%(levelname)s: %(message)s")


class FastSteinerError(Exception):
    "Base class for every error faststeiner raises on purpose."
    exit_code = 1


class ParseError(FastSteinerError, ValueError):
    "A boundary/result file, or a compact built from one, is malformed."
    exit_code = 2


class CoverageError(FastSteinerError, ValueError):
    """The grid does not cover what an operation needs.

    ``required`` is the bounding box ``(xmin, ymin, xmax, ymax)`` the grid would have to span.
    """
    exit_code = 3

    def __init__(self, message: str, required: tuple[float, float, float, float]):
        super().__init__(f"{message}; required bbox=({', '.join(f'{v:.6g}' for v in required)})")
        self.required = required


class GridMismatchError(FastSteinerError, ValueError):
    "Raster operands live on different grids."
    exit_code = 3


class NoSolutionError(FastSteinerError, RuntimeError):
    "Every solver start ended infeasible."
    exit_code = 4


class ValidationError(FastSteinerError, AssertionError):
    "A verification or cross-validation check failed, or an internal consistency check did."
    exit_code = 5


class PreconditionError(FastSteinerError, ValueError):
    "An operation was called outside its contract."
    exit_code = 1


def thread_count() -> int:
    "Worker threads for internally parallel work: the CPU count, capped by ``HS_THREADS``."
    cpus = os.cpu_count() or 1
    cap = os.environ.get("HS_THREADS")
    if cap is None: return cpus
    try: return max(1, min(int(cap), cpus))
    except ValueError:
        _logger.warning(f"ignoring HS_THREADS={cap!r}; using 1 thread")
        return 1
