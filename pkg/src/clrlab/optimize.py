"""Search over the Gamma trial family for the smallest objective at a given gamma."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import constants
from .errors import ClrLabError, ConvergenceError, InvalidInputError
from .numerics import QuadratureSpec, SearchSpec, minimize_simplex
from .trial import ObjectiveBreakdown, TrialParams, trial_objective

__all__ = [
    "Optimum",
    "UpperBound",
    "DEFAULT_BOX",
    "DEFAULT_CELLS",
    "reference_cells",
    "parse_cells",
    "optimize_trial",
    "best_upper",
    "mgamma_upper",
]

DEFAULT_BOX = ((1.0 + 1e-6, 60.0), (1.0 + 1e-6, 60.0))
DEFAULT_CELLS = tuple((p, q) for p in range(1, 5) for q in range(1, 5))


@dataclass(frozen=True)
class Optimum:
    gamma: float
    params: TrialParams
    breakdown: ObjectiveBreakdown
    c_gamma: float
    converged: bool
    evaluations: int


@dataclass(frozen=True)
class UpperBound:
    """Best known upper bound on M_gamma and where it came from."""

    gamma: float
    value: float
    source: str  # "trial" or "simple"
    optimum: Optimum | None


def reference_cells(gamma: float) -> tuple:
    """The (p, q) cell of the reference parameters: (2, 3) up to gamma 4, else (3, 2)."""
    return ((2, 3),) if gamma <= 4 else ((3, 2),)


def parse_cells(items: Iterable[str]) -> tuple:
    """Parse ``"p,q"`` strings into a sorted tuple of integer pairs."""
    cells = set()
    for item in items:
        parts = str(item).replace(" ", "").split(",")
        if len(parts) != 2:
            raise InvalidInputError(f"cell must look like 'p,q', got {item!r}")
        try:
            p, q = int(parts[0]), int(parts[1])
        except ValueError:
            raise InvalidInputError(f"cell must hold two integers, got {item!r}") from None
        if p < 1 or q < 1:
            raise InvalidInputError(f"cell entries must be >= 1, got {item!r}")
        cells.add((p, q))
    if not cells:
        raise InvalidInputError("no cells given")
    return tuple(sorted(cells))


def _to_z(alpha: float, beta: float) -> np.ndarray:
    return np.log(np.array([alpha - 1.0, beta - 1.0]))


def _from_z(z: Sequence[float]) -> tuple[float, float]:
    return 1.0 + math.exp(z[0]), 1.0 + math.exp(z[1])


def _optimize_cell(gamma, p, q, search: SearchSpec, quad: QuadratureSpec | None, x0):
    def f(z):
        a, b = _from_z(z)
        if not (a > 1.0 and b > 1.0):
            return math.inf
        return trial_objective(TrialParams(p, q, a, b), gamma, quad).objective

    result = minimize_simplex(f, search, x0=x0)
    a, b = _from_z(result.argmin)
    params = TrialParams(p, q, a, b)
    breakdown = trial_objective(params, gamma, quad)
    return Optimum(
        gamma=float(gamma), params=params, breakdown=breakdown, c_gamma=breakdown.c_gamma,
        converged=result.converged, evaluations=result.evaluations,
    )


def optimize_trial(
    gamma: float,
    cells: Iterable[tuple] | None = None,
    box: Sequence[tuple] = DEFAULT_BOX,
    spec: SearchSpec | None = None,
    quad: QuadratureSpec | None = None,
    start: tuple[float, float] | None = None,
) -> Optimum:
    """Minimize the trial objective over ``(alpha, beta)`` in each (p, q) cell.

    The search runs in ``log(alpha - 1), log(beta - 1)``.  ``start`` is an
    optional ``(alpha, beta)`` replacing the first restart point in every
    cell.  Cells whose objectives agree within ``f_tol`` are resolved to the
    smallest ``p``, then the smallest ``q``.
    """
    if not (gamma > 2.0 and math.isfinite(gamma)):
        raise InvalidInputError(f"gamma must be a finite real > 2, got {gamma!r}")
    spec = spec or SearchSpec()
    cells = tuple(sorted(set(cells))) if cells is not None else DEFAULT_CELLS
    if not cells:
        raise InvalidInputError("no (p, q) cells to search")
    if len(box) != 2:
        raise InvalidInputError("box needs an (alpha) and a (beta) range")
    for lo, hi in box:
        if not (1.0 < lo < hi and math.isfinite(hi)):
            raise InvalidInputError(f"box range ({lo}, {hi}) must lie inside (1, inf)")
    zbox = tuple((math.log(lo - 1.0), math.log(hi - 1.0)) for lo, hi in box)
    search = spec.replace(box=zbox)
    x0 = _to_z(*start) if start is not None else None

    best = None
    last_error = None
    for p, q in cells:
        try:
            opt = _optimize_cell(gamma, p, q, search, quad, x0)
        except ClrLabError as exc:
            last_error = exc
            continue
        if best is None or opt.breakdown.objective < best.breakdown.objective - spec.f_tol:
            best = opt
    if best is None:
        raise ConvergenceError(f"no cell produced a finite objective: {last_error}")
    return best


def best_upper(
    gamma: float,
    spec: SearchSpec | None = None,
    cells: Iterable[tuple] | None = None,
    quad: QuadratureSpec | None = None,
) -> UpperBound:
    """The smaller of the optimized trial objective and the simple-choice bound.

    ``cells=None`` searches only :func:`reference_cells`; pass ``DEFAULT_CELLS``
    for the full sweep.
    """
    if cells is None:
        cells = reference_cells(gamma)
    return _best_upper(float(gamma), spec or SearchSpec(), tuple(sorted(set(cells))), quad)


@functools.lru_cache(maxsize=256)
def _best_upper(gamma, spec, cells, quad) -> UpperBound:
    # pure in its (hashable) arguments, so repeated sweeps reuse results
    simple = constants.m_simple(gamma)
    try:
        opt = optimize_trial(gamma, cells, spec=spec, quad=quad)
    except ClrLabError:
        return UpperBound(float(gamma), simple, "simple", None)
    if opt.breakdown.objective < simple:
        return UpperBound(float(gamma), opt.breakdown.objective, "trial", opt)
    return UpperBound(float(gamma), simple, "simple", opt)


def mgamma_upper(
    gamma: float,
    spec: SearchSpec | None = None,
    cells: Iterable[tuple] | None = None,
    quad: QuadratureSpec | None = None,
) -> float:
    """Upper bound on M_gamma, never worse than ``8 / (gamma (gamma - 2) (gamma + 2))``."""
    return best_upper(gamma, spec, cells, quad).value
