"""Quadrature and minimization primitives.

Nothing in here knows about spectral bounds; every other module builds on
these four entry points:

* :func:`integrate_1d`: adaptive Gauss-Kronrod or double-exponential
  quadrature on finite, semi-infinite or infinite intervals.
* :func:`integrate_scale`: integrals against the scale-invariant measure
  ``ds/s`` on the half line, done in the logarithmic variable.
* :func:`minimize_scalar`: bounded Brent search with a bracket check.
* :func:`minimize_simplex`: Nelder-Mead with deterministic restarts inside
  a box.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize as _sopt
from scipy.stats import qmc

from .errors import BracketError, ConvergenceError, InvalidInputError

__all__ = [
    "QuadratureSpec",
    "SearchSpec",
    "SimplexResult",
    "integrate_1d",
    "integrate_scale",
    "minimize_scalar",
    "minimize_simplex",
]

ADAPTIVE = "adaptive-interval"
DOUBLE_EXP = "double-exponential"


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 500
    method: str = ADAPTIVE

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidInputError("rel_tol must be positive")
        if not self.abs_tol >= 0:
            raise InvalidInputError("abs_tol must be non-negative")
        if self.max_subdivisions < 1:
            raise InvalidInputError("max_subdivisions must be at least 1")
        if self.method not in (ADAPTIVE, DOUBLE_EXP):
            raise InvalidInputError(f"unknown quadrature method {self.method!r}")

    def replace(self, **changes) -> "QuadratureSpec":
        data = {**self.__dict__, **changes}
        return QuadratureSpec(**data)


@dataclass(frozen=True)
class SearchSpec:
    restarts: int = 16
    seed: int = 42
    max_iterations: int = 400
    x_tol: float = 1e-8
    f_tol: float = 1e-12
    box: tuple = ()

    def __post_init__(self):
        if self.restarts < 1:
            raise InvalidInputError("restarts must be at least 1")
        if self.seed < 0:
            raise InvalidInputError("seed must be non-negative")
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        for lo, hi in box:
            if not lo < hi:
                raise InvalidInputError(f"box coordinate ({lo}, {hi}) is empty")
        object.__setattr__(self, "box", box)

    def replace(self, **changes) -> "SearchSpec":
        data = {**self.__dict__, **changes}
        return SearchSpec(**data)


# ---------------------------------------------------------------------------
# Gauss-Kronrod 7/15 rule on [-1, 1]

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(15)
_G_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _call(f, x: np.ndarray) -> np.ndarray:
    y = f(x)
    y = np.asarray(y, dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape) if y.ndim == 0 else np.array([float(f(v)) for v in x])
    if np.isnan(y).any():
        bad = x[np.isnan(y)][0]
        raise InvalidInputError(f"integrand returned NaN at x={bad!r}")
    if np.isinf(y).any():
        bad = x[np.isinf(y)][0]
        raise InvalidInputError(f"integrand returned an infinite value at x={bad!r}")
    return y


def _mapped(f, a: float, b: float):
    """Return (g, lo, hi) such that the integral of g over [lo, hi] equals that of f over [a, b]."""
    if math.isfinite(a) and math.isfinite(b):
        return f, a, b
    if math.isfinite(a):
        def g(t):
            return f(a + t / (1.0 - t)) / (1.0 - t) ** 2
        return g, 0.0, 1.0
    if math.isfinite(b):
        def g(t):
            return f(b - t / (1.0 - t)) / (1.0 - t) ** 2
        return g, 0.0, 1.0

    def g(t):
        return f(t / (1.0 - t * t)) * (1.0 + t * t) / (1.0 - t * t) ** 2
    return g, -1.0, 1.0


def _gk15(g, lo: float, hi: float):
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    y = _call(g, c + r * _GK_NODES)
    k = r * float(_GK_WEIGHTS @ y)
    gauss = r * float(_G_WEIGHTS @ y)
    return k, abs(k - gauss)


def _adaptive(f, pieces, spec: QuadratureSpec):
    heap = []
    total = 0.0
    total_err = 0.0
    order = 0
    for a, b in pieces:
        g, lo, hi = _mapped(f, a, b)
        val, err = _gk15(g, lo, hi)
        heapq.heappush(heap, (-err, order, g, lo, hi, val))
        order += 1
        total += val
        total_err += err
    splits = 0
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if splits >= spec.max_subdivisions:
            raise ConvergenceError(
                f"adaptive quadrature did not converge after {splits} subdivisions",
                partial=total, err=total_err,
            )
        neg_err, _, g, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise ConvergenceError("interval became too small to bisect", partial=total, err=total_err)
        v1, e1 = _gk15(g, lo, mid)
        v2, e2 = _gk15(g, mid, hi)
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, order, g, lo, mid, v1))
        heapq.heappush(heap, (-e2, order + 1, g, mid, hi, v2))
        order += 2
        splits += 1
    # resum to shed accumulated rounding from the running totals
    total = math.fsum(item[5] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    return total, total_err


# ---------------------------------------------------------------------------
# double-exponential rules

def _de_nodes(a: float, b: float, t: np.ndarray):
    """Abscissae and weights of the double-exponential map at parameters ``t``."""
    half_pi = 0.5 * math.pi
    u = half_pi * np.sinh(t)
    du = half_pi * np.cosh(t)
    if math.isfinite(a) and math.isfinite(b):
        width = b - a
        e = np.exp(-2.0 * np.abs(u))
        gap = width * e / (1.0 + e)  # distance to the nearer endpoint
        x = np.where(t >= 0, b - gap, a + gap)
        w = width * du * 2.0 * e / (1.0 + e) ** 2
        keep = (x > a) & (x < b)
        return x[keep], w[keep]
    if math.isfinite(a):
        ex = np.exp(u)
        return a + ex, du * ex
    if math.isfinite(b):
        ex = np.exp(u)
        return b - ex, du * ex
    return np.sinh(u), du * np.cosh(u)


def _de_tmax(a: float, b: float) -> float:
    if math.isfinite(a) and math.isfinite(b):
        return 3.5
    if math.isfinite(a) or math.isfinite(b):
        return 4.5
    return 4.0


def _double_exp_piece(f, a: float, b: float, spec: QuadratureSpec):
    tmax = _de_tmax(a, b)
    max_level = min(spec.max_subdivisions, 12)
    h = 0.5
    t = np.arange(-tmax, tmax + 0.5 * h, h)
    x, w = _de_nodes(a, b, t)
    acc = float(np.dot(w, _call(f, x))) if x.size else 0.0
    estimate = h * acc
    err = math.inf
    for level in range(1, max_level + 1):
        h *= 0.5
        t = np.arange(-tmax + h, tmax, 2.0 * h)
        x, w = _de_nodes(a, b, t)
        if x.size:
            acc += float(np.dot(w, _call(f, x)))
        new = h * acc
        err = abs(new - estimate)
        estimate = new
        if level >= 2 and err <= max(spec.abs_tol, spec.rel_tol * abs(estimate)):
            return estimate, err
    raise ConvergenceError(
        f"double-exponential quadrature did not converge after {max_level} levels",
        partial=estimate, err=err,
    )


def _split(a: float, b: float, points: Sequence[float] | None):
    inner = sorted({float(p) for p in (() if points is None else points) if a < p < b})
    edges = [a, *inner, b]
    pieces = list(zip(edges[:-1], edges[1:]))
    if not inner and not math.isfinite(a) and not math.isfinite(b):
        pieces = [(a, 0.0), (0.0, b)]
    return pieces


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    interval: tuple[float, float],
    spec: QuadratureSpec | None = None,
    points: Sequence[float] | None = None,
) -> tuple[float, float]:
    """Integrate ``f`` over ``interval`` and return ``(value, err_estimate)``.

    ``f`` is called with 1-D float arrays and must return an array of the
    same shape (a scalar function is vectorized as a fallback).  Either end
    of the interval may be infinite.  ``points`` are interior breakpoints,
    typically kinks or jumps of the integrand; the interval is split there.

    Raises :class:`~clrlab.errors.ConvergenceError` (carrying the partial
    value) when the tolerance ``max(abs_tol, rel_tol*|value|)`` cannot be
    met, and :class:`~clrlab.errors.InvalidInputError` when the integrand
    produces NaN.
    """
    spec = spec or QuadratureSpec()
    a, b = float(interval[0]), float(interval[1])
    if math.isnan(a) or math.isnan(b):
        raise InvalidInputError("interval endpoints must not be NaN")
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    if a == b:
        return 0.0, 0.0
    pieces = _split(a, b, points)
    if spec.method == ADAPTIVE:
        value, err = _adaptive(f, pieces, spec)
    else:
        value = 0.0
        err = 0.0
        n = len(pieces)
        for lo, hi in pieces:
            # each piece gets its share of the absolute tolerance
            v, e = _double_exp_piece(f, lo, hi, spec.replace(abs_tol=spec.abs_tol / n))
            value += v
            err += e
    return sign * value, err


def integrate_scale(
    h: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec | None = None,
    points: Sequence[float] | None = None,
) -> tuple[float, float]:
    """Integrate ``h(s) ds/s`` over the half line via the substitution ``s = e^x``.

    ``points`` are breakpoints given in the original ``s`` variable.
    """
    log_points = [math.log(p) for p in (points or ()) if p > 0]

    def g(x):
        # keep s finite and positive; the far ends carry no weight for integrable h
        return h(np.exp(np.clip(x, -700.0, 700.0)))

    return integrate_1d(g, (-math.inf, math.inf), spec, log_points)


# ---------------------------------------------------------------------------
# minimization

def minimize_scalar(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    spec: SearchSpec | None = None,
) -> tuple[float, float]:
    """Bounded Brent minimization of a unimodal ``f`` on ``bracket``.

    Raises :class:`~clrlab.errors.BracketError` when the minimum sits on the
    boundary of the bracket, i.e. the bracket holds no interior minimum.
    """
    spec = spec or SearchSpec()
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise InvalidInputError(f"empty bracket ({lo}, {hi})")
    res = _sopt.minimize_scalar(
        f, bounds=(lo, hi), method="bounded",
        options={"xatol": spec.x_tol, "maxiter": spec.max_iterations},
    )
    x, fx = float(res.x), float(res.fun)
    edge = 10.0 * spec.x_tol + 1e-9 * (hi - lo)
    if x - lo <= edge or hi - x <= edge:
        raise BracketError(f"minimum at the edge of the bracket ({lo}, {hi})", argmin=x, value=fx)
    if not res.success:
        raise ConvergenceError("scalar minimization did not converge", partial=(x, fx))
    return x, fx


@dataclass
class SimplexResult:
    argmin: np.ndarray
    min: float
    trace: list = field(default_factory=list)
    evaluations: int = 0
    converged: bool = False


_PENALTY = 1e6


def _nelder_mead(fun, x0, scale, spec: SearchSpec, restart: int, trace: list):
    n = len(x0)
    simplex = np.empty((n + 1, n))
    simplex[0] = x0
    for i in range(n):
        simplex[i + 1] = x0
        simplex[i + 1, i] += scale[i]
    values = np.array([fun(p) for p in simplex])
    evals = n + 1
    converged = False
    if not np.isfinite(values).any():
        return simplex[0], math.inf, evals, False
    for it in range(spec.max_iterations):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        trace.append((restart, it, float(values[0])))
        spread_x = np.max(np.abs(simplex[1:] - simplex[0]))
        with np.errstate(invalid="ignore"):
            spread_f = np.max(np.abs(values[1:] - values[0]))
        if spread_x <= spec.x_tol and spread_f <= spec.f_tol:
            converged = True
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + (centroid - worst)
        fr = fun(xr)
        evals += 1
        if fr < values[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = fun(xe)
            evals += 1
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            if fr < values[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (worst - centroid)
            fc = fun(xc)
            evals += 1
            if fc < min(fr, values[-1]):
                simplex[-1], values[-1] = xc, fc
            else:
                simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
                values[1:] = [fun(p) for p in simplex[1:]]
                evals += n
    best = int(np.argmin(values))
    return simplex[best].copy(), float(values[best]), evals, converged


def minimize_simplex(
    f: Callable[[np.ndarray], float],
    spec: SearchSpec,
    x0: Sequence[float] | None = None,
) -> SimplexResult:
    """Nelder-Mead minimization over ``spec.box`` with ``spec.restarts`` starts.

    Start points come from a scrambled Halton sequence seeded with
    ``spec.seed``; when ``x0`` is given it replaces the first one.  Points
    outside the box are evaluated at their projection onto the box plus
    ``1e6 * distance**2``.  The result is the best point over all restarts
    and is bitwise reproducible for a fixed spec.
    """
    if not spec.box:
        raise InvalidInputError("minimize_simplex needs a box")
    lo = np.array([b[0] for b in spec.box])
    hi = np.array([b[1] for b in spec.box])
    width = hi - lo

    def fun(x):
        x = np.asarray(x, dtype=float)
        clipped = np.clip(x, lo, hi)
        dist2 = float(np.sum((x - clipped) ** 2))
        try:
            value = float(f(clipped))
        except (ConvergenceError, InvalidInputError, FloatingPointError, OverflowError):
            return math.inf
        if math.isnan(value):
            return math.inf
        return value + _PENALTY * dist2

    starts = qmc.Halton(d=len(lo), scramble=True, seed=spec.seed).random(spec.restarts)
    starts = lo + starts * width
    if x0 is not None:
        starts[0] = np.clip(np.asarray(x0, dtype=float), lo, hi)

    trace: list = []
    best_x, best_f = None, math.inf
    total = 0
    best_ok = False
    for k, start in enumerate(starts):
        x, fx, evals, ok = _nelder_mead(fun, start, 0.1 * width, spec, k, trace)
        total += evals
        if fx < best_f:
            best_x, best_f, best_ok = x, fx, ok
    if best_x is None or not math.isfinite(best_f):
        raise ConvergenceError("every simplex restart diverged", partial=None)
    return SimplexResult(
        argmin=np.clip(best_x, lo, hi), min=best_f, trace=trace,
        evaluations=total, converged=best_ok,
    )
