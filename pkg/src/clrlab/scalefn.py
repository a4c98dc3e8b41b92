"""Real functions on the half line under the scale-invariant measure ds/s.

Two representations are supported:

``PiecewisePower``
    A finite sum of power laws ``c * s**a`` restricted to disjoint supports
    ``[lo, hi)``.  Norms, convolutions and suprema are exact.

``LogGrid``
    Samples on strictly increasing nodes, linearly interpolated in
    ``(log s, m)`` and zero outside the node range.

The multiplicative convolution is ``(m1 * m2)(t) = int m1(t/s) m2(s) ds/s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DivergenceError, InvalidInputError
from .numerics import QuadratureSpec, integrate_1d

__all__ = [
    "Segment",
    "PiecewisePower",
    "LogGrid",
    "GridLayout",
    "TailValue",
    "ScaleFn",
    "DEFAULT_LAYOUT",
    "evaluate",
    "mconvolve",
    "l2_scalenorm",
    "sup_scalenorm",
    "tail_functional",
    "simple_pair",
    "min_kernel",
    "clipped_identity",
]


@dataclass(frozen=True)
class Segment:
    coef: float
    exponent: float
    lo: float
    hi: float = math.inf


@dataclass(frozen=True)
class PiecewisePower:
    segments: tuple

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        segs = tuple(sorted(segs, key=lambda s: s.lo))
        for s in segs:
            if not (s.lo >= 0 and s.lo < s.hi):
                raise InvalidInputError(f"bad segment support [{s.lo}, {s.hi})")
            if s.lo == 0 and s.exponent < 0 and s.coef != 0:
                raise InvalidInputError("a negative power cannot reach s = 0")
        for a, b in zip(segs, segs[1:]):
            if b.lo < a.hi:
                raise InvalidInputError("segment supports overlap")
        object.__setattr__(self, "segments", segs)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for seg in self.segments:
            mask = (s >= seg.lo) & (s < seg.hi)
            if mask.any():
                out[mask] = seg.coef * s[mask] ** seg.exponent
        return out

    def dilate(self, c: float) -> "PiecewisePower":
        """Return ``s -> m(s / c)``."""
        return PiecewisePower(tuple(
            Segment(g.coef * c ** (-g.exponent), g.exponent, g.lo * c, g.hi * c)
            for g in self.segments
        ))

    def invert(self) -> "PiecewisePower":
        """Return ``s -> m(1 / s)`` (endpoint conventions are immaterial under ds/s)."""
        segs = []
        for g in self.segments:
            lo = 0.0 if math.isinf(g.hi) else 1.0 / g.hi
            hi = math.inf if g.lo == 0 else 1.0 / g.lo
            segs.append(Segment(g.coef, -g.exponent, lo, hi))
        return PiecewisePower(tuple(segs))

    def breakpoints(self) -> list:
        pts = set()
        for g in self.segments:
            for p in (g.lo, g.hi):
                if 0 < p < math.inf:
                    pts.add(p)
        return sorted(pts)


@dataclass(frozen=True)
class GridLayout:
    """Geometric node layout: ``n`` nodes from ``s_min`` to ``s_max``."""

    s_min: float = 1e-8
    s_max: float = 1e8
    n: int = 4097

    def __post_init__(self):
        if not (0 < self.s_min < self.s_max) or self.n < 2:
            raise InvalidInputError("grid layout needs 0 < s_min < s_max and n >= 2")

    @property
    def log_nodes(self) -> np.ndarray:
        return np.linspace(math.log(self.s_min), math.log(self.s_max), self.n)

    @property
    def nodes(self) -> np.ndarray:
        return np.exp(self.log_nodes)

    @property
    def step(self) -> float:
        return (math.log(self.s_max) - math.log(self.s_min)) / (self.n - 1)


# 4097 rather than 4096 nodes so that s = 1 is a node and the grid maps onto itself under s -> 1/s
DEFAULT_LAYOUT = GridLayout()


@dataclass(frozen=True)
class LogGrid:
    log_nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.log_nodes, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2:
            raise InvalidInputError("LogGrid needs matching 1-D node and value arrays")
        if not np.all(np.diff(x) > 0):
            raise InvalidInputError("LogGrid nodes must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("LogGrid values must be finite")
        x.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "log_nodes", x)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, fn, layout: GridLayout = DEFAULT_LAYOUT) -> "LogGrid":
        return cls(layout.log_nodes, np.asarray(fn(layout.nodes), dtype=float))

    @property
    def nodes(self) -> np.ndarray:
        return np.exp(self.log_nodes)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            x = np.log(s)
        return np.interp(x, self.log_nodes, self.values, left=0.0, right=0.0)

    def dilate(self, c: float) -> "LogGrid":
        return LogGrid(self.log_nodes + math.log(c), self.values)

    def invert(self) -> "LogGrid":
        return LogGrid(-self.log_nodes[::-1], self.values[::-1])

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        d = np.diff(self.log_nodes)
        return bool(np.all(np.abs(d - d[0]) <= rtol * abs(d[0])))


ScaleFn = Union[PiecewisePower, LogGrid]


@dataclass(frozen=True)
class TailValue:
    value: float
    truncation_bound: float


def evaluate(m: ScaleFn, s) -> np.ndarray | float:
    """Evaluate ``m`` at positive ``s``; zero outside the support."""
    arr = np.asarray(s, dtype=float)
    if np.any(~(arr > 0)):
        raise InvalidInputError("ScaleFn is only defined for s > 0")
    out = m(arr)
    return float(out) if np.ndim(s) == 0 else out


# ---------------------------------------------------------------------------
# convenient closed-form functions

def simple_pair(factor: float = 2.0) -> tuple[PiecewisePower, PiecewisePower]:
    """``m1 = factor * s`` on (0, 1] and ``m2 = 1/s`` on [1, inf).

    With ``factor = 2`` the convolution is ``min(t, 1/t)`` and the product of
    the norms is one.
    """
    m1 = PiecewisePower(((factor, 1.0, 0.0, 1.0),))
    m2 = PiecewisePower(((1.0, -1.0, 1.0, math.inf),))
    return m1, m2


def min_kernel() -> PiecewisePower:
    """``min(t, 1/t)``."""
    return PiecewisePower(((1.0, 1.0, 0.0, 1.0), (1.0, -1.0, 1.0, math.inf)))


def clipped_identity(level: float) -> PiecewisePower:
    """``min(t, level)``."""
    return PiecewisePower(((1.0, 1.0, 0.0, level), (level, 0.0, level, math.inf)))


# ---------------------------------------------------------------------------
# convolution

def _power_integral(e: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Integral of ``s**(e-1)`` over ``[lo, hi]`` elementwise; zero where empty."""
    out = np.zeros_like(lo)
    ok = hi > lo
    if not ok.any():
        return out
    l, h = lo[ok], hi[ok]
    if e == 0:
        if np.any(l == 0) or np.any(np.isinf(h)):
            raise ConvergenceError("logarithmically divergent convolution integral")
        out[ok] = np.log(h / l)
    elif e > 0:
        if np.any(np.isinf(h)):
            raise ConvergenceError("convolution integral diverges at s = infinity")
        out[ok] = (h ** e - l ** e) / e
    else:
        if np.any(l == 0):
            raise ConvergenceError("convolution integral diverges at s = 0")
        hp = np.where(np.isinf(h), 0.0, h ** e)
        out[ok] = (hp - l ** e) / e
    return out


def _convolve_power(m1: PiecewisePower, m2: PiecewisePower, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    with np.errstate(divide="ignore"):
        for g1 in m1.segments:
            for g2 in m2.segments:
                # m1(t/s) is live for t/hi1 < s <= t/lo1
                lo = np.maximum(g2.lo, t / g1.hi if math.isfinite(g1.hi) else np.zeros_like(t))
                hi = np.minimum(g2.hi, t / g1.lo if g1.lo > 0 else np.full_like(t, math.inf))
                e = g2.exponent - g1.exponent
                try:
                    part = _power_integral(e, lo, hi)
                except ConvergenceError as exc:
                    bad = t[(hi > lo)][0]
                    raise ConvergenceError(f"{exc} at node t={bad!r}") from None
                out += g1.coef * g2.coef * t ** g1.exponent * part
    return out


def _convolve_grids(m1: LogGrid, m2: LogGrid, layout: GridLayout) -> np.ndarray:
    """Trapezoid rule on the shared uniform log grid."""
    h = layout.step
    x = layout.log_nodes
    shift = x[0] / h
    k0 = int(round(shift))
    aligned = (
        m1.is_uniform() and m2.is_uniform()
        and abs(shift - k0) < 1e-9
        and np.allclose(np.diff(m1.log_nodes[:2]), h, rtol=1e-9)
        and np.allclose(np.diff(m2.log_nodes[:2]), h, rtol=1e-9)
    )
    if aligned:
        i1 = (m1.log_nodes[0] / h)
        i2 = (m2.log_nodes[0] / h)
        aligned = abs(i1 - round(i1)) < 1e-6 and abs(i2 - round(i2)) < 1e-6
    if not aligned:
        raise InvalidInputError("grid convolution needs node sets on the target lattice")
    # integer lattice positions: log s = j * h
    j1 = int(round(m1.log_nodes[0] / h))
    j2 = int(round(m2.log_nodes[0] / h))
    # grid functions vanish outside their node range, so the trapezoid rule
    # over the whole line is a plain sum; this keeps it exactly symmetric
    full = np.convolve(m1.values, m2.values)  # full[n] sits at lattice position j1 + j2 + n
    pos = np.arange(layout.n) + k0 - (j1 + j2)
    out = np.zeros(layout.n)
    ok = (pos >= 0) & (pos < full.size)
    out[ok] = h * full[pos[ok]]
    return out


def mconvolve(m1: ScaleFn, m2: ScaleFn, layout: GridLayout = DEFAULT_LAYOUT,
              spec: QuadratureSpec | None = None) -> LogGrid:
    """Multiplicative convolution sampled on the nodes of ``layout``.

    Exact for two ``PiecewisePower`` operands.  Two ``LogGrid`` operands on
    the lattice of ``layout`` use the trapezoid rule in the log variable;
    any other combination falls back to adaptive quadrature node by node.
    """
    t = layout.nodes
    if isinstance(m1, PiecewisePower) and isinstance(m2, PiecewisePower):
        return LogGrid(layout.log_nodes, _convolve_power(m1, m2, t))
    if isinstance(m1, LogGrid) and isinstance(m2, LogGrid):
        try:
            return LogGrid(layout.log_nodes, _convolve_grids(m1, m2, layout))
        except InvalidInputError:
            pass
    spec = spec or QuadratureSpec(rel_tol=1e-9, abs_tol=1e-15)
    lo1, hi1 = _support_range(m1)
    lo2, hi2 = _support_range(m2)
    k1 = np.log(_kinks(m1))
    k2 = np.log(_kinks(m2))
    values = np.zeros_like(t)
    for i, ti in enumerate(t):
        # m1(ti/s) m2(s) lives on s in [ti/hi1, ti/lo1] intersected with [lo2, hi2]
        a = max(lo2, ti / hi1 if math.isfinite(hi1) else 0.0)
        b = min(hi2, ti / lo1 if lo1 > 0 else math.inf)
        if not a < b:
            continue
        xa = math.log(a) if a > 0 else -math.inf
        xb = math.log(b) if math.isfinite(b) else math.inf
        pts = np.concatenate([k2, math.log(ti) - k1])
        pts = np.unique(pts[(pts > xa) & (pts < xb)])
        local = spec.replace(max_subdivisions=spec.max_subdivisions + pts.size)
        try:
            v, _ = integrate_1d(lambda x: m1(ti * np.exp(-x)) * m2(np.exp(x)), (xa, xb), local, pts)
        except ConvergenceError as exc:
            raise ConvergenceError(f"convolution failed at node t={ti!r}: {exc}", partial=exc.partial) from None
        values[i] = v
    return LogGrid(layout.log_nodes, values)


def _kinks(m: ScaleFn) -> np.ndarray:
    """Points where ``m`` may fail to be smooth."""
    if isinstance(m, PiecewisePower):
        return np.array(m.breakpoints(), dtype=float)
    return m.nodes


def _support_range(m: ScaleFn) -> tuple[float, float]:
    if isinstance(m, PiecewisePower):
        if not m.segments:
            return 1.0, 1.0
        return m.segments[0].lo, m.segments[-1].hi
    return float(m.nodes[0]), float(m.nodes[-1])


# ---------------------------------------------------------------------------
# norms

def l2_scalenorm(m: ScaleFn) -> float:
    """``(int m(s)^2 ds/s)^(1/2)``; closed form for power segments, Simpson on grids."""
    if isinstance(m, PiecewisePower):
        total = 0.0
        for g in m.segments:
            if g.coef == 0:
                continue
            e = 2.0 * g.exponent
            c2 = g.coef * g.coef
            if e == 0:
                if g.lo == 0 or math.isinf(g.hi):
                    raise ConvergenceError("L2(ds/s) norm diverges (constant on an infinite log range)")
                total += c2 * math.log(g.hi / g.lo)
            elif e > 0:
                if math.isinf(g.hi):
                    raise ConvergenceError("L2(ds/s) norm diverges at infinity")
                total += c2 * (g.hi ** e - g.lo ** e) / e
            else:
                if g.lo == 0:
                    raise ConvergenceError("L2(ds/s) norm diverges at zero")
                hi = 0.0 if math.isinf(g.hi) else g.hi ** e
                total += c2 * (hi - g.lo ** e) / e
        return math.sqrt(total)
    # composite Simpson on the node values: the samples stand for a smooth
    # function, and the log-linear interpolant would cost a factor h^2/8
    return math.sqrt(float(integrate.simpson(m.values ** 2, x=m.log_nodes)))


def sup_scalenorm(m: ScaleFn) -> float:
    """Supremum of ``|m|``; segment-wise exact for power segments, node maximum on grids."""
    if isinstance(m, PiecewisePower):
        best = 0.0
        for g in m.segments:
            if g.coef == 0:
                continue
            ends = []
            for p in (g.lo, g.hi):
                if p == 0:
                    ends.append(0.0 if g.exponent > 0 else (abs(g.coef) if g.exponent == 0 else math.inf))
                elif math.isinf(p):
                    ends.append(0.0 if g.exponent < 0 else (abs(g.coef) if g.exponent == 0 else math.inf))
                else:
                    ends.append(abs(g.coef) * p ** g.exponent)
            best = max(best, *ends)
        return best
    return float(np.max(np.abs(m.values))) if m.values.size else 0.0


# ---------------------------------------------------------------------------
# tail functional

def _check_power_tail(m: PiecewisePower, gamma: float):
    segs = m.segments
    first = segs[0] if segs else None
    if first is None or first.lo != 0 or first.exponent != 1.0 or first.coef != 1.0:
        raise DivergenceError(
            "tail functional diverges at t = 0: m(t) must equal t near the origin"
        )
    last = segs[-1]
    if math.isinf(last.hi) and last.coef != 0 and 2.0 * last.exponent >= gamma:
        raise DivergenceError("tail functional diverges at t = infinity")


def tail_functional(m: ScaleFn, gamma: float, spec: QuadratureSpec | None = None,
                    window: tuple[float, float] | None = None) -> TailValue:
    """``R(m) = int_0^inf (1 - m(t)/t)^2 t^(1-gamma) dt``.

    Power-segment functions are integrated over the whole half line (the
    truncation bound is zero).  Grid functions are integrated over their
    node range, or over ``window`` intersected with it; the contribution
    outside is estimated from power-law extrapolation of the integrand at
    the window edges and returned as ``truncation_bound``.
    """
    if not gamma > 2 + 1e-9:
        raise InvalidInputError(f"tail functional needs gamma > 2, got {gamma}")
    spec = spec or QuadratureSpec()
    if isinstance(m, PiecewisePower):
        _check_power_tail(m, gamma)

        def integrand(x):
            with np.errstate(over="ignore"):
                t = np.exp(x)
            return (1.0 - m(t) / t) ** 2 * np.exp((2.0 - gamma) * x)

        # the first segment is m(t) = t, so the integrand vanishes below its end
        start = math.log(m.segments[0].hi) if math.isfinite(m.segments[0].hi) else math.inf
        if math.isinf(start):
            return TailValue(0.0, 0.0)
        pts = [math.log(p) for p in m.breakpoints() if p > m.segments[0].hi]
        value, _ = integrate_1d(integrand, (start, math.inf), spec, pts)
        return TailValue(value, 0.0)
    return _grid_tail(m, gamma, window)


def _grid_tail(m: LogGrid, gamma: float, window) -> TailValue:
    x = m.log_nodes
    lo, hi = x[0], x[-1]
    if window is not None:
        lo = max(lo, math.log(window[0]))
        hi = min(hi, math.log(window[1]))
        if not lo < hi:
            raise InvalidInputError("tail window does not meet the grid")
    sel = (x >= lo - 1e-12) & (x <= hi + 1e-12)
    if sel.sum() < 3:
        raise InvalidInputError("tail window holds fewer than three grid nodes")
    xs = x[sel]
    lo, hi = xs[0], xs[-1]

    def g(xv):
        t = np.exp(xv)
        return (1.0 - m(t) / t) ** 2 * np.exp((2.0 - gamma) * xv)

    # composite Simpson on node values; between nodes the interpolant is
    # only first-order accurate and t^(1-gamma) would amplify its defect
    ts = np.exp(xs)
    vals = (1.0 - m.values[sel] / ts) ** 2 * np.exp((2.0 - gamma) * xs)
    value = float(integrate.simpson(vals, x=xs))

    # edge extrapolation: in the log variable the integrand behaves like
    # exp(kappa * x); the part beyond an edge is g(edge) / |kappa|
    scale = max(abs(value), 1.0)
    step = math.log(10.0)
    a0, a1 = float(g(lo)), float(g(min(lo + step, hi)))
    low = 0.0
    if a0 > 1e-14 * scale:
        kappa = math.log(a1 / a0) / step if a1 > 0 else -math.inf
        if kappa <= 0.0:
            raise DivergenceError(
                f"integrand does not decay toward t = 0 (window edge t={math.exp(lo):.3g})"
            )
        low = a0 / kappa
    b0, b1 = float(g(hi)), float(g(max(hi - step, lo)))
    high = 0.0
    if b0 > 1e-14 * scale:
        kappa = math.log(b0 / b1) / step if b1 > 0 else -math.inf
        high = b0 / -kappa if kappa < 0.0 else math.inf
    return TailValue(value, low + high)
