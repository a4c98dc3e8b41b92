"""Phase-space bounds for ``T(P) + V`` with a radial kinetic symbol ``T``.

The bound reads ``N(T(P) + V) <= lambda^-2 int G_T((lambda + 1)^2 V_-(x)) dx`` with

    G_T(u) = int_{T(eta) < u} (sqrt(u/T) - sqrt(T/u))^2 d eta / (2 pi)^d.

A tabulated symbol is interpolated log-log and extended by power laws, so on
every piece ``T(r) = c r^k`` and ``G_T`` is a finite sum of power integrals.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import constants
from .errors import (
    BracketError,
    ConvergenceError,
    DivergenceError,
    InvalidInputError,
    SchemaError,
)
from .numerics import QuadratureSpec, SearchSpec, integrate_1d, minimize_scalar
from .scalefn import ScaleFn, min_kernel

__all__ = [
    "RadialSymbol",
    "PotentialProfile",
    "BoundResult",
    "LAMBDA_BRACKET",
    "power_symbol",
    "tabulated_symbol",
    "hs_density",
    "g_t",
    "g_t_power_closed",
    "bound_at_lambda",
    "bound_opt",
    "power_bound_closed",
    "radial_weights",
    "load_profile",
    "load_symbol",
]

LAMBDA_BRACKET = (1e-4, 1e4)


@dataclass(frozen=True)
class RadialSymbol:
    """``T(eta) = T(|eta|)`` in dimension ``d``.

    ``kind == "power"``: ``T(r) = r^(2 alpha_order)``.
    ``kind == "tabulated"``: values on increasing radii, log-log interpolated,
    ``t[-1] (r/r[-1])^tail_exp`` beyond the table and ``t[0] (r/r[0])^lead_exp``
    before it.
    """

    kind: str
    d: int
    alpha_order: float = 1.0
    r: tuple = ()
    t: tuple = ()
    tail_exp: float = 0.0
    lead_exp: float = 0.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InvalidInputError(f"dimension must be an integer >= 1, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        if self.kind == "power":
            if not (self.alpha_order > 0 and math.isfinite(self.alpha_order)):
                raise InvalidInputError("power symbol needs alpha > 0")
        elif self.kind == "tabulated":
            r = tuple(float(x) for x in self.r)
            t = tuple(float(x) for x in self.t)
            if len(r) < 2 or len(r) != len(t):
                raise InvalidInputError("tabulated symbol needs matching r and t lists of length >= 2")
            if not all(math.isfinite(x) for x in r + t):
                raise InvalidInputError("tabulated symbol values must be finite")
            if r[0] <= 0 or any(b <= a for a, b in zip(r, r[1:])):
                raise InvalidInputError("radii must be positive and strictly increasing")
            if any(x < 0 for x in t):
                raise InvalidInputError("symbol values must be nonnegative")
            if not (math.isfinite(self.tail_exp) and math.isfinite(self.lead_exp)):
                raise InvalidInputError("tail and lead exponents must be finite")
            if self.tail_exp < 0:
                raise InvalidInputError("tail exponent must be >= 0")
            object.__setattr__(self, "r", r)
            object.__setattr__(self, "t", t)
        else:
            raise InvalidInputError(f"unknown symbol kind {self.kind!r}")

    @property
    def gamma(self) -> float:
        if self.kind != "power":
            raise InvalidInputError("gamma = d / alpha is defined for power symbols only")
        return self.d / self.alpha_order

    def pieces(self) -> list[tuple[float, float, float, float]]:
        """``(lo, hi, c, k)`` with ``T(r) = c r^k`` on ``[lo, hi)``; ``c = 0`` marks ``T = 0``."""
        if self.kind == "power":
            return [(0.0, math.inf, 1.0, 2.0 * self.alpha_order)]
        r, t = self.r, self.t
        out = []

        def seg(lo, hi, r0, t0, k):
            if t0 == 0:
                out.append((lo, hi, 0.0, 0.0))
            else:
                out.append((lo, hi, t0 * r0 ** -k, k))

        seg(0.0, r[0], r[0], t[0], self.lead_exp)
        for i in range(len(r) - 1):
            if t[i] == 0 or t[i + 1] == 0:
                out.append((r[i], r[i + 1], 0.0, 0.0))
            else:
                k = math.log(t[i + 1] / t[i]) / math.log(r[i + 1] / r[i])
                seg(r[i], r[i + 1], r[i], t[i], k)
        seg(r[-1], math.inf, r[-1], t[-1], self.tail_exp)
        return out

    def __call__(self, radius):
        radius = np.asarray(radius, dtype=float)
        if self.kind == "power":
            return radius ** (2.0 * self.alpha_order)
        out = np.zeros_like(radius)
        for lo, hi, c, k in self.pieces():
            mask = (radius >= lo) & (radius < hi)
            if mask.any() and c > 0:
                out[mask] = c * radius[mask] ** k
        return out

    def to_dict(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "alpha": self.alpha_order}
        return {"kind": "tabulated", "r": list(self.r), "t": list(self.t),
                "tail_exp": self.tail_exp, "lead_exp": self.lead_exp}


def power_symbol(d: int, alpha_order: float) -> RadialSymbol:
    return RadialSymbol("power", d, alpha_order=alpha_order)


def tabulated_symbol(d: int, r: Sequence[float], t: Sequence[float],
                     tail_exp: float, lead_exp: float) -> RadialSymbol:
    return RadialSymbol("tabulated", d, r=tuple(r), t=tuple(t), tail_exp=tail_exp, lead_exp=lead_exp)


@dataclass(frozen=True)
class PotentialProfile:
    """Samples ``(u_i, w_i)``: ``V_-`` takes the value ``u_i`` on a set of measure ``w_i``."""

    samples: tuple
    d: int | None = None
    label: str = ""

    def __post_init__(self):
        rows = []
        for i, row in enumerate(self.samples):
            try:
                u, w = (float(x) for x in row)
            except (TypeError, ValueError):
                raise SchemaError("sample must be a (u, w) pair of numbers", row=i) from None
            if not (math.isfinite(u) and math.isfinite(w)):
                raise SchemaError("u and w must be finite numbers", row=i)
            if u < 0:
                raise SchemaError(f"u must be >= 0, got {u}", row=i)
            if w <= 0:
                raise SchemaError(f"w must be > 0, got {w}", row=i)
            rows.append((u, w))
        object.__setattr__(self, "samples", tuple(rows))

    def moment(self, gamma: float) -> float:
        """``sum_i w_i u_i^(gamma/2)``."""
        return math.fsum(w * u ** (0.5 * gamma) for u, w in self.samples)

    def scaled(self, c: float) -> "PotentialProfile":
        return PotentialProfile(tuple((u, c * w) for u, w in self.samples), self.d, self.label)


@dataclass(frozen=True)
class BoundResult:
    lambda_star: float | None
    bound: float
    converged: bool = True
    note: str = ""

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.bound)


# ---------------------------------------------------------------------------
# phase-space functionals

def hs_density(
    g: RadialSymbol | Callable,
    m: ScaleFn,
    u: float,
    d: int | None = None,
    spec: QuadratureSpec | None = None,
    points: Sequence[float] = (),
) -> float:
    """``|S^(d-1)| / (2 pi)^d int_0^inf (u g(r) - m(u g(r)))^2 r^(d-1) dr`` by quadrature.

    ``g`` is a radial function (a symbol or any vectorized callable of the
    radius).  ``points`` are radii where the integrand may have kinks.
    """
    if not u >= 0:
        raise InvalidInputError(f"u must be >= 0, got {u!r}")
    if d is None:
        if not isinstance(g, RadialSymbol):
            raise InvalidInputError("dimension required when g is a plain function")
        d = g.d
    if u == 0:
        return 0.0
    spec = spec or QuadratureSpec()

    def integrand(y):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            radius = np.exp(y)
            a = u * np.asarray(g(radius), dtype=float)
            fin = np.isfinite(a)
            mv = np.zeros_like(a)
            pos = fin & (a > 0)
            if pos.any():
                mv[pos] = m(a[pos])
            diff = np.where(fin, a - mv, np.inf)
            val = diff * diff * radius ** d
            val = np.where(np.isnan(val), np.inf, val)
        # far out on the log axis non-finite values come from under/overflow;
        # decay there has already been checked
        return np.where(~np.isfinite(val) & (np.abs(y) > 100.0), 0.0, val)

    # the integral is finite only if the integrand decays at both ends of the log axis
    for y_far, y_near in ((-60.0, -50.0), (60.0, 50.0)):
        far, near = integrand(np.array([y_far, y_near]))
        if not np.isfinite(far) or (far > 1e-300 and far >= near):
            raise DivergenceError(
                f"hs_density integrand does not decay toward r = {'0' if y_far < 0 else 'infinity'}"
            )
    pts = [math.log(p) for p in points if p > 0]
    try:
        value, _ = integrate_1d(integrand, (-math.inf, math.inf), spec, pts)
    except InvalidInputError:
        raise DivergenceError("hs_density integrand is not finite") from None
    return constants.sphere_area(d) / (2.0 * math.pi) ** d * value


def _power_integral(e: float, lo: float, hi: float) -> float:
    """``int_lo^hi r^(e-1) dr`` (``+inf`` when divergent)."""
    if e == 0:
        if lo == 0 or math.isinf(hi):
            return math.inf
        return math.log(hi / lo)
    if e > 0:
        if math.isinf(hi):
            return math.inf
        return (hi ** e - lo ** e) / e
    if lo == 0:
        return math.inf
    top = 0.0 if math.isinf(hi) else hi ** e
    return (top - lo ** e) / e


def _scaled_power_integral(log_coef: float, e: float, lo: float, hi: float) -> float:
    """``exp(log_coef) * int_lo^hi r^(e-1) dr`` without intermediate over/underflow."""
    if e == 0 or (e > 0 and math.isinf(hi)) or (e < 0 and lo == 0):
        return _power_integral(e, lo, hi)
    if e > 0:
        log_int = e * math.log(hi) + math.log1p(-((lo / hi) ** e)) - math.log(e)
    else:
        ratio = 0.0 if math.isinf(hi) else (hi / lo) ** e
        log_int = e * math.log(lo) + math.log1p(-ratio) - math.log(-e)
    return math.exp(log_coef + log_int)


def g_t(T: RadialSymbol, u: float) -> float:
    """``G_T(u)``, returning ``+inf`` in the weak-coupling case.

    On each power piece ``T = c r^k`` the set ``{T < u}`` is an interval with
    analytic endpoints and the integrand ``u/T - 2 + T/u`` integrates in
    closed form against ``r^(d-1) dr``.
    """
    if not u >= 0:
        raise InvalidInputError(f"u must be >= 0, got {u!r}")
    if u == 0:
        return 0.0
    d = T.d
    total = []
    for lo, hi, c, k in T.pieces():
        if c == 0:
            return math.inf  # T vanishes on an interval: u/T is infinite there
        # interval of r in [lo, hi) where c r^k < u
        if k == 0:
            if c >= u:
                continue
            a, b = lo, hi
        else:
            cross = (u / c) ** (1.0 / k)
            a, b = (lo, min(hi, cross)) if k > 0 else (max(lo, cross), hi)
        if not a < b:
            continue
        # u/c overflows for subnormal u; keep the coefficients in log form
        log_ratio = math.log(u) - math.log(c)
        parts = (
            _scaled_power_integral(log_ratio, d - k, a, b),
            -2.0 * _scaled_power_integral(0.0, d, a, b),
            _scaled_power_integral(-log_ratio, d + k, a, b),
        )
        if any(math.isinf(x) for x in parts):
            return math.inf
        total.extend(parts)
    return constants.sphere_area(d) / (2.0 * math.pi) ** d * math.fsum(total)


def g_t_power_closed(d: int, alpha_order: float, u: float) -> float:
    """``G_T(u)`` for ``T = |eta|^(2 alpha)`` from the simple-choice formula."""
    gamma = d / alpha_order
    return (u ** (0.5 * gamma) * gamma * constants.semiclassical_factor(d)
            * 8.0 / ((gamma - 2.0) * gamma * (gamma + 2.0)))


def bound_at_lambda(T: RadialSymbol, V: PotentialProfile, lam: float) -> float:
    """``lambda^-2 sum_i w_i G_T((lambda + 1)^2 u_i)``."""
    if not lam > 0:
        raise InvalidInputError(f"lambda must be > 0, got {lam!r}")
    s = (lam + 1.0) ** 2
    terms = []
    for u, w in V.samples:
        gv = g_t(T, s * u)
        if math.isinf(gv):
            return math.inf
        terms.append(w * gv)
    return math.fsum(terms) / lam ** 2


def bound_opt(T: RadialSymbol, V: PotentialProfile, spec: SearchSpec | None = None,
              bracket: tuple[float, float] = LAMBDA_BRACKET) -> BoundResult:
    """Minimize :func:`bound_at_lambda` over ``lambda`` (Brent in ``log lambda``)."""
    if not V.samples:
        raise InvalidInputError("potential profile is empty")
    spec = spec or SearchSpec()
    lo, hi = bracket
    if not (0 < lo < hi):
        raise InvalidInputError("lambda bracket must satisfy 0 < lo < hi")
    if math.isinf(bound_at_lambda(T, V, lo)):
        # G_T is nondecreasing, so every larger lambda is unbounded as well
        return BoundResult(None, math.inf, True, "unbounded (weak-coupling regime)")
    if all(u == 0 for u, _ in V.samples):
        return BoundResult(None, 0.0, True, "V_- vanishes")

    def f(y):
        v = bound_at_lambda(T, V, math.exp(y))
        return v if math.isfinite(v) else 1e300

    try:
        y, val = minimize_scalar(f, (math.log(lo), math.log(hi)), spec)
    except BracketError as exc:
        lam = math.exp(exc.argmin) if exc.argmin is not None else None
        raise ConvergenceError(
            f"optimal lambda lies at the edge of [{lo:g}, {hi:g}]",
            partial=(lam, exc.value),
        ) from None
    return BoundResult(math.exp(y), val, True)


def power_bound_closed(d: int, alpha_order: float, V: PotentialProfile) -> tuple[float, float]:
    """``(lambda*, bound)`` for a power symbol: ``2/(gamma-2)`` and ``c_simple * factor * moment``."""
    gamma = d / alpha_order
    bound = constants.c_simple(gamma) * constants.semiclassical_factor(d) * V.moment(gamma)
    return 2.0 / (gamma - 2.0), bound


# ---------------------------------------------------------------------------
# input files

def radial_weights(r: Sequence[float], d: int) -> np.ndarray:
    """``|S^(d-1)| r_i^(d-1) dr_i`` with trapezoid cells ``dr_i``."""
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 2 or np.any(np.diff(r) <= 0) or r[0] < 0:
        raise InvalidInputError("radial grid must be nonnegative and strictly increasing")
    dr = np.empty_like(r)
    dr[1:-1] = 0.5 * (r[2:] - r[:-2])
    dr[0] = 0.5 * (r[1] - r[0])
    dr[-1] = 0.5 * (r[-1] - r[-2])
    return constants.sphere_area(d) * r ** (d - 1) * dr


def _read_source(source) -> Mapping:
    if isinstance(source, Mapping):
        return source
    if isinstance(source, (str, os.PathLike)):
        text = str(source)
        if isinstance(source, os.PathLike) or not text.lstrip().startswith("{"):
            try:
                with open(source, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise InvalidInputError(f"cannot read {source}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
        if not isinstance(data, Mapping):
            raise SchemaError("top level must be a JSON object")
        return data
    raise InvalidInputError(f"unsupported source type {type(source).__name__}")


def _number(value, what: str, row: int | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{what} must be a number", row=row)
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(f"{what} must be finite", row=row)
    return value


def _dimension(data: Mapping) -> int:
    d = data.get("d")
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise SchemaError("'d' must be a positive integer")
    return d


def load_profile(source, label: str | None = None) -> PotentialProfile:
    """Read ``{"d", "samples": [{"u", "w"}]}`` or ``{"d", "radial": {"r", "v"}}``."""
    data = _read_source(source)
    d = _dimension(data)
    label = label if label is not None else str(data.get("label", ""))
    if "samples" in data:
        raw = data["samples"]
        if not isinstance(raw, list):
            raise SchemaError("'samples' must be a list")
        rows = []
        for i, item in enumerate(raw):
            if not isinstance(item, Mapping) or "u" not in item or "w" not in item:
                raise SchemaError("sample needs keys 'u' and 'w'", row=i)
            rows.append((_number(item["u"], "u", i), _number(item["w"], "w", i)))
        return PotentialProfile(tuple(rows), d, label)
    if "radial" in data:
        rad = data["radial"]
        if not isinstance(rad, Mapping) or not isinstance(rad.get("r"), list) or not isinstance(rad.get("v"), list):
            raise SchemaError("'radial' needs lists 'r' and 'v'")
        r = [_number(x, "r", i) for i, x in enumerate(rad["r"])]
        v = [_number(x, "v", i) for i, x in enumerate(rad["v"])]
        if len(r) != len(v):
            raise SchemaError("'r' and 'v' must have equal length")
        for i, x in enumerate(v):
            if x < 0:
                raise SchemaError(f"v must be >= 0, got {x}", row=i)
        try:
            w = radial_weights(r, d)
        except InvalidInputError as exc:
            raise SchemaError(str(exc)) from None
        rows = tuple((vi, wi) for vi, wi in zip(v, w) if wi > 0)
        return PotentialProfile(rows, d, label)
    raise SchemaError("profile needs either 'samples' or 'radial'")


def load_symbol(source, d: int) -> RadialSymbol:
    """Read ``{"kind": "power", "alpha"}`` or ``{"kind": "tabulated", "r", "t", "tail_exp", "lead_exp"}``."""
    data = _read_source(source)
    kind = data.get("kind")
    try:
        if kind == "power":
            return power_symbol(d, _number(data.get("alpha"), "alpha"))
        if kind == "tabulated":
            r, t = data.get("r"), data.get("t")
            if not isinstance(r, list) or not isinstance(t, list):
                raise SchemaError("tabulated symbol needs lists 'r' and 't'")
            rr = [_number(x, "r", i) for i, x in enumerate(r)]
            tt = [_number(x, "t", i) for i, x in enumerate(t)]
            for i, x in enumerate(tt):
                if x < 0:
                    raise SchemaError(f"t must be >= 0, got {x}", row=i)
            return tabulated_symbol(d, rr, tt, _number(data.get("tail_exp"), "tail_exp"),
                                    _number(data.get("lead_exp"), "lead_exp"))
    except SchemaError:
        raise
    except InvalidInputError as exc:
        raise SchemaError(str(exc)) from None
    raise SchemaError(f"unknown symbol kind {kind!r}")
