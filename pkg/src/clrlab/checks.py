"""Self-check suites behind ``clrlab check``.

Each suite returns :class:`CheckResult` rows.  Suites marked
tolerance-dependent run their integrals with the caller's
:class:`QuadratureSpec`, so a loose tolerance shows up as failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import constants as C
from .errors import ClrLabError
from .kinetic import PotentialProfile, bound_opt, g_t, hs_density, power_bound_closed, power_symbol, tabulated_symbol
from .numerics import QuadratureSpec, SearchSpec, integrate_1d
from .optimize import mgamma_upper
from .scalefn import l2_scalenorm, mconvolve, min_kernel, simple_pair, tail_functional
from .trial import TrialParams, i_gamma_brute, i_gamma_reduced, trial_objective

__all__ = ["CheckResult", "SUITES", "run_checks"]

SANDWICH_GAMMAS = (2.1, 2.5, 3.0, 4.0, 6.0, 9.0, 12.0, 20.0)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str

    def as_dict(self) -> dict:
        return {"suite": self.suite, "name": self.name, "passed": self.passed, "detail": self.detail}


def _close(value, expected, rel=0.0, abs_=0.0):
    err = abs(value - expected)
    ok = err <= max(abs_, rel * abs(expected))
    return ok, f"got {value:.12g}, expected {expected:.12g}, |diff| = {err:.3g}"


def _quadrature(quad, search):
    cases = [
        ("int_0^1 x^-1/2 dx = 2", lambda x: 1.0 / np.sqrt(x), (0.0, 1.0), 2.0),
        ("int_1^inf t^-3 dt = 1/2", lambda t: t ** -3.0, (1.0, math.inf), 0.5),
        ("int_0^inf x e^-x dx = 1", lambda x: x * np.exp(-x), (0.0, math.inf), 1.0),
        ("int log(1/x) on (0, 1) = 1", lambda x: -np.log(x), (0.0, 1.0), 1.0),
    ]
    for name, f, iv, exact in cases:
        value, _ = integrate_1d(f, iv, quad)
        yield (name, *_close(value, exact, rel=1e-8))


def _convolution(quad, search):
    m1, m2 = simple_pair()
    m = mconvolve(m1, m2)
    t = m.nodes
    err = float(np.max(np.abs(m.values - np.minimum(t, 1 / t))))
    yield "factor-2 pair gives min(t, 1/t), sup node error <= 1e-6", err <= 1e-6, f"sup error {err:.3g}"
    prod = l2_scalenorm(m1) * l2_scalenorm(m2)
    yield ("norm product of the pair = 1", *_close(prod, 1.0, abs_=1e-8))


def _tail(quad, search):
    for g in (2.5, 3.0, 4.0, 6.0, 9.0):
        value = tail_functional(min_kernel(), g, quad).value
        yield (f"tail of min(t, 1/t) at gamma {g:g}", *_close(value, 8 / ((g - 2) * g * (g + 2)), abs_=1e-8))


def _oracle(quad, search):
    cases = [TrialParams(1, 1, 2.0, 3.0), TrialParams(2, 1, 3.0, 5.0), TrialParams(2, 3, 5.0, 2.0)]
    for params in cases:
        for g in (3.0, 6.0):
            a = i_gamma_reduced(params, g, quad)
            b = i_gamma_brute(params, g, quad)
            yield (f"reduced = brute for {params.p, params.q, params.alpha, params.beta} at gamma {g:g}",
                   *_close(a, b, rel=1e-4))


def _closed_forms(quad, search):
    yield ("c_simple(3) = 10.8", *_close(C.c_simple(3.0), 10.8, abs_=1e-9))
    for g in (2.5, 3.0, 5.0, 10.0):
        ratio = C.c_gamma(g, C.m_simple(g)) / C.c_lower(g)
        yield (f"simple / lower = 4 (g-1)/(g+2) at gamma {g:g}", *_close(ratio, 4 * (g - 1) / (g + 2), rel=1e-12))
    for p in (2.5, 3.0, 4.0, 6.0):
        yield (f"cwikel_simple = cwikel_general at p {p:g}",
               *_close(C.cwikel_general(p, 1.0, 8 / ((p - 2) * p * (p + 2))), C.cwikel_simple(p), rel=1e-12))
        yield (f"Frank ratio = (p+2)/4 at p {p:g}", *_close(C.frank_ratio(p), (p + 2) / 4, rel=1e-12))
    for theta in (0.0, 0.5, 1.0):
        for n in (1, 2, 3):
            for d in (4, 5, 6):
                lhs = C.lt_classical(theta, d)
                rhs = C.lt_classical(theta, n) * C.lt_classical(theta + n / 2, d - n)
                yield (f"L^cl multiplicative (theta {theta:g}, n {n}, d {d})", *_close(lhs, rhs, rel=1e-12))


def _table(quad, search):
    for d, row in sorted(C.REFERENCE_PARAMETERS.items()):
        value = trial_objective(TrialParams(*row), float(d), quad).c_gamma
        yield (f"C at reference parameters, d = {d}", *_close(value, C.REFERENCE.table_c[d], rel=1e-3))
        yield f"C_lower < C at d = {d}", C.c_lower(d) < value, f"{C.c_lower(d):.6g} < {value:.6g}"


def _sandwich(quad, search):
    for g in SANDWICH_GAMMAS:
        value = mgamma_upper(g, search, quad=quad)
        lo, hi = C.m_lower(g), C.m_simple(g)
        yield f"sandwich at gamma {g:g}", lo <= value <= hi, f"{lo:.6g} <= {value:.6g} <= {hi:.6g}"


def _kinetic(quad, search):
    profile = PotentialProfile(((1.0, 1.0), (2.5, 0.3), (0.1, 4.0)))
    for d, a in ((3, 1.0), (3, 0.5), (5, 2.0)):
        T = power_symbol(d, a)
        for u in (0.5, 2.0, 10.0):
            rhs = hs_density(lambda r: T(r) ** -0.5, min_kernel(), math.sqrt(u), d=d, spec=quad,
                             points=[u ** (0.5 / a)])
            yield (f"G_T = hs_density identity, d {d}, alpha {a:g}, u {u:g}", *_close(g_t(T, u), rhs, rel=1e-8))
        lam, closed = power_bound_closed(d, a, profile)
        res = bound_opt(T, profile, search)
        yield (f"bound_opt = closed form, d {d}, alpha {a:g}", *_close(res.bound, closed, rel=1e-6))
        yield (f"lambda* = 2/(gamma-2), d {d}, alpha {a:g}", *_close(res.lambda_star, lam, rel=1e-6))
    tab = tabulated_symbol(3, [0.5, 1.0, 2.0, 4.0], [0.25, 1.0, 3.0, 5.0], tail_exp=1.5, lead_exp=2.0)
    for u in (0.5, 4.0, 40.0):
        pts = list(tab.r) + [(u / c) ** (1 / k) for lo, hi, c, k in tab.pieces() if lo <= (u / c) ** (1 / k) < hi]
        rhs = hs_density(lambda r: tab(r) ** -0.5, min_kernel(), math.sqrt(u), d=3, spec=quad, points=pts)
        yield (f"G_T = hs_density identity, tabulated, u {u:g}", *_close(g_t(tab, u), rhs, rel=1e-8))


SUITES: dict[str, Callable] = {
    "quadrature": _quadrature,
    "convolution": _convolution,
    "tail": _tail,
    "oracle": _oracle,
    "closed-forms": _closed_forms,
    "table": _table,
    "sandwich": _sandwich,
    "kinetic": _kinetic,
}


def run_checks(
    only: Iterable[str] | None = None,
    quad: QuadratureSpec | None = None,
    search: SearchSpec | None = None,
) -> list[CheckResult]:
    """Run the named suites (all by default) in a fixed order."""
    quad = quad or QuadratureSpec()
    search = search or SearchSpec()
    names = list(SUITES) if only is None else list(only)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(", ".join(unknown))
    out = []
    for suite in SUITES:
        if suite not in names:
            continue
        try:
            for name, passed, detail in SUITES[suite](quad, search):
                out.append(CheckResult(suite, name, bool(passed), detail))
        except (ClrLabError, ArithmeticError) as exc:
            out.append(CheckResult(suite, "suite aborted", False, f"{type(exc).__name__}: {exc}"))
    return out
