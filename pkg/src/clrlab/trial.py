"""Gamma-family trial functions for the variational problem.

The family is parametrised by densities in the log variable:

    xi(s)  = alpha^p / Gamma(p) * s^-alpha * (log s)^(p-1),   s > 1
    psi(s) = beta^q  / Gamma(q) * s^-beta  * (log s)^(q-1),   s > 1

so that ``log r`` ~ Gamma(p, rate alpha) under ``xi(r) dr/r`` and likewise
for ``psi``.  The splitting functions are ``m1(s) = s * int_s^inf xi dr/r``
and ``m2(s) = s * psi(s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from . import constants
from .errors import ConvergenceError, InvalidInputError, ResolutionError, UnsupportedOrderError
from .numerics import QuadratureSpec, integrate_1d
from .scalefn import DEFAULT_LAYOUT, GridLayout, LogGrid, l2_scalenorm, mconvolve, tail_functional

__all__ = [
    "P_MAX",
    "Q_MAX",
    "TrialParams",
    "ObjectiveBreakdown",
    "make_trial",
    "k_closed",
    "m1_norm_sq",
    "m2_norm_sq",
    "i_gamma_reduced",
    "i_gamma_brute",
    "trial_objective",
    "scalefn_objective",
    "FINE_LAYOUT",
]

P_MAX = 8
Q_MAX = 8

# probability mass of the negative-binomial mixture left out of the sum
_MIX_CUTOFF = 1e-17


@dataclass(frozen=True)
class TrialParams:
    p: int
    q: int
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        for name in ("alpha", "beta"):
            v = float(getattr(self, name))
            if not (v > 1.0 and math.isfinite(v)):
                raise InvalidInputError(f"{name} must be a finite real > 1, got {v!r}")
            object.__setattr__(self, name, v)

    def swapped(self) -> "TrialParams":
        return TrialParams(self.q, self.p, self.beta, self.alpha)


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Pieces of the trial objective.

    ``tail`` is the functional ``I_gamma``; the objective is
    ``mu**(gamma - 2) * tail`` with ``mu = norm1 * norm2``.
    """

    gamma: float
    norm1: float
    norm2: float
    mu: float
    tail: float
    objective: float
    c_gamma: float


def _check_gamma(gamma: float):
    if not (gamma > 2.0 and math.isfinite(gamma)):
        raise InvalidInputError(f"gamma must be a finite real > 2, got {gamma!r}")


# ---------------------------------------------------------------------------
# closed forms

def k_closed(alpha1: float, alpha2: float) -> float:
    """``int int r1^-a1 r2^-a2 min(r1, r2)^2 dr1/r1 dr2/r2`` over ``r1, r2 > 1``."""
    s = alpha1 + alpha2
    if not s > 2.0:
        raise InvalidInputError("k_closed needs alpha1 + alpha2 > 2")
    return s / (alpha1 * alpha2 * (s - 2.0))


def _mixed_partial_k(k: int, a1: float, a2: float) -> float:
    """``(d/da1 d/da2)^k K(a1, a2)``.

    ``K = (1/a1 + 1/a2) / (a1 + a2 - 2)``; each summand's mixed partial
    follows from the Leibniz rule and the signs cancel.
    """
    s2 = a1 + a2 - 2.0
    total = 0.0
    for x in (a1, a2):
        for j in range(k + 1):
            total += (math.factorial(k) * math.factorial(k + j) / math.factorial(j)
                      / (x ** (k - j + 1) * s2 ** (k + j + 1)))
    return total


def m1_norm_sq(p: int, alpha: float) -> float:
    """``||m1||^2`` in ``L2(ds/s)`` for the shape-``p``, rate-``alpha`` member."""
    if int(p) != p or p < 1:
        raise InvalidInputError(f"p must be a positive integer, got {p!r}")
    if p > P_MAX:
        raise UnsupportedOrderError(f"p = {p} exceeds the supported maximum {P_MAX}")
    if not alpha > 1.0:
        raise InvalidInputError("m1_norm_sq needs alpha > 1")
    p = int(p)
    log_pref = 2 * p * math.log(alpha) - 2 * math.lgamma(p)
    return 0.5 * math.exp(log_pref) * _mixed_partial_k(p - 1, alpha, alpha)


def m2_norm_sq(q: int, beta: float) -> float:
    """``||m2||^2`` in ``L2(ds/s)`` for the shape-``q``, rate-``beta`` member."""
    if int(q) != q or q < 1:
        raise InvalidInputError(f"q must be a positive integer, got {q!r}")
    if not beta > 1.0:
        raise InvalidInputError("m2_norm_sq needs beta > 1")
    q = int(q)
    log_v = (2 * q * math.log(beta) - (2 * q - 1) * (math.log(2.0) + math.log(beta - 1.0))
             + math.log(math.factorial(2 * q - 2)) - 2 * math.log(math.factorial(q - 1)))
    return math.exp(log_v)


# ---------------------------------------------------------------------------
# the functional I_gamma

def _sum_mixture(params: TrialParams):
    """Law of ``X + Y`` as a negative-binomial mixture of Gamma laws.

    With ``hi >= lo`` the two rates and ``k`` the shape belonging to ``lo``,
    ``Gamma(k, lo) = sum_j NB(j; k, lo/hi) Gamma(k + j, hi)``, so the sum is
    ``sum_j w_j Gamma(p + q + j, hi)``.  All weights are positive, which
    keeps the density free of cancellation when the rates nearly coincide.
    """
    p, q, a, b = params.p, params.q, params.alpha, params.beta
    if a >= b:
        hi, lo, k = a, b, q
    else:
        hi, lo, k = b, a, p
    ratio = lo / hi
    if ratio == 1.0:
        j = np.zeros(1)
        w = np.ones(1)
    else:
        top = int(stats.nbinom.isf(_MIX_CUTOFF, k, ratio)) + 5
        j = np.arange(top + 1, dtype=float)
        w = stats.nbinom.pmf(j, k, ratio)
    return p + q + j, hi, w


def i_gamma_reduced(params: TrialParams, gamma: float, spec: QuadratureSpec | None = None) -> float:
    """``I_gamma = E[exp((2-gamma) max(U1, U2))] / (gamma - 2)`` as one 1-D integral.

    ``E[g(max(U1, U2))] = 2 int g(u) f_U(u) F_U(u) du`` for i.i.d. ``U1, U2``.
    """
    _check_gamma(gamma)
    spec = spec or QuadratureSpec()
    shapes, rate, w = _sum_mixture(params)
    c = gamma - 2.0
    logw = np.log(w)
    lgam = special.gammaln(shapes)

    def integrand(u):
        u = np.asarray(u, dtype=float)[:, None]
        with np.errstate(divide="ignore"):
            logf = logw + shapes * math.log(rate) + (shapes - 1.0) * np.log(u) - rate * u - lgam
        f = np.exp(logf).sum(axis=1)
        big_f = (w * special.gammainc(shapes, rate * u)).sum(axis=1)
        return 2.0 * np.exp(-c * u[:, 0]) * f * big_f

    mean = float(np.dot(w, shapes)) / rate
    value, _ = integrate_1d(integrand, (0.0, math.inf), spec, [mean])
    return value / c


def _laguerre(n: int, shape: float):
    x, w = special.roots_genlaguerre(n, shape - 1.0)
    return x, w / math.gamma(shape)


def i_gamma_brute(params: TrialParams, gamma: float, spec: QuadratureSpec | None = None,
                  n_start: int = 16, n_max: int = 256) -> float:
    """Four-fold iterated Gauss quadrature of ``I_gamma`` in the log variables.

    ``X1, Y1`` are integrated with generalized Gauss-Laguerre rules.  For the
    second pair the max is resolved by splitting: ``X2 >= a`` (shifted
    Laguerre) or ``X2 < a`` (Gauss-Legendre), and inside the latter ``Y2``
    is split at ``a - X2`` in the same way.  The node count grows by half until
    successive values agree to ``spec.rel_tol``.
    """
    _check_gamma(gamma)
    spec = spec or QuadratureSpec()
    tol = max(spec.rel_tol, 1e-12)
    p, q, al, be = params.p, params.q, params.alpha, params.beta
    c = gamma - 2.0
    lg_p, lg_q = math.lgamma(p), math.lgamma(q)
    ey = (be / (be + c)) ** q  # E[exp(-c Y)]

    def rule(n):
        tx, wx = _laguerre(n, p)
        ty, wy = _laguerre(n, q)
        a = (tx[:, None] / al + ty[None, :] / be).ravel()
        wa = (wx[:, None] * wy[None, :]).ravel()
        lx, lw = special.roots_legendre(n)
        tl, wl = special.roots_laguerre(n)
        h = np.empty_like(a)
        chunk = max(1, 4_000_000 // (n * n))
        for i in range(0, a.size, chunk):
            h[i:i + chunk] = _inner(a[i:i + chunk], lx, lw, tl, wl)
        return float(np.dot(wa, h)) / c

    def _inner(a, lx, lw, tl, wl):
        # region X2 >= a: max = X2 + Y2
        ra = al + c
        x2 = a[:, None] + tl[None, :] / ra
        part_hi = (np.exp(p * math.log(al) - lg_p - ra * a) / ra
                   * (wl[None, :] * x2 ** (p - 1)).sum(axis=1)) * ey
        # region X2 in [0, a)
        half = 0.5 * a[:, None]
        x2 = half * (lx[None, :] + 1.0)
        fx = np.exp(p * math.log(al) - lg_p - al * x2) * x2 ** (p - 1) * half * lw[None, :]
        b = a[:, None] - x2  # Y2 threshold
        # Y2 < b: max = a
        hb = 0.5 * b[:, :, None]
        y2 = hb * (lx[None, None, :] + 1.0)
        fy = np.exp(q * math.log(be) - lg_q - be * y2) * y2 ** (q - 1) * hb * lw[None, None, :]
        low = fy.sum(axis=2) * np.exp(-c * a)[:, None]
        # Y2 >= b: max = X2 + Y2
        rb = be + c
        y2 = b[:, :, None] + tl[None, None, :] / rb
        up = (np.exp(q * math.log(be) - lg_q - rb * b) / rb
              * (wl[None, None, :] * y2 ** (q - 1)).sum(axis=2)) * np.exp(-c * x2)
        part_lo = (fx * (low + up)).sum(axis=1)
        return part_hi + part_lo

    n = n_start
    prev = rule(n)
    while n < n_max:
        n = min(n_max, (3 * n) // 2)
        cur = rule(n)
        if abs(cur - prev) <= tol * abs(cur):
            return cur
        prev = cur
    raise ConvergenceError(f"brute-force I_gamma did not settle by {n_max} nodes", partial=prev)


# ---------------------------------------------------------------------------
# objective

def trial_objective(params: TrialParams, gamma: float, spec: QuadratureSpec | None = None) -> ObjectiveBreakdown:
    _check_gamma(gamma)
    n1 = m1_norm_sq(params.p, params.alpha)
    n2 = m2_norm_sq(params.q, params.beta)
    tail = i_gamma_reduced(params, gamma, spec)
    mu = math.sqrt(n1 * n2)
    objective = math.exp(0.5 * (gamma - 2.0) * math.log(n1 * n2)) * tail
    return ObjectiveBreakdown(
        gamma=float(gamma),
        norm1=math.sqrt(n1),
        norm2=math.sqrt(n2),
        mu=mu,
        tail=tail,
        objective=objective,
        c_gamma=constants.c_gamma(gamma, objective),
    )


# ---------------------------------------------------------------------------
# grid realisation

def make_trial(params: TrialParams, layout: GridLayout = DEFAULT_LAYOUT) -> tuple[LogGrid, LogGrid]:
    """Sample ``m1`` and ``m2`` on the nodes of ``layout``."""
    log_top = math.log(layout.s_max)
    for shape, rate, name in ((params.p, params.alpha, "xi"), (params.q, params.beta, "psi")):
        missing = special.gammaincc(shape, rate * log_top)
        if missing >= 1e-10:
            raise ResolutionError(
                f"grid ends at s={layout.s_max:g} but {name} still has mass {missing:.2e} beyond it"
            )
    x = layout.log_nodes
    s = layout.nodes
    pos = x > 0
    lx = np.where(pos, x, 1.0)
    m1 = np.where(pos, s * special.gammaincc(params.p, params.alpha * lx), s)
    log_m2 = (x + params.q * math.log(params.beta) - math.lgamma(params.q)
              - params.beta * lx + (params.q - 1) * np.log(lx))
    m2 = np.where(pos, np.exp(log_m2), 0.0)
    return LogGrid(x, m1), LogGrid(x, m2)


# the grid path converges like h^2; four times the default density keeps it near 1e-5
FINE_LAYOUT = GridLayout(n=16385)


def scalefn_objective(params: TrialParams, gamma: float, layout: GridLayout = FINE_LAYOUT,
                      window_lo: float = 0.5) -> float:
    """The objective computed from grid samples: norms, convolution and tail.

    Independent of the closed forms and the 1-D reduction.  Members with
    ``q = 1`` have a jump in ``m2`` and only converge like ``h``.  The tail window
    starts at ``window_lo``; every member of the family has ``m(t) = t`` for
    ``t <= 1``, so nothing is lost below it.
    """
    _check_gamma(gamma)
    m1, m2 = make_trial(params, layout)
    m = mconvolve(m1, m2, layout)
    tail = tail_functional(m, gamma, window=(window_lo, layout.s_max)).value
    mu = l2_scalenorm(m1) * l2_scalenorm(m2)
    # 1 - m(t)/t is the law of the product of the two log-Gamma variables,
    # so the tail functional of m is I_gamma itself
    return mu ** (gamma - 2.0) * tail
