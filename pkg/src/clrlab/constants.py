"""Closed-form constants of CLR-type bounds and the literature values they are compared with."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import InvalidInputError

__all__ = [
    "ReferenceData",
    "REFERENCE",
    "REFERENCE_PARAMETERS",
    "N_CAP",
    "ball_volume",
    "sphere_area",
    "semiclassical_factor",
    "lt_classical",
    "c_gamma",
    "c_simple",
    "c_lower",
    "m_lower",
    "m_simple",
    "c_op_table",
    "cwikel_general",
    "cwikel_simple",
    "frank_cwikel",
    "frank_ratio",
    "frank_rumin",
    "build_report",
]

N_CAP = 9


@dataclass(frozen=True)
class ReferenceData:
    # Lieb's method, scalar potentials: the best values known before
    lieb_scalar: Mapping[int, float] = field(default_factory=lambda: MappingProxyType({
        3: 6.86924, 4: 6.03398, 5: 5.96677, 6: 6.07489, 7: 6.24464, 8: 6.43921, 9: 6.64378,
    }))
    # Frank, Lieb and Seiringer, operator-valued potentials, all d >= 3
    fls_opvalued: float = 10.332
    # Daubechies, N(|P| + V) in three dimensions
    daubechies_relativistic: float = 6.08
    # C_{0,d} reached by the Gamma trial family
    table_c: Mapping[int, float] = field(default_factory=lambda: MappingProxyType({
        3: 7.55151, 4: 6.32791, 5: 5.95405, 6: 5.77058, 7: 5.67647, 8: 5.63198, 9: 5.62080,
    }))
    # lower bounds achievable by the splitting method, as tabulated
    table_lower: Mapping[int, float] = field(default_factory=lambda: MappingProxyType({
        3: 6.75000, 4: 5.33333, 5: 4.82253, 6: 4.55625, 7: 4.39229, 8: 4.28088, 9: 4.20028,
    }))


REFERENCE = ReferenceData()

# (p, q, alpha, beta) of the reference trial parameters, keyed by gamma = d
REFERENCE_PARAMETERS: Mapping[int, tuple] = MappingProxyType({
    3: (2, 3, 2.93254, 2.49795),
    4: (2, 3, 3.69214, 2.78716),
    5: (3, 2, 5.46494, 2.39433),
    6: (3, 2, 6.41334, 2.51583),
    7: (3, 2, 7.35963, 2.61721),
    8: (3, 2, 8.30512, 2.70368),
    9: (3, 2, 9.25042, 2.77865),
})


def _gamma_ok(gamma: float, name: str = "gamma"):
    if not (gamma > 2.0 and math.isfinite(gamma)):
        raise InvalidInputError(f"{name} must be a finite real > 2, got {gamma!r}")


def ball_volume(d: int) -> float:
    if int(d) != d or d < 1:
        raise InvalidInputError(f"dimension must be an integer >= 1, got {d!r}")
    return math.exp(0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0))


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d."""
    return d * ball_volume(d)


def semiclassical_factor(d: int) -> float:
    """``|B_1^d| / (2 pi)^d``."""
    return ball_volume(d) / (2.0 * math.pi) ** d


def lt_classical(theta: float, d: int) -> float:
    """``int (1 - |eta|^2)_+^theta d eta / (2 pi)^d``."""
    if not theta >= 0:
        raise InvalidInputError(f"theta must be >= 0, got {theta!r}")
    if int(d) != d or d < 1:
        raise InvalidInputError(f"dimension must be an integer >= 1, got {d!r}")
    return math.exp(-0.5 * d * math.log(4.0 * math.pi)
                    + math.lgamma(theta + 1.0) - math.lgamma(theta + 1.0 + 0.5 * d))


def _log_c_prefactor(gamma: float) -> float:
    # log of gamma^(gamma+1) / (4 (gamma-2)^(gamma-2))
    return (gamma + 1.0) * math.log(gamma) - math.log(4.0) - (gamma - 2.0) * math.log(gamma - 2.0)


def c_gamma(gamma: float, m_value: float) -> float:
    _gamma_ok(gamma)
    if not m_value > 0:
        raise InvalidInputError(f"m_value must be positive, got {m_value!r}")
    return math.exp(_log_c_prefactor(gamma) + math.log(m_value))


def m_simple(gamma: float) -> float:
    """Upper member of the easy estimates, attained by ``min(t, 1/t)``."""
    _gamma_ok(gamma)
    return 8.0 / (gamma * (gamma - 2.0) * (gamma + 2.0))


def m_lower(gamma: float) -> float:
    """Lower member of the easy estimates."""
    _gamma_ok(gamma)
    return 2.0 / (gamma * (gamma - 1.0) * (gamma - 2.0))


def c_simple(gamma: float) -> float:
    _gamma_ok(gamma)
    return 2.0 * math.exp(gamma * math.log(gamma) - (gamma - 1.0) * math.log(gamma - 2.0)) / (gamma + 2.0)


def c_lower(gamma: float) -> float:
    _gamma_ok(gamma)
    return math.exp(gamma * math.log(gamma) - (gamma - 1.0) * math.log(gamma - 2.0)) / (2.0 * (gamma - 1.0))


def c_op_table(d_max: int, per_gamma_c: Mapping[int, float], n_cap: int = N_CAP) -> dict[int, float]:
    """``C^op(d) = min_{3 <= n <= min(d, n_cap)} C_n`` for ``d = 3..d_max``."""
    if int(d_max) != d_max or d_max < 3:
        raise InvalidInputError(f"d_max must be an integer >= 3, got {d_max!r}")
    if n_cap < 3:
        raise InvalidInputError("n_cap must be at least 3")
    out = {}
    best = math.inf
    for d in range(3, int(d_max) + 1):
        if d <= n_cap:
            if d not in per_gamma_c:
                raise InvalidInputError(f"no C_n value supplied for n = {d}")
            best = min(best, float(per_gamma_c[d]))
        out[d] = best
    return out


def cwikel_general(p: float, mu: float, tail_p: float) -> float:
    """Weak-Schatten constant for a splitting with norm product ``mu`` and tail ``R_p``."""
    _gamma_ok(p, "p")
    if not mu > 0:
        raise InvalidInputError("mu must be positive")
    if not tail_p >= 0:
        raise InvalidInputError("tail_p must be nonnegative")
    return (p / (p - 2.0)) ** p * ((p - 2.0) / 2.0) ** 2 * mu ** (p - 2.0) * p * tail_p


def cwikel_simple(p: float) -> float:
    _gamma_ok(p, "p")
    return 2.0 * (p - 2.0) / (p + 2.0) * (p / (p - 2.0)) ** p


def frank_cwikel(p: float) -> float:
    """Frank's earlier weak-Schatten constant."""
    _gamma_ok(p, "p")
    return 0.5 * p * (p / (p - 2.0)) ** (p - 1.0)


def frank_ratio(p: float) -> float:
    """``frank_cwikel(p) / cwikel_simple(p)``; algebraically ``(p + 2) / 4``."""
    return frank_cwikel(p) / cwikel_simple(p)


def frank_rumin(d: int, alpha_order: float) -> float:
    """Frank's Rumin-type constant for ``N(P^(2 alpha) + V)``."""
    if not (0 < alpha_order < d / 2):
        raise InvalidInputError(f"need 0 < alpha < d/2, got d={d!r}, alpha={alpha_order!r}")
    e = d - 2.0 * alpha_order
    return (d * (d + 2.0 * alpha_order) / e ** 2) ** (e / (2.0 * alpha_order)) * d / e


def build_report(dims, alpha_order=1.0, search=None, **kwargs):
    """Reports per dimension; see :func:`clrlab.report.build_report`."""
    from .report import build_report as _build  # the report needs the optimizer

    return _build(dims, alpha_order, search, **kwargs)
