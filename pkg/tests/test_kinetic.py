import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from clrlab import constants
from clrlab.errors import DivergenceError, InvalidInputError, SchemaError
from clrlab.kinetic import (
    PotentialProfile,
    bound_at_lambda,
    bound_opt,
    g_t,
    g_t_power_closed,
    hs_density,
    load_profile,
    load_symbol,
    power_bound_closed,
    power_symbol,
    radial_weights,
    tabulated_symbol,
)
from clrlab.scalefn import PiecewisePower, min_kernel

SF3 = constants.semiclassical_factor(3)
POWER_CASES = [(3, 1.0), (3, 0.5), (5, 2.0)]


def crossings(T, u):
    pts = list(T.r) if T.kind == "tabulated" else []
    for lo, hi, c, k in T.pieces():
        if c > 0 and k != 0:
            r = (u / c) ** (1 / k)
            if lo <= r < hi:
                pts.append(r)
    return pts


def identity_rhs(T, u):
    return hs_density(lambda r: T(r) ** -0.5, min_kernel(), math.sqrt(u), d=T.d, points=crossings(T, u))


def test_hs_density_example():
    v = hs_density(lambda r: 1 / r, min_kernel(), 1.0, d=3)
    assert v == pytest.approx(3 * SF3 * 8 / 15, rel=1e-10)
    # direct quadrature of the radial integral
    direct, _ = integrate.quad(lambda r: (1 - r * r) ** 2, 0, 1)
    assert v == pytest.approx(4 * math.pi / (2 * math.pi) ** 3 * direct, rel=1e-10)


def test_hs_density_zero_and_scaling():
    g = lambda r: 1 / r
    assert hs_density(g, min_kernel(), 0.0, d=3) == 0.0
    base = hs_density(g, min_kernel(), 1.0, d=3)
    for u in (0.5, 2.0, 7.0):
        assert hs_density(g, min_kernel(), u, d=3) == pytest.approx(u ** 3 * base, rel=1e-9)


def test_hs_density_divergence():
    with pytest.raises(DivergenceError):
        hs_density(lambda r: 1 / r, PiecewisePower(()), 1.0, d=3)
    with pytest.raises(InvalidInputError):
        hs_density(lambda r: 1 / r, min_kernel(), -1.0, d=3)
    with pytest.raises(InvalidInputError):
        hs_density(lambda r: 1 / r, min_kernel(), 1.0)


def test_g_t_example():
    assert g_t(power_symbol(3, 1.0), 1.0) == pytest.approx(3 * SF3 * 8 / 15, rel=1e-12)
    assert g_t(power_symbol(3, 1.0), 0.0) == 0.0


@pytest.mark.parametrize("d, a", POWER_CASES)
def test_g_t_power_closed_form_and_scaling(d, a):
    T = power_symbol(d, a)
    one = g_t(T, 1.0)
    for u in (0.5, 2.0, 10.0):
        assert g_t(T, u) == pytest.approx(u ** (T.gamma / 2) * one, rel=1e-12)
        assert g_t(T, u) == pytest.approx(g_t_power_closed(d, a, u), rel=1e-6)


@pytest.mark.parametrize("d, a", POWER_CASES)
@pytest.mark.parametrize("u", [0.5, 2.0, 10.0])
def test_identity_with_hs_density_power(d, a, u):
    T = power_symbol(d, a)
    assert g_t(T, u) == pytest.approx(identity_rhs(T, u), rel=1e-8)


TAB = tabulated_symbol(3, [0.5, 1.0, 2.0, 4.0], [0.25, 1.0, 3.0, 5.0], tail_exp=1.5, lead_exp=2.0)


@pytest.mark.parametrize("u", [0.1, 0.5, 2.0, 4.0, 10.0, 40.0])
def test_identity_with_hs_density_tabulated(u):
    assert g_t(TAB, u) == pytest.approx(identity_rhs(TAB, u), rel=1e-8)


def test_tabulated_matching_power_law_agrees_with_power_symbol():
    r = np.geomspace(0.1, 10, 9)
    T = tabulated_symbol(3, r, r ** 2, tail_exp=2.0, lead_exp=2.0)
    for u in (0.05, 1.0, 30.0, 500.0):
        assert g_t(T, u) == pytest.approx(g_t(power_symbol(3, 1.0), u), rel=1e-12)


def test_tabulated_with_positive_limit_is_unbounded():
    T = tabulated_symbol(3, [0.5, 1.0, 2.0], [0.5, 1.5, 2.0], tail_exp=0.0, lead_exp=2.0)
    assert math.isfinite(g_t(T, 1.9))
    assert g_t(T, 2.5) == math.inf


def test_symbol_vanishing_on_a_cell_is_unbounded():
    T = tabulated_symbol(3, [0.5, 1.0, 2.0], [0.0, 1.0, 4.0], tail_exp=2.0, lead_exp=2.0)
    assert g_t(T, 1.0) == math.inf


def test_leading_exponent_controls_integrability_at_zero():
    # T ~ r^4 near zero in d = 3: 1/T is not integrable at the origin
    T = tabulated_symbol(3, [1.0, 2.0], [1.0, 4.0], tail_exp=2.0, lead_exp=4.0)
    assert g_t(T, 0.5) == math.inf


@settings(max_examples=40, deadline=None)
@given(u1=st.floats(0.0, 50.0), u2=st.floats(0.0, 50.0))
def test_g_t_is_nondecreasing(u1, u2):
    lo, hi = sorted((u1, u2))
    assert g_t(TAB, lo) <= g_t(TAB, hi) * (1 + 1e-12)


def test_symbol_validation():
    with pytest.raises(InvalidInputError):
        power_symbol(3, 0.0)
    with pytest.raises(InvalidInputError):
        tabulated_symbol(3, [1.0, 1.0], [1.0, 2.0], 1.0, 1.0)
    with pytest.raises(InvalidInputError):
        tabulated_symbol(3, [1.0, 2.0], [1.0, -2.0], 1.0, 1.0)
    with pytest.raises(InvalidInputError):
        tabulated_symbol(3, [1.0, 2.0], [1.0, 2.0], -1.0, 1.0)
    with pytest.raises(InvalidInputError):
        power_symbol(0, 1.0)


def test_bound_at_lambda_example():
    T = power_symbol(3, 1.0)
    V = PotentialProfile(((1.0, 1.0),))
    expected = 0.25 * 9 ** 1.5 * 3 * SF3 * 8 / 15
    assert bound_at_lambda(T, V, 2.0) == pytest.approx(expected, rel=1e-12)
    assert bound_at_lambda(T, PotentialProfile(()), 2.0) == 0.0
    with pytest.raises(InvalidInputError):
        bound_at_lambda(T, V, 0.0)


def test_bound_at_lambda_infinite_term():
    T = tabulated_symbol(3, [0.5, 1.0, 2.0], [0.5, 1.5, 2.0], tail_exp=0.0, lead_exp=2.0)
    V = PotentialProfile(((0.01, 1.0), (3.0, 1.0)))
    assert bound_at_lambda(T, V, 1.0) == math.inf


@settings(max_examples=30, deadline=None)
@given(u=st.floats(0.0, 10.0), du=st.floats(0.0, 5.0), lam=st.floats(0.01, 50.0))
def test_bound_at_lambda_monotone_in_samples(u, du, lam):
    T = power_symbol(3, 1.0)
    a = bound_at_lambda(T, PotentialProfile(((u, 1.0), (1.0, 2.0))), lam)
    b = bound_at_lambda(T, PotentialProfile(((u + du, 1.0), (1.0, 2.0))), lam)
    assert a <= b * (1 + 1e-12)


def test_bound_opt_examples():
    V = PotentialProfile(((1.0, 1.0),))
    r = bound_opt(power_symbol(3, 1.0), V)
    assert r.lambda_star == pytest.approx(2.0, rel=1e-6)
    assert r.bound == pytest.approx(10.8 * SF3, rel=1e-9)
    r = bound_opt(power_symbol(3, 0.5), V)
    assert r.lambda_star == pytest.approx(0.5, rel=1e-6)
    assert r.bound == pytest.approx(constants.c_simple(6) * SF3, rel=1e-9)


@pytest.mark.parametrize("d, a", POWER_CASES)
def test_bound_opt_matches_constants_pipeline(d, a):
    V = PotentialProfile(((1.0, 1.0), (2.5, 0.3), (0.1, 4.0)))
    lam, closed = power_bound_closed(d, a, V)
    r = bound_opt(power_symbol(d, a), V)
    assert r.bound == pytest.approx(closed, rel=1e-6)
    assert r.lambda_star == pytest.approx(lam, rel=1e-6)


@pytest.mark.parametrize("c", [0.3, 4.0])
def test_bound_opt_is_linear_in_weights(c):
    T = TAB
    V = PotentialProfile(((1.0, 1.0), (0.4, 2.0)))
    assert bound_opt(T, V.scaled(c)).bound == pytest.approx(c * bound_opt(T, V).bound, rel=1e-9)


def test_bound_opt_unbounded_and_empty():
    T = tabulated_symbol(3, [0.5, 1.0, 2.0], [0.5, 1.5, 2.0], tail_exp=0.0, lead_exp=2.0)
    r = bound_opt(T, PotentialProfile(((3.0, 1.0),)))
    assert r.unbounded and "unbounded" in r.note
    with pytest.raises(InvalidInputError):
        bound_opt(T, PotentialProfile(()))


def test_load_profile_samples(tmp_path):
    p = load_profile({"d": 3, "samples": [{"u": 1.0, "w": 1.0}]})
    assert p.samples == ((1.0, 1.0),) and p.d == 3
    path = tmp_path / "v.json"
    path.write_text(json.dumps({"d": 3, "samples": [{"u": 2, "w": 0.5}]}))
    assert load_profile(path).samples == ((2.0, 0.5),)
    assert load_profile(str(path)).samples == ((2.0, 0.5),)


@pytest.mark.parametrize(
    "data, row",
    [
        ({"d": 3, "samples": [{"u": 1.0, "w": 1.0}, {"u": -0.1, "w": 1.0}]}, 1),
        ({"d": 3, "samples": [{"u": 1.0, "w": 0.0}]}, 0),
        ({"d": 3, "samples": [{"u": float("nan"), "w": 1.0}]}, 0),
        ({"d": 3, "samples": [{"u": 1.0}]}, 0),
    ],
)
def test_load_profile_schema_errors_name_row(data, row):
    with pytest.raises(SchemaError) as info:
        load_profile(data)
    assert info.value.row == row


def test_load_profile_bad_files(tmp_path):
    with pytest.raises(InvalidInputError):
        load_profile(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        load_profile(bad)
    with pytest.raises(SchemaError):
        load_profile({"samples": []})
    with pytest.raises(SchemaError):
        load_profile({"d": 3})


def test_radial_profile_weights_approach_ball_volume():
    errs = []
    for n in (11, 101, 1001):
        r = np.linspace(0, 1, n)
        p = load_profile({"d": 3, "radial": {"r": r.tolist(), "v": [1.0] * n}})
        errs.append(abs(sum(w for _, w in p.samples) - constants.ball_volume(3)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-5


def test_radial_weights_validation():
    with pytest.raises(InvalidInputError):
        radial_weights([0.0, 0.0, 1.0], 3)
    with pytest.raises(SchemaError):
        load_profile({"d": 3, "radial": {"r": [0, 1], "v": [1.0, -1.0]}})


def test_load_symbol():
    T = load_symbol({"kind": "power", "alpha": 1}, 3)
    assert T.kind == "power" and T.gamma == 3
    T = load_symbol({"kind": "tabulated", "r": [1, 2], "t": [1, 4], "tail_exp": 2, "lead_exp": 2}, 3)
    assert T.kind == "tabulated"
    assert T(np.array([1.5]))[0] == pytest.approx(2.25)
    with pytest.raises(SchemaError):
        load_symbol({"kind": "gauss"}, 3)
    with pytest.raises(SchemaError):
        load_symbol({"kind": "tabulated", "r": [1, 2], "t": [1, -4], "tail_exp": 2, "lead_exp": 2}, 3)
    with pytest.raises(SchemaError):
        load_symbol({"kind": "power", "alpha": "one"}, 3)


@pytest.mark.parametrize("u", [5e-324, 2.2250738585e-313, 1e-300, 1e-200])
def test_g_t_tiny_u_is_finite(u):
    v = g_t(TAB, u)
    assert math.isfinite(v) and 0.0 <= v <= g_t(TAB, 1e-100)
