import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from clrlab import constants as C
from clrlab.errors import InvalidInputError


def test_ball_volume():
    assert C.ball_volume(1) == pytest.approx(2.0, rel=1e-15)
    assert C.ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert C.ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-15)
    with pytest.raises(InvalidInputError):
        C.ball_volume(0)


def test_lt_classical_examples():
    assert C.lt_classical(0, 3) == pytest.approx(1 / (6 * math.pi ** 2), rel=1e-14)
    assert C.lt_classical(0, 3) == pytest.approx(C.semiclassical_factor(3), rel=1e-14)
    direct, _ = integrate.quad(lambda x: 1 - x * x, -1, 1)
    assert C.lt_classical(1, 1) == pytest.approx(direct / (2 * math.pi), rel=1e-12)
    assert C.lt_classical(0, 5) == pytest.approx(C.lt_classical(0, 2) * C.lt_classical(1, 3), rel=1e-12)
    with pytest.raises(InvalidInputError):
        C.lt_classical(-0.5, 3)


@pytest.mark.parametrize("theta", [0, 0.5, 1])
@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("d", [4, 5, 6])
def test_lt_classical_multiplicativity(theta, n, d):
    lhs = C.lt_classical(theta, d)
    assert lhs == pytest.approx(C.lt_classical(theta, n) * C.lt_classical(theta + n / 2, d - n), rel=1e-12)


def test_c_gamma_examples():
    assert C.c_gamma(3, 8 / 15) == pytest.approx(10.8, rel=1e-14)
    assert C.c_gamma(4, 1 / 6) == pytest.approx(32 / 3, rel=1e-14)
    with pytest.raises(InvalidInputError):
        C.c_gamma(2.0, 1.0)
    with pytest.raises(InvalidInputError):
        C.c_gamma(3.0, 0.0)


def test_c_simple_examples():
    assert abs(C.c_simple(3) - 10.8) <= 1e-9
    assert C.c_simple(4) == pytest.approx(32 / 3, rel=1e-14)
    for g in (2.5, 3, 7):
        assert C.c_simple(g) == pytest.approx(C.c_gamma(g, 8 / (g * (g - 2) * (g + 2))), rel=1e-13)


def test_c_lower_examples():
    assert C.c_lower(3) == pytest.approx(6.75, abs=1e-12)
    assert C.c_lower(5) == pytest.approx(4.82253, abs=1e-5)
    assert C.c_lower(1000) == pytest.approx(math.e ** 2 / 2, rel=1e-2)
    assert math.e ** 2 / 2 == pytest.approx(3.69452, abs=1e-5)


@pytest.mark.parametrize("d", [3, 4, 5, 6, 8, 9])
def test_c_lower_matches_table(d):
    assert C.c_lower(d) == pytest.approx(C.REFERENCE.table_lower[d], abs=1e-5)


def test_c_lower_seven_is_exact_rational():
    # 7^7 / (2 * 6 * 5^6); the tabulated 4.39229 has its last two digits swapped
    assert C.c_lower(7) == pytest.approx(823543 / 187500, rel=1e-14)
    assert C.c_lower(7) == pytest.approx(4.39223, abs=1e-5)
    assert abs(C.c_lower(7) - C.REFERENCE.table_lower[7]) > 5e-5


@pytest.mark.parametrize("g", [2.5, 3, 5, 10])
def test_simple_over_lower_ratio(g):
    ratio = C.c_gamma(g, 8 / (g * (g - 2) * (g + 2))) / C.c_lower(g)
    assert ratio == pytest.approx(4 * (g - 1) / (g + 2), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(g=st.floats(2.01, 400.0))
def test_lower_below_simple(g):
    assert C.c_lower(g) < C.c_simple(g)
    assert C.m_lower(g) < C.m_simple(g)


def test_large_gamma_does_not_overflow():
    for g in (150.0, 500.0, 1000.0):
        assert math.isfinite(C.c_simple(g)) and math.isfinite(C.c_lower(g))
        assert math.isfinite(C.c_gamma(g, C.m_simple(g)))


def test_c_op_table():
    table = C.c_op_table(12, C.REFERENCE.table_c)
    assert table[12] == pytest.approx(5.62080, abs=1e-12)
    assert table[3] == C.REFERENCE.table_c[3]
    values = [table[d] for d in range(3, 13)]
    assert all(b <= a for a, b in zip(values, values[1:]))
    with pytest.raises(InvalidInputError):
        C.c_op_table(2, C.REFERENCE.table_c)
    with pytest.raises(InvalidInputError):
        C.c_op_table(5, {3: 7.0})


def test_c_op_table_respects_cap():
    per = {n: 10.0 - n for n in range(3, 12)}
    assert C.c_op_table(11, per)[11] == 1.0  # n capped at 9
    assert C.c_op_table(11, per, n_cap=11)[11] == -1.0


def test_cwikel_examples():
    assert C.cwikel_general(4, 1, 1 / 6) == pytest.approx(32 / 3, rel=1e-14)
    assert C.cwikel_general(3, 1, 8 / 15) == pytest.approx(54 / 5, rel=1e-14)
    assert C.cwikel_simple(4) == pytest.approx(32 / 3, rel=1e-14)
    assert C.cwikel_simple(3) == pytest.approx(10.8, rel=1e-14)
    for p in (2.5, 3.0, 4.0, 6.0):
        assert C.cwikel_general(2 * p, 2.0, 0.1) == pytest.approx(
            2 ** (2 * p - 2) * C.cwikel_general(2 * p, 1.0, 0.1), rel=1e-13)
    with pytest.raises(InvalidInputError):
        C.cwikel_simple(2.0)


@pytest.mark.parametrize("p", [2.5, 3.0, 4.0, 6.0])
def test_cwikel_simple_is_general_with_min_kernel_tail(p):
    assert abs(C.cwikel_simple(p) - C.cwikel_general(p, 1, 8 / ((p - 2) * p * (p + 2)))) <= 1e-12 * C.cwikel_simple(p)


def test_frank_constants():
    assert C.frank_cwikel(4) == pytest.approx(16.0, rel=1e-15)
    assert C.frank_cwikel(3) == pytest.approx(13.5, rel=1e-15)
    assert C.frank_ratio(4) == pytest.approx(1.5, rel=1e-14)
    for p in (2.5, 3.0, 7.0):
        assert C.frank_ratio(p) == pytest.approx((p + 2) / 4, rel=1e-13)


def test_frank_rumin():
    assert C.frank_rumin(3, 1) == pytest.approx(3 * math.sqrt(15), rel=1e-14)
    assert C.frank_rumin(4, 1) == pytest.approx(12.0, rel=1e-14)
    with pytest.raises(InvalidInputError):
        C.frank_rumin(2, 1)


@pytest.mark.parametrize("d", [3, 4, 5, 6, 8])
@pytest.mark.parametrize("a", [0.5, 1.0, 1.4])
def test_simple_constant_beats_rumin_type(d, a):
    if d > 2 * a:
        assert C.c_simple(d / a) < C.frank_rumin(d, a)


def test_reference_data_is_immutable():
    with pytest.raises(TypeError):
        C.REFERENCE.lieb_scalar[3] = 1.0
    with pytest.raises(AttributeError):
        C.REFERENCE.fls_opvalued = 1.0
    assert C.REFERENCE.fls_opvalued == 10.332
    assert C.REFERENCE.daubechies_relativistic == 6.08


def test_exact_small_cases():
    # rational arithmetic oracle for integer gamma
    for g in (3, 4, 5, 6):
        exact = Fraction(2 * g ** g, (g - 2) ** (g - 1) * (g + 2))
        assert C.c_simple(g) == pytest.approx(float(exact), rel=1e-14)
        exact = Fraction(g ** g, 2 * (g - 1) * (g - 2) ** (g - 1))
        assert C.c_lower(g) == pytest.approx(float(exact), rel=1e-14)
