from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from swpv.asymptotics import (
    GSeries,
    RatioKind,
    assemble_genus_step,
    coeff_a1,
    coeff_a2,
    coeff_b1,
    coeff_b2,
    coeff_c2,
    coeff_d1,
    coeff_e1,
    coeff_e2,
    estimate_constant_C,
    fit_inverse_g_expansion,
    interpolate_in_n,
    inverse_linear,
    ratio_sequence,
    richardson_table,
    select_e2_variant,
    series_mul,
    series_reciprocal,
    series_shifted,
)
from swpv.bracket_engine import MemoStore
from swpv.pi_scalar import PiLaurent, pi_eval

P = PiLaurent.pi_power
small = st.fractions(min_value=-20, max_value=20, max_denominator=50)
laurent = st.dictionaries(st.integers(-4, 2), small, max_size=3).map(PiLaurent)


def unit_series(order):
    return st.lists(laurent, min_size=order, max_size=order).map(lambda tail: GSeries([1] + tail))


# -- series algebra -------------------------------------------------------------------------


def test_difference_of_squares():
    x = P(-1, 2)
    a = GSeries([1, x, 0])
    b = GSeries([1, -x, 0])
    assert series_mul(a, b) == GSeries([1, 0, -(x * x)])


def test_product_truncates():
    a = GSeries([1, 1])
    assert series_mul(a, a) == GSeries([1, 2])
    assert series_mul(GSeries([1, 1, 1]), GSeries([1, 1])).order == 1


def test_geometric_reciprocal():
    u = coeff_b1(1)
    assert series_reciprocal(GSeries([1, u, 0])) == GSeries([1, -u, u * u])


def test_reciprocal_of_genus_drop_series():
    b1, b2 = coeff_b1(0), coeff_b2(0)
    assert series_reciprocal(GSeries([1, b1, b2])) == GSeries([1, -b1, b1 * b1 - b2])


def test_reciprocal_requires_unit_constant():
    with pytest.raises(ValueError):
        series_reciprocal(GSeries([2, 1]))


@settings(max_examples=40, deadline=None)
@given(unit_series(3))
def test_reciprocal_is_an_involution(a):
    assert series_reciprocal(series_reciprocal(a)) == a
    one = series_mul(a, series_reciprocal(a))
    assert one == GSeries.one(3)


@settings(max_examples=40, deadline=None)
@given(unit_series(2), unit_series(2), unit_series(2))
def test_product_associative_commutative(a, b, c):
    assert series_mul(series_mul(a, b), c) == series_mul(a, series_mul(b, c))
    assert series_mul(a, b) == series_mul(b, a)


def test_shift_examples():
    assert series_shifted(GSeries([0, 1, 0, 0]), 1) == GSeries([0, 1, 1, 1])
    a = GSeries([1, coeff_a1(2), coeff_a2(2)])
    assert series_shifted(a, 0) == a
    # 1/(2g - 1) = 1/(2g) * 1/(1 - 1/(2g))
    assert inverse_linear(2, -1, 2) == GSeries([0, Fraction(1, 2), Fraction(1, 4)])


@settings(max_examples=25, deadline=None)
@given(unit_series(3), st.integers(-3, 3))
def test_shift_matches_numeric_evaluation(a, h):
    g = 10**6
    with mpmath.workprec(300):
        lhs = series_shifted(a, h).evaluate(g, 280)
        rhs = a.evaluate(g - h, 280)
        assert abs(lhs - rhs) < mpmath.mpf(10) ** -22 * max(1, max(abs(pi_eval(c)) for c in a.coeffs)) * 50**4


# -- closed forms ---------------------------------------------------------------------------


def test_e1_examples():
    assert coeff_e1(1, 1) == P(-2, -2)
    assert coeff_e1(4, 0) == PiLaurent()
    assert coeff_e1(2, 3) == P(-2, -42)
    assert coeff_e1(2, 2) == P(-2, -20)


def test_e2_vanishes_at_zero_degree():
    for n in range(1, 6):
        assert coeff_e2(n, 0, n, "theorem") == PiLaurent()


def test_e2_theorem_value():
    assert coeff_e2(1, 1, 0, "theorem") == PiLaurent({-2: Fraction(-31, 16), -3: Fraction(-1, 4)})


def test_e2_rejects_bad_arguments():
    with pytest.raises(ValueError):
        coeff_e2(2, 1, 3)
    with pytest.raises(ValueError):
        coeff_e2(2, 1, 1, "other")


def test_a_b_examples():
    assert coeff_a1(0) == PiLaurent({0: Fraction(1, 4), -2: -2})
    assert coeff_b1(0) == P(-2, 2)
    assert coeff_b2(0) == PiLaurent({-2: Fraction(13, 8), -3: Fraction(-1, 2), -4: -8})
    # special value of b^2 at n = 1
    assert coeff_b2(1) == PiLaurent({-2: Fraction(-27, 8), -3: Fraction(-1, 2)})


def test_c2_d1_examples():
    assert coeff_c2(0) == PiLaurent({0: Fraction(-7, 32), -1: Fraction(1, 8), -2: Fraction(25, 8)})
    assert coeff_c2(3) == PiLaurent({0: Fraction(3, 4) - Fraction(7, 32), -1: Fraction(1, 8), -2: Fraction(25, 8)})
    assert coeff_d1(0) == PiLaurent({0: Fraction(19, 32), -1: Fraction(-1, 8), -2: Fraction(-25, 8)})


def test_c2_and_d1_sum_to_three_eighths():
    # V_{g+1}/V_g from the C (2g-3+n)! pi^{2g+n} / (2^n sqrt g) form forces c2 + d1 = 3/8
    for n in range(8):
        assert coeff_c2(n) + coeff_d1(n) == PiLaurent.constant(Fraction(3, 8))


@pytest.mark.parametrize("n", range(5))
def test_genus_step_assembly_reproduces_c2(n):
    s = assemble_genus_step(n)
    assert s[1] == PiLaurent()
    assert s[2] == coeff_c2(n)


def test_polynomial_degrees_in_n():
    _, ok = interpolate_in_n({n: coeff_a1(n) for n in range(4)}, 1)
    assert ok
    poly, ok = interpolate_in_n({n: coeff_b2(n) for n in range(5)}, 2)
    assert ok
    poly, ok = interpolate_in_n({n: coeff_d1(n) for n in range(5)}, 2)
    assert ok and poly[2] == P(-2, -1)
    _, ok = interpolate_in_n({n: coeff_d1(n) for n in range(5)}, 1)
    assert not ok


def test_interpolate_numeric_and_errors():
    values = {n: mpmath.mpf(2) + 3 * n for n in range(4)}
    poly, ok = interpolate_in_n(values, 1)
    assert ok and abs(poly[1] - 3) < 1e-20
    with pytest.raises(ValueError):
        interpolate_in_n({0: 1, 1: 2}, 1)


def test_e2_variant_selection():
    target = pi_eval(coeff_e2(2, 2, 0, "proof"))
    chosen, errors = select_e2_variant(target * (1 + mpmath.mpf("0.01")), 2, 2, 0)
    assert chosen == "proof"
    assert set(errors) == {"theorem", "proof"}


# -- fitting ------------------------------------------------------------------------------------


def test_fit_recovers_exact_model():
    gs = list(range(10, 31))
    with mpmath.workprec(256):
        values = [1 + mpmath.mpf(3) / g for g in gs]
    fit = fit_inverse_g_expansion(values, gs, 2)
    assert abs(fit.constant - 1) < 1e-20
    assert abs(fit.coefficients[0] - 3) < 1e-20
    assert abs(fit.coefficients[1]) < 1e-18
    assert fit.residual < 1e-40


def test_fit_constant_sequence():
    gs = list(range(5, 20))
    fit = fit_inverse_g_expansion([mpmath.mpf(1)] * len(gs), gs, 3, constant=1)
    assert all(abs(c) < 1e-40 for c in fit.coefficients)


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_inverse_g_expansion([1, 2], [1, 2], 3)
    with pytest.raises(ValueError):
        fit_inverse_g_expansion([1, 2, 3], [3, 2, 1], 1)


def test_fit_json_shape():
    gs = list(range(10, 20))
    fit = fit_inverse_g_expansion([1 + mpmath.mpf(1) / g for g in gs], gs, 2)
    out = fit.to_json(target="pi^-9/2", deviation=mpmath.mpf("0.001"))
    assert {"coefficients", "residual", "condition", "g_range", "target", "deviation"} <= set(out)


def test_richardson_kills_polynomial_terms():
    gs = list(range(20, 30))
    with mpmath.workprec(256):
        values = [7 + mpmath.mpf(2) / g - mpmath.mpf(5) / g**2 for g in gs]
    table = richardson_table(values, gs, 2)
    assert all(abs(x - 7) < 1e-60 for x in table[2])


def test_constant_estimate_on_manufactured_sequence():
    C = mpmath.mpf("0.0123")
    d1 = pi_eval(coeff_d1(1))
    g_max = 10_000
    g_min = g_max - 12
    with mpmath.workprec(256):
        values = [C * (1 + d1 / g + mpmath.mpf(5) / g**2) for g in range(g_min, g_max + 1)]
    est = estimate_constant_C(1, g_max, 2, values=values, g_min=g_min)
    assert abs(est.estimate / C - 1) < 1e-10
    assert est.to_json()["target"] == "pi^-9/2"


def test_constant_estimate_range_errors():
    with pytest.raises(ValueError):
        estimate_constant_C(0, 12, 5, values=[1] * 8)
    with pytest.raises(ValueError):
        estimate_constant_C(0, 11, 1, values=[1] * 8)


# -- ratio sequences ------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def store():
    return MemoStore()


def test_bracket_ratio_of_zero_vector_is_one(store):
    assert ratio_sequence(RatioKind.BRACKET_RATIO, 3, (0, 0), 2, 6, store) == [1] * 5


def test_add_point_in_band(store):
    (r,) = ratio_sequence(RatioKind.ADD_POINT, 0, (), 2, 2, store)
    assert mpmath.pi / 2 - mpmath.pi**3 / 48 < r < mpmath.sinh(mpmath.pi / 2)


def test_genus_drop_approaches_one(store):
    values = ratio_sequence(RatioKind.GENUS_DROP, 2, (), 5, 16, store)
    gaps = [abs(v - 1) for v in values]
    assert gaps[-1] < gaps[0]
    assert gaps[-1] * 16 < 2


def test_ratio_sequence_errors(store):
    with pytest.raises(ValueError):
        ratio_sequence(RatioKind.ADD_POINT, 1, (), 1, 3, store)
    with pytest.raises(ValueError):
        ratio_sequence(RatioKind.BRACKET_RATIO, 1, (1, 1), 3, 4, store)


def test_richardson_matches_classical_closed_form():
    from math import factorial

    gs = list(range(30, 34))
    with mpmath.workprec(256):
        values = [mpmath.mpf(1) / (1 + mpmath.mpf(1) / g) for g in gs]
        k = 3
        classical = mpmath.fsum((-1) ** (k + j) * mpmath.mpf(gs[0] + j) ** k * values[j]
                                / (factorial(j) * factorial(k - j)) for j in range(k + 1))
        assert abs(richardson_table(values, gs, k)[k][0] - classical) < mpmath.mpf(10) ** -60
