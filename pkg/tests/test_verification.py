import json
from fractions import Fraction

import mpmath
import pytest

from swpv.bracket_engine import MemoStore
from swpv.pi_scalar import PiScalar
from swpv.verification import (
    CheckReport,
    check_eventual_monotone,
    check_genus_drop,
    check_growing_n,
    check_monotone_bounds,
    check_tau_step_bounds,
    check_ratio_band,
    check_sinh_sandwich,
    compare_le,
    fit_sandwich_constant,
    monitor_degree_deficit_constant,
    monitor_product_sums,
)


@pytest.fixture(scope="module")
def store():
    return MemoStore()


def test_compare_exact_same_grading():
    assert compare_le(PiScalar(Fraction(1, 3), 2), PiScalar(Fraction(1, 2), 2)) == (True, compare_le(
        PiScalar(Fraction(1, 3), 2), PiScalar(Fraction(1, 2), 2))[1])
    holds, margin = compare_le(PiScalar(1, 2), PiScalar(1, 2))
    assert holds and margin == 0
    assert not compare_le(PiScalar(1, 2), PiScalar(1, 2), strict=True)[0]


def test_compare_mixed_grading_numeric():
    # pi^2 / 10 < 1 < pi / 3
    assert compare_le(PiScalar(Fraction(1, 10), 2), PiScalar(1, 0))[0]
    assert not compare_le(PiScalar(Fraction(1, 3), 1), PiScalar(1, 0))[0]


def test_compare_with_zero():
    assert compare_le(PiScalar.zero(), PiScalar(1, 6))[0]
    assert not compare_le(PiScalar(1, 6), PiScalar.zero())[0]


def test_monotone_bounds_pass_and_report_equality(store):
    report = check_monotone_bounds(6, store)
    assert report.passed and len(report.instances) > 100
    assert report.worst.margin == 0  # d = 0 meets the volume exactly


def test_ratio_band(store):
    report = check_ratio_band(6, 4, store)
    assert report.passed
    lo, hi = report.fitted["observed_range"]
    assert report.fitted["b0"] < lo and hi < report.fitted["b1"]


def test_genus_drop(store):
    assert check_genus_drop(8, 3, store).passed


def test_sandwich_at_zero_is_equality(store):
    report = check_sinh_sandwich(5, 1, [0], 1, store)
    assert report.passed
    assert all(i.margin == 0 for i in report.instances)


def test_sandwich_upper_and_fitted_lower(store):
    grid = [0.5, 1, 2, 4]
    assert check_sinh_sandwich(8, 1, grid, None, store).passed
    c = fit_sandwich_constant(1, range(5, 13), grid, store)
    assert 0 < c < 1
    for g in range(5, 13):
        assert check_sinh_sandwich(g, 1, grid, c, store).passed


def test_sandwich_lower_fails_with_tiny_constant(store):
    report = check_sinh_sandwich(5, 1, [4], 1e-6, store)
    assert not report.passed


def test_tau_step_bounds(store):
    report = check_tau_step_bounds(5, 4, store)
    assert report.passed
    with pytest.raises(ValueError):
        check_tau_step_bounds(2)


def test_eventual_monotone(store):
    report = check_eventual_monotone(1, 20, store)
    assert report.passed
    assert "genus-drop_from_g" in report.fitted
    with pytest.raises(ValueError):
        check_eventual_monotone(1, 9, store)


def test_growing_n(store):
    report = check_growing_n([16, 25], lambda g: 2, C_est=mpmath.pi ** mpmath.mpf(-4.5), store=store)
    assert report.passed
    assert report.fitted["K"] >= 0
    with pytest.raises(ValueError):
        check_growing_n([9], lambda g: g, C_est=1, store=store)


def test_degree_deficit_monitor(store):
    report = monitor_degree_deficit_constant(2, 12, 3, store)
    assert report.passed
    tails = report.fitted["c0_tail_sup"]
    ordered = [tails[g] for g in sorted(tails)]
    assert all(b <= a for a, b in zip(ordered, ordered[1:]))


def test_product_sum_monitor(store):
    report = monitor_product_sums(1, 1, 1, 14, store)
    assert report.passed  # nothing asserted
    assert report.fitted["max_ratio"] < 1


def test_report_serialization(store):
    report = check_genus_drop(4, 1, store)
    data = json.loads(json.dumps(report.to_json()))
    assert data["count"] == len(report.instances) and data["failures"] == 0
    assert "genus-drop" in report.to_table()


def test_report_counts_failures():
    r = CheckReport("x", {})
    r.add((1,), True, mpmath.mpf(1))
    r.add((2,), False, mpmath.mpf(-1))
    r.add((3,), False, mpmath.mpf(-2), asserted=False)
    assert not r.passed and len(r.failures) == 1
    assert r.worst.params == (2,)
