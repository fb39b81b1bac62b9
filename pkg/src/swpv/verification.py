"""Inequality suites and bound monitors over exact bracket data.

Comparisons between values of equal pi-grading are exact.  Values of different
gradings are compared at 256 bits, and a comparison only fails when it fails by
more than ``2**-200`` relative to the larger side.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath

from .asymptotics import RatioKind, estimate_constant_C, ratio_sequence
from .bracket_engine import BracketKey, MemoStore, bracket, volume, volume_polynomial
from .pi_scalar import PiScalar, pi_eval

__all__ = [
    "Instance",
    "CheckReport",
    "compare_le",
    "check_monotone_bounds",
    "check_ratio_band",
    "check_genus_drop",
    "check_sinh_sandwich",
    "fit_sandwich_constant",
    "check_tau_step_bounds",
    "check_eventual_monotone",
    "check_growing_n",
    "monitor_degree_deficit_constant",
    "monitor_product_sums",
    "PRECISION_BITS",
    "SLACK_BITS",
]

PRECISION_BITS = 256
SLACK_BITS = 200


@dataclass
class Instance:
    params: tuple
    passed: bool
    margin: object  # (right - left) / max(|left|, |right|), as an mpf
    asserted: bool = True


@dataclass
class CheckReport:
    name: str
    parameters: dict
    instances: list = field(default_factory=list)
    fitted: dict = field(default_factory=dict)

    def add(self, params: tuple, passed: bool, margin, asserted: bool = True) -> None:
        self.instances.append(Instance(tuple(params), bool(passed), margin, asserted))

    @property
    def failures(self) -> list:
        return [i for i in self.instances if i.asserted and not i.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def worst(self) -> Instance | None:
        asserted = [i for i in self.instances if i.asserted]
        return min(asserted, key=lambda i: i.margin) if asserted else None

    def to_json(self) -> dict:
        worst = self.worst
        return {
            "check": self.name,
            "parameters": self.parameters,
            "count": len(self.instances),
            "failures": len(self.failures),
            "passed": self.passed,
            "worst_margin": None if worst is None else mpmath.nstr(worst.margin, 8),
            "worst_instance": None if worst is None else list(worst.params),
            "fitted": {k: _jsonable(v) for k, v in self.fitted.items()},
            "instances": [
                {"params": list(i.params), "passed": i.passed, "margin": mpmath.nstr(i.margin, 8),
                 "asserted": i.asserted}
                for i in sorted(self.instances, key=lambda i: i.params)
            ],
        }

    def to_table(self) -> str:
        worst = self.worst
        lines = [
            f"{self.name}  {json.dumps(self.parameters)}",
            f"  instances: {len(self.instances)}  failures: {len(self.failures)}  "
            f"status: {'PASS' if self.passed else 'FAIL'}",
        ]
        if worst is not None:
            lines.append(f"  worst margin: {mpmath.nstr(worst.margin, 8)} at {worst.params}")
        for k, v in self.fitted.items():
            lines.append(f"  fitted {k}: {_jsonable(v)}")
        for i in sorted(self.failures, key=lambda i: i.params):
            lines.append(f"  FAILED {i.params} margin {mpmath.nstr(i.margin, 8)}")
        return "\n".join(lines)


def _jsonable(v):
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, 12)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    return v


def _relative(diff, a, b):
    scale = max(abs(a), abs(b))
    return diff / scale if scale else mpmath.mpf(0)


def compare_le(left, right, strict: bool = False) -> tuple[bool, object]:
    """Test ``left <= right`` (or ``<``) for PiScalar or numeric operands.

    Returns ``(holds, relative_margin)``.  Same-grading PiScalars are compared
    exactly; anything else numerically with the ``2**-200`` slack.
    """
    if isinstance(left, PiScalar) and isinstance(right, PiScalar):
        if left.is_zero() or right.is_zero() or left.pi_exp == right.pi_exp:
            # a zero has every grading, so the coefficient signs decide
            holds = left.coeff < right.coeff if strict else left.coeff <= right.coeff
            with mpmath.workprec(PRECISION_BITS):
                a, b = pi_eval(left), pi_eval(right)
                return holds, _relative(b - a, a, b)
    with mpmath.workprec(PRECISION_BITS + 32):
        a = pi_eval(left) if not isinstance(left, mpmath.mpf) else left
        b = pi_eval(right) if not isinstance(right, mpmath.mpf) else right
        margin = _relative(b - a, a, b)
        slack = mpmath.mpf(2) ** -SLACK_BITS
        holds = margin > slack if strict else margin >= -slack
    return holds, margin


def _stable(g: int, n: int) -> bool:
    return g >= 0 and n >= 0 and 2 * g - 2 + n > 0


def _degree_vectors(n: int, max_degree: int) -> Iterable[tuple[int, ...]]:
    """Sorted (descending) exponent vectors of length n with sum <= max_degree."""

    def rec(remaining: int, slots: int, cap: int):
        if slots == 0:
            yield ()
            return
        for first in range(min(remaining, cap), -1, -1):
            for tail in rec(remaining - first, slots - 1, first):
                yield (first,) + tail

    return rec(max_degree, n, max_degree)


# -- volume inequality suites ------------------------------------------------


def check_monotone_bounds(g_max: int, store: MemoStore | None = None) -> CheckReport:
    """``4^{|d|+1} [tau_{d_i+1} ...] <= 4^{|d|} [tau_d] <= V_{g,n}`` over all stable keys.

    Keys range over ``2g-2+n <= 2 g_max - 2`` with ``n >= 1`` and
    ``|d| <= g-1``; every distinct index ``i`` is raised in turn.
    """
    if g_max < 2:
        raise ValueError("g_max must be at least 2")
    store = store if store is not None else MemoStore()
    report = CheckReport("monotone-bounds", {"g_max": g_max})
    for g in range(1, g_max + 1):
        for n in range(1, 2 * (g_max - g) + 1):
            if not _stable(g, n):
                continue
            v = volume(g, n, store)
            for d in _degree_vectors(n, g - 1):
                top = bracket(BracketKey(g, d), store) * (4 ** sum(d))
                holds, margin = compare_le(top, v)
                report.add((g, n, "upper") + d, holds, margin)
                for i in sorted(set(range(n)), key=lambda i: d[i]):
                    if i > 0 and d[i] == d[i - 1]:
                        continue
                    raised = list(d)
                    raised[i] += 1
                    low = bracket(BracketKey(g, raised), store) * (4 ** (sum(d) + 1))
                    holds, margin = compare_le(low, top)
                    report.add((g, n, f"raise{i}") + d, holds, margin)
    return report


def _b_constants():
    with mpmath.workprec(PRECISION_BITS + 32):
        pi = mpmath.pi
        return pi / 2 - pi**3 / 48, mpmath.sinh(pi / 2)


def check_ratio_band(g_max: int, n_max: int = 6, store: MemoStore | None = None) -> CheckReport:
    """``b0 < pi/2 (2g-2+n) V_{g,n} / V_{g,n+1} < b1`` strictly, with b1 = sinh(pi/2)."""
    store = store if store is not None else MemoStore()
    b0, b1 = _b_constants()
    report = CheckReport("ratio-band", {"g_max": g_max, "n_max": n_max})
    report.fitted["b0"] = b0
    report.fitted["b1"] = b1
    lowest, highest = None, None
    for g in range(1, g_max + 1):
        for n in range(0, n_max + 1):
            if not _stable(g, n):
                continue
            r = ratio_sequence(RatioKind.ADD_POINT, n, (), g, g, store)[0] if g >= 2 else _add_point_g1(n, store)
            lo_ok, lo_margin = compare_le(b0, r, strict=True)
            hi_ok, hi_margin = compare_le(r, b1, strict=True)
            report.add((g, n, "lower"), lo_ok, lo_margin)
            report.add((g, n, "upper"), hi_ok, hi_margin)
            lowest = r if lowest is None else min(lowest, r)
            highest = r if highest is None else max(highest, r)
    report.fitted["observed_range"] = [lowest, highest]
    return report


def _add_point_g1(n: int, store: MemoStore):
    ratio = volume(1, n, store) * n / volume(1, n + 1, store) * PiScalar(Fraction(1, 2), 1)
    return pi_eval(ratio)


def check_genus_drop(g_max: int, n_max: int = 4, store: MemoStore | None = None) -> CheckReport:
    """``4 V_{g-1,n+4} <= V_{g,n+2}`` for ``2 <= g <= g_max``, ``0 <= n <= n_max``."""
    store = store if store is not None else MemoStore()
    report = CheckReport("genus-drop", {"g_max": g_max, "n_max": n_max})
    for g in range(2, g_max + 1):
        for n in range(0, n_max + 1):
            holds, margin = compare_le(volume(g - 1, n + 4, store) * 4, volume(g, n + 2, store))
            report.add((g, n), holds, margin)
    return report


# -- sinh sandwich -----------------------------------------------------------------


def _sinhc_product(lengths) -> object:
    out = mpmath.mpf(1)
    for L in lengths:
        h = mpmath.mpf(L) / 2
        out *= mpmath.sinh(h) / h if h else 1
    return out


def _sandwich_points(g: int, n: int, L_grid: Sequence[float], store: MemoStore):
    poly = volume_polynomial(g, n, store)
    with mpmath.workprec(PRECISION_BITS + 32):
        v0 = pi_eval(poly.constant_term())
        for L in itertools.product(L_grid, repeat=n):
            twice = [2 * mpmath.mpf(x) for x in L]
            yield L, poly.evaluate(twice, PRECISION_BITS) / v0, _sinhc_product(L)


def check_sinh_sandwich(g: int, n: int, L_grid: Sequence[float], c_lower=None,
                        store: MemoStore | None = None) -> CheckReport:
    """Upper bound ``V(2L)/V <= prod sinh(L_i/2)/(L_i/2)`` and the lower bound with ``c_lower``.

    The upper bound is always asserted.  The lower bound
    ``prod(...) * (1 - c sum L_i^2 / g)`` is asserted only when ``c_lower`` is
    given.  The smallest ``c`` that makes it hold on the grid is reported.
    """
    if g < 1 or n < 1:
        raise ValueError("need g >= 1 and n >= 1")
    if any(x < 0 for x in L_grid):
        raise ValueError("lengths must be nonnegative")
    store = store if store is not None else MemoStore()
    report = CheckReport("sinh-sandwich", {"g": g, "n": n, "L_grid": list(L_grid),
                                           "c_lower": None if c_lower is None else str(c_lower)})
    c_min = mpmath.mpf(0)
    with mpmath.workprec(PRECISION_BITS + 32):
        for L, ratio, upper in _sandwich_points(g, n, L_grid, store):
            holds, margin = compare_le(ratio, upper)
            report.add((g, n, "upper") + tuple(L), holds, margin)
            sq = sum(mpmath.mpf(x) ** 2 for x in L)
            if sq:
                c_min = max(c_min, (1 - ratio / upper) * g / sq)
            if c_lower is not None:
                lower = upper * (1 - mpmath.mpf(c_lower) * sq / g)
                holds, margin = compare_le(lower, ratio)
                report.add((g, n, "lower") + tuple(L), holds, margin)
    report.fitted["c_min"] = c_min
    return report


def fit_sandwich_constant(n: int, genera: Iterable[int], L_grid: Sequence[float],
                          store: MemoStore | None = None) -> object:
    """Smallest ``c`` making the lower sandwich bound hold for every listed genus."""
    store = store if store is not None else MemoStore()
    return max(check_sinh_sandwich(g, n, L_grid, None, store).fitted["c_min"] for g in genera)


# -- tau_k difference bounds ---------------------------------------------------------


def check_tau_step_bounds(g_max: int, n_max: int = 5, store: MemoStore | None = None) -> CheckReport:
    """Two-sided bound on ``[tau_k tau_0^{n-1}] - 4 [tau_{k+1} tau_0^{n-1}]``.

    Lower side ``(n-1) [tau_k tau_0^{n-2}]``; upper side
    ``(n+7)/(4^{k-1} pi) V_{g,n-1} + (8k+2)/(4^{k-1} pi) V_{g-1,n+1}``.
    Swept over ``2 <= g <= g_max``, ``1 <= n <= n_max``, ``0 <= k <= g-2``.
    """
    if g_max < 3:
        raise ValueError("g_max must be at least 3")
    store = store if store is not None else MemoStore()
    report = CheckReport("tau-step", {"g_max": g_max, "n_max": n_max})
    with mpmath.workprec(PRECISION_BITS + 32):
        pi = mpmath.pi
        for g in range(2, g_max + 1):
            for n in range(1, n_max + 1):
                for k in range(0, g - 1):
                    zeros = (0,) * (n - 1)
                    middle = pi_eval(bracket(BracketKey(g, (k,) + zeros), store)) - 4 * pi_eval(
                        bracket(BracketKey(g, (k + 1,) + zeros), store))
                    lower = (n - 1) * pi_eval(bracket(BracketKey(g, (k,) + zeros[1:]), store)) if n >= 2 else mpmath.mpf(0)
                    scale = mpmath.mpf(4) ** (k - 1) * pi
                    upper = ((n + 7) * pi_eval(volume(g, n - 1, store))
                             + (8 * k + 2) * pi_eval(volume(g - 1, n + 1, store))) / scale
                    holds, margin = compare_le(lower, middle)
                    report.add((g, n, k, "lower"), holds, margin)
                    holds, margin = compare_le(middle, upper)
                    report.add((g, n, k, "upper"), holds, margin)
    return report


# -- sequences in g -------------------------------------------------------------------


def _monotone_from(values: Sequence, increasing: bool) -> int:
    """Smallest index from which the sequence is monotone to the end."""
    start = len(values) - 1
    while start > 0:
        a, b = values[start - 1], values[start]
        if (b > a) if increasing else (b < a):
            start -= 1
        else:
            break
    return start


def check_eventual_monotone(n: int, g_max: int, store: MemoStore | None = None,
                            g_min: int = 2) -> CheckReport:
    """Locate where genus-drop ratios start increasing and add-point ratios start decreasing.

    Passes when each sequence is monotone over at least its last three terms.
    """
    if g_max < 10:
        raise ValueError("g_max must be at least 10")
    if g_max - g_min + 1 < 3:
        raise ValueError("need at least three terms")
    store = store if store is not None else MemoStore()
    report = CheckReport("eventual-monotone", {"n": n, "g_min": g_min, "g_max": g_max})
    genera = list(range(g_min, g_max + 1))
    drop = ratio_sequence(RatioKind.GENUS_DROP, n, (), g_min, g_max, store)
    add = ratio_sequence(RatioKind.ADD_POINT, n, (), g_min, g_max, store)
    for label, seq, increasing in (("genus-drop", drop, True), ("add-point", add, False)):
        start = _monotone_from(seq, increasing)
        report.fitted[f"{label}_from_g"] = genera[start]
        run = len(seq) - start
        report.add((n, label, genera[start]), run >= 3, mpmath.mpf(run - 3))
    return report


def check_growing_n(g_list: Sequence[int], n_of_g: Callable[[int], int], C_est=None,
                    store: MemoStore | None = None) -> CheckReport:
    """Normalized volumes along ``n = n(g)`` stay near the constant, with fitted K.

    The normalized volume is ``2^n sqrt(g) V_{g,n} / ((2g-3+n)! pi^(2g+n))``.
    ``K`` is the smallest constant with ``|value/C_est - 1| <= K max(n,1)^2 / g``.
    """
    store = store if store is not None else MemoStore()
    pairs = []
    for g in g_list:
        n = n_of_g(g)
        if n < 0 or n > math.sqrt(g) / 2:
            raise ValueError(f"n(g)={n} at g={g} exceeds sqrt(g)/2")
        pairs.append((g, n))
    if C_est is None:
        C_est = estimate_constant_C(0, max(12, max(g_list)), 2, store).estimate
    report = CheckReport("growing-n", {"g_list": list(g_list), "n_of_g": [n for _, n in pairs]})
    K = mpmath.mpf(0)
    values = {}
    for g, n in pairs:
        v = ratio_sequence(RatioKind.VOLUME_OVER_C, n, (), g, g, store)[0]
        values[(g, n)] = v
        K = max(K, abs(v / C_est - 1) * g / max(n, 1) ** 2)
    for (g, n), v in values.items():
        bound = K * max(n, 1) ** 2 / g
        dev = abs(v / C_est - 1)
        report.add((g, n), dev <= bound * (1 + mpmath.mpf(2) ** -SLACK_BITS), bound - dev, asserted=False)
    report.fitted["C_est"] = mpmath.mpf(C_est)
    report.fitted["K"] = K
    report.fitted["values"] = {f"{g},{n}": v for (g, n), v in values.items()}
    return report


# -- fitted-constant monitors -----------------------------------------------------------


def monitor_degree_deficit_constant(n: int, g_max: int, max_degree: int = 3,
                             store: MemoStore | None = None, g_min: int = 5) -> CheckReport:
    """``0 <= 1 - 4^{|d|} [tau_d] / V_{g,n} <= c0 |d|^2 / g`` with c0 fitted.

    The left inequality is asserted.  The per-genus minimal ``c0`` and the
    tail suprema ``max_{g' >= g} c0(g')`` are reported.
    """
    store = store if store is not None else MemoStore()
    report = CheckReport("degree-deficit", {"n": n, "g_min": g_min, "g_max": g_max,
                                              "max_degree": max_degree})
    per_genus = {}
    with mpmath.workprec(PRECISION_BITS + 32):
        for g in range(g_min, g_max + 1):
            v = volume(g, n, store)
            worst = mpmath.mpf(0)
            for d in _degree_vectors(n, min(max_degree, g - 1)):
                if not sum(d):
                    continue
                scaled = bracket(BracketKey(g, d), store) * (4 ** sum(d))
                holds, margin = compare_le(scaled, v)
                report.add((g,) + d, holds, margin)
                gap = 1 - pi_eval(scaled) / pi_eval(v)
                worst = max(worst, gap * g / sum(d) ** 2)
            per_genus[g] = worst
    tails, running = {}, mpmath.mpf(0)
    for g in sorted(per_genus, reverse=True):
        running = max(running, per_genus[g])
        tails[g] = running
    report.fitted["c0_per_genus"] = per_genus
    report.fitted["c0_tail_sup"] = tails
    report.fitted["c0"] = tails.get(g_min, mpmath.mpf(0))
    return report


def monitor_product_sums(n1: int, n2: int, s: int, g_max: int, store: MemoStore | None = None,
                         g_min: int = 4) -> CheckReport:
    """Ratio ``sum_{g1+g2=g, 2g_i+n_i>=s} V_{g1,n1} V_{g2,n2} / (V_{g,n1+n2} / g^s)``.

    Only reported; the implied constant is not specified, so nothing is asserted.
    """
    store = store if store is not None else MemoStore()
    report = CheckReport("product-sums", {"n1": n1, "n2": n2, "s": s, "g_min": g_min, "g_max": g_max})
    ratios = {}
    with mpmath.workprec(PRECISION_BITS + 32):
        for g in range(g_min, g_max + 1):
            total = mpmath.mpf(0)
            for g1 in range(1, g):
                g2 = g - g1
                if not (_stable(g1, n1) and _stable(g2, n2)):
                    continue
                if 2 * g1 + n1 < s or 2 * g2 + n2 < s:
                    continue
                total += pi_eval(volume(g1, n1, store)) * pi_eval(volume(g2, n2, store))
            r = total * mpmath.mpf(g) ** s / pi_eval(volume(g, n1 + n2, store))
            ratios[g] = r
            report.add((g,), True, r, asserted=False)
    report.fitted["ratios"] = ratios
    report.fitted["max_ratio"] = max(ratios.values()) if ratios else mpmath.mpf(0)
    return report
