"""Slow, literal bracket recursion used only as a test oracle.

Values are PiLaurent (so gradings are tracked, not assumed), the recursion
peels the smallest exponent instead of the largest, index sets are labeled
subsets, and the secant numbers come from the Seidel boustrophedon triangle
rather than the Taylor recurrence the package uses.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import factorial

from swpv.pi_scalar import PiLaurent


@lru_cache(maxsize=None)
def euler_zigzag(count: int) -> tuple[int, ...]:
    """Entringer/Seidel triangle; returns the secant numbers E_0, E_2, E_4, ..."""
    row = [1]
    zigzag = [1]
    for n in range(1, 2 * count):
        new = [0]
        for x in reversed(row):
            new.append(new[-1] + x)
        row = new
        zigzag.append(row[-1])
    return tuple(zigzag[0::2][:count])


def a_coeff(L: int) -> PiLaurent:
    if L < 0:
        return PiLaurent()
    return PiLaurent.pi_power(2 * L, Fraction(euler_zigzag(L + 1)[L], factorial(2 * L)))


@lru_cache(maxsize=None)
def ref_bracket(g: int, parts: tuple[int, ...]) -> PiLaurent:
    parts = tuple(sorted(parts))
    n = len(parts)
    if g < 1 or n == 0 or sum(parts) > g - 1:
        return PiLaurent()
    if (g, parts) == (1, (0,)):
        return PiLaurent.constant(Fraction(1, 8))
    d1, rest = parts[0], parts[1:]
    d0 = g - 1 - sum(parts)
    total = PiLaurent()
    for j, dj in enumerate(rest):
        others = rest[:j] + rest[j + 1:]
        for L in range(d0 + 1):
            total = total + a_coeff(L) * (2 * dj + 1) * ref_bracket(g, (L + d1 + dj,) + others)
    for L in range(d0 + 1):
        m = L + d1 - 1
        if m < 0:
            continue
        aL = a_coeff(L)
        for k1 in range(m + 1):
            k2 = m - k1
            total = total + aL * 2 * ref_bracket(g - 1, (k1, k2) + rest)
            labels = range(len(rest))
            for size in range(len(rest) + 1):
                for chosen in itertools.combinations(labels, size):
                    left = tuple(rest[i] for i in chosen)
                    right = tuple(rest[i] for i in labels if i not in chosen)
                    for g1 in range(1, g):
                        total = total + aL * 2 * ref_bracket(g1, (k1,) + left) * ref_bracket(g - g1, (k2,) + right)
    return total


def ref_empty(g: int) -> PiLaurent:
    total = PiLaurent()
    for L in range(g):
        total = total + PiLaurent.pi_power(2 * L, Fraction((-1) ** L, factorial(2 * L + 1))) * ref_bracket(g, (L,))
    return total / (2 * g - 2)
