"""Weighted sums of truncated products of big-integer rows.

This is the hot spot of the bracket recursion: for every pair of sub-rows it
needs ``sum_k x[k] * y[m - k]`` for all ``m <= top``, weighted and summed over
many pairs.  Two interchangeable kernels compute it:

``packed``
    Kronecker substitution.  Each row is packed into one GMP integer with a
    fixed slot width, so a whole convolution becomes a single big-integer
    multiplication.  Needs gmpy2 and nonnegative entries.
``python``
    Plain nested loops over Python integers.

The kernel is chosen with the ``SWPV_KERNEL`` environment variable
(``packed`` or ``python``); the default is ``packed`` when gmpy2 imports.
Both kernels return identical exact results.
"""

from __future__ import annotations

import os
from fractions import Fraction
from math import lcm
from typing import Callable, Sequence

try:
    import gmpy2
except ImportError:  # pragma: no cover - exercised only without gmpy2
    gmpy2 = None

__all__ = [
    "HAVE_GMPY2",
    "IntRow",
    "make_rational",
    "int_row",
    "convolve_python",
    "convolve_packed",
    "select_kernel",
    "active_kernel_name",
]

HAVE_GMPY2 = gmpy2 is not None

if HAVE_GMPY2:
    make_rational: Callable = gmpy2.mpq
    _make_int: Callable = gmpy2.mpz
else:  # pragma: no cover
    make_rational = Fraction
    _make_int = int


class IntRow:
    """A row of rationals written as ``nums[k] / den`` with a shared denominator."""

    __slots__ = ("den", "nums", "bits", "nonneg", "shift")

    def __init__(self, den, nums: list, bits: int, nonneg: bool, shift: int = -1) -> None:
        self.den = den
        self.nums = nums
        self.bits = bits
        self.nonneg = nonneg
        self.shift = shift  # log2(den) when den is a power of two, else -1


def int_row(values: Sequence) -> IntRow:
    den = 1
    for v in values:
        den = lcm(den, int(v.denominator))
    den = _make_int(den)
    nums = [_make_int(v.numerator) * (den // _make_int(v.denominator)) for v in values]
    bits = max((int(x).bit_length() for x in nums), default=0)
    shift = int(den).bit_length() - 1 if not den & (den - 1) else -1
    return IntRow(den, nums, bits, all(x >= 0 for x in nums), shift)


def _common_denominator(terms) -> int:
    d = 1
    for _, x, y in terms:
        d = lcm(d, int(x.den * y.den))
    return _make_int(d)


def convolve_python(terms, top: int) -> list:
    """Return ``[sum_t w_t * sum_k x_t[k] y_t[m-k] for m in 0..top]`` exactly.

    ``terms`` is a sequence of ``(weight, IntRow, IntRow)``.
    """
    if top < 0:
        return []
    den, scales = _scales(terms)
    acc = [0] * (top + 1)
    for f, (_, x, y) in zip(scales, terms):
        ys = y.nums
        ny = min(len(ys), top + 1)
        for i, xi in enumerate(x.nums[: top + 1]):
            if not xi:
                continue
            fx = f * xi
            for j in range(min(ny, top + 1 - i)):
                acc[i + j] += fx * ys[j]
    return [make_rational(a, den) for a in acc]


def _scales(terms):
    """Common denominator and the integer factor that brings each term onto it."""
    shifts = [x.shift + y.shift for _, x, y in terms]
    if all(x.shift >= 0 and y.shift >= 0 for _, x, y in terms):
        top_shift = max(shifts)
        return _make_int(1) << top_shift, [w << (top_shift - s) for (w, _, _), s in zip(terms, shifts)]
    den = _common_denominator(terms)
    return den, [w * (den // (x.den * y.den)) for w, x, y in terms]


def convolve_packed(terms, top: int) -> list:
    """Same contract as :func:`convolve_python`, one GMP product per term."""
    if top < 0:
        return []
    if not HAVE_GMPY2 or not all(x.nonneg and y.nonneg for _, x, y in terms):
        return convolve_python(terms, top)
    den, scales = _scales(terms)
    if any(f < 0 for f in scales):
        return convolve_python(terms, top)
    width = max(x.bits + y.bits + f.bit_length() for f, (_, x, y) in zip(scales, terms))
    # room for every product that lands in one slot, summed over all terms
    width += (top + 1).bit_length() + len(terms).bit_length() + 1
    pack = gmpy2.pack
    stop = top + 1
    acc = _make_int(0)
    for f, (_, x, y) in zip(scales, terms):
        xs = x.nums if len(x.nums) <= stop else x.nums[:stop]
        ys = y.nums if len(y.nums) <= stop else y.nums[:stop]
        acc += f * (pack(xs, width) * pack(ys, width))
    slots = gmpy2.unpack(acc, width)[:stop] if acc else []
    out = [make_rational(s, den) for s in slots]
    out.extend(make_rational(0) for _ in range(stop - len(out)))
    return out


_KERNELS = {"packed": convolve_packed, "python": convolve_python}


def active_kernel_name() -> str:
    name = os.environ.get("SWPV_KERNEL", "packed" if HAVE_GMPY2 else "python").strip().lower()
    if name not in _KERNELS:
        raise ValueError(f"SWPV_KERNEL must be one of {sorted(_KERNELS)}, got {name!r}")
    return name


def select_kernel(name: str | None = None):
    return _KERNELS[name or active_kernel_name()]
