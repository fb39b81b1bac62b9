"""Exact super intersection numbers and super Weil-Petersson volumes.

A bracket ``[tau_{d_1} ... tau_{d_n}]_g`` equals ``q * pi**(2g - 2 - 2|d|)``
with ``q`` rational.  Since every term of the recursion carries the same
total pi grading, the engine works with the rational ``q`` alone and
attaches the power of pi at the boundary.

The recursion always peels off the largest part ``d_1``.  For a fixed genus
and remaining parts ``rest`` the genus-reducing and splitting sums only
depend on ``m = L + d_1 - 1``, so they are computed once per ``(g, rest)``
as a vector over ``m`` and shared by every choice of ``d_1``.
"""

from __future__ import annotations

import itertools
import sys
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, lcm
from pathlib import Path
from typing import Iterable, Sequence

import mpmath

from .convolution import IntRow, int_row, make_rational, select_kernel
from .pi_scalar import PiScalar, pi_eval, rational_from_str, rational_to_str, secant_rationals

__all__ = [
    "BracketKey",
    "MemoStore",
    "MemoIntegrityError",
    "CacheFormatError",
    "VolumePolynomial",
    "bracket",
    "bracket_coefficient",
    "empty_bracket",
    "verify_recursion_I",
    "verify_recursion_II",
    "volume",
    "volume_polynomial",
    "evaluate_volume",
    "jt_normalize",
    "cache_save",
    "cache_load",
    "estimate_key_count",
    "CACHE_HEADER",
]

CACHE_HEADER = "SWPV-CACHE 1"


class MemoIntegrityError(RuntimeError):
    """A key was inserted twice with different values."""


class CacheFormatError(ValueError):
    """Cache file is corrupt; ``line`` is the 1-based offending line."""

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, order=True)
class BracketKey:
    genus: int
    parts: tuple[int, ...]

    def __init__(self, genus: int, parts: Iterable[int] = ()) -> None:
        parts = tuple(sorted((int(p) for p in parts), reverse=True))
        if any(p < 0 for p in parts):
            raise ValueError("parts must be nonnegative")
        genus = int(genus)
        if genus < 1 or 2 * genus - 2 + len(parts) <= 0:
            raise ValueError(f"unstable key (g={genus}, n={len(parts)})")
        object.__setattr__(self, "genus", genus)
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return len(self.parts)

    @property
    def degree(self) -> int:
        return sum(self.parts)

    @property
    def kappa_exponent(self) -> int:
        return self.genus - 1 - self.degree

    @property
    def pi_exp(self) -> int:
        return 2 * self.genus - 2 - 2 * self.degree


def _secant_table(size: int) -> list:
    return [make_rational(q.numerator, q.denominator) for q in secant_rationals(size)]


@lru_cache(maxsize=4096)
def _splits(rest: tuple[int, ...]) -> tuple:
    """All ``(I, |I|, J, |J|, weight)`` over multiset splits of ``rest``."""
    items = sorted(Counter(rest).items(), reverse=True)
    out = []
    for choice in itertools.product(*(range(c + 1) for _, c in items)):
        left: list[int] = []
        right: list[int] = []
        weight = 1
        for (v, c), i in zip(items, choice):
            left.extend([v] * i)
            right.extend([v] * (c - i))
            weight *= comb(c, i)
        out.append((tuple(left), sum(left), tuple(right), sum(right), weight))
    return tuple(out)


def _insert(parts: tuple[int, ...], k: int) -> tuple[int, ...]:
    i = 0
    while i < len(parts) and parts[i] >= k:
        i += 1
    return parts[:i] + (k,) + parts[i:]


def _remove_one(parts: tuple[int, ...], v: int) -> tuple[int, ...]:
    i = parts.index(v)
    return parts[:i] + parts[i + 1:]


class MemoStore:
    """Exact bracket values keyed by ``(g, parts)`` plus recursion scratch data.

    Only the values are persistent; the row and shared-sum caches are derived
    data and can be dropped at any time with :meth:`trim`.
    """

    def __init__(self, kernel: str | None = None) -> None:
        self._values: dict[tuple[int, tuple[int, ...]], object] = {}
        self._rows: dict[tuple[int, tuple[int, ...]], IntRow] = {}
        self._shared: dict[tuple[int, tuple[int, ...]], list] = {}
        self._convolve = select_kernel(kernel)
        self._q = _secant_table(64)
        self.hits = 0
        self.misses = 0
        self.max_depth = 0
        self._depth = 0

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, key: object) -> bool:
        return _raw(key) in self._values

    def keys(self) -> list[BracketKey]:
        return [BracketKey(g, d) for g, d in self._values]

    def items(self):
        for (g, d), v in self._values.items():
            yield BracketKey(g, d), Fraction(int(v.numerator), int(v.denominator))

    def get_coefficient(self, key) -> Fraction | None:
        v = self._values.get(_raw(key))
        return None if v is None else Fraction(int(v.numerator), int(v.denominator))

    def insert(self, key, coeff) -> None:
        raw = _raw(key)
        value = make_rational(coeff.numerator, coeff.denominator)
        old = self._values.get(raw)
        if old is not None and old != value:
            raise MemoIntegrityError(f"conflicting values for {raw}: {old} != {value}")
        self._values[raw] = value

    def trim(self, below_genus: int | None = None) -> None:
        """Drop derived scratch data, or only the shared sums up to ``below_genus``."""
        if below_genus is None:
            self._rows.clear()
            self._shared.clear()
            return
        for key in [k for k in self._shared if k[0] <= below_genus]:
            del self._shared[key]

    def stats(self) -> dict:
        return {
            "entries": len(self._values),
            "hits": self.hits,
            "misses": self.misses,
            "max_depth": self.max_depth,
        }

    def _secant(self, count: int) -> list:
        if count > len(self._q):
            size = len(self._q)
            while size < count:
                size *= 2
            self._q = _secant_table(size)
        return self._q

    # -- recursion -------------------------------------------------------------

    def coefficient(self, g: int, parts: tuple[int, ...]):
        """Rational part of ``[tau_parts]_g``; ``parts`` must be sorted descending."""
        v = self._values.get((g, parts))
        if v is not None:
            self.hits += 1
            return v
        if sum(parts) > g - 1:
            return make_rational(0)
        self.misses += 1
        self._depth += 1
        self.max_depth = max(self.max_depth, self._depth)
        try:
            if g == 1 and parts == (0,):
                v = make_rational(1, 8)
            else:
                v = self._recurse(g, parts)
        finally:
            self._depth -= 1
        self._values[(g, parts)] = v
        return v

    def row(self, g: int, parts: tuple[int, ...]) -> IntRow:
        """``[tau_k tau_parts]_g`` for ``k = 0 .. g-1-|parts|`` over a shared denominator."""
        key = (g, parts)
        r = self._rows.get(key)
        if r is None:
            r = int_row([self.coefficient(g, _insert(parts, k)) for k in range(g - sum(parts))])
            self._rows[key] = r
        return r

    def _shared_sums(self, g: int, rest: tuple[int, ...]) -> list:
        """Genus-reducing plus splitting sums for every ``m = 0 .. g-2-|rest|``."""
        key = (g, rest)
        s = self._shared.get(key)
        if s is not None:
            return s
        top = g - 2 - sum(rest)
        if g < 2 or top < 0:
            s = []
            self._shared[key] = s
            return s
        lower = [self.row(g - 1, _insert(rest, k1)) for k1 in range(top + 1)]
        den = 1
        for r in lower:
            den = lcm(den, int(r.den))
        reduced = [0] * (top + 1)
        for k1, r in enumerate(lower):
            scale = den // int(r.den)
            nums = r.nums
            for k2 in range(top + 1 - k1):
                reduced[k1 + k2] += scale * nums[k2]
        terms = []
        rows = self._rows
        for left, left_sum, right, right_sum, weight in _splits(rest):
            for g1 in range(left_sum + 1, g - right_sum):
                g2 = g - g1
                if g1 > g2 or (g1 == g2 and left > right):
                    continue
                mult = weight if (g1 == g2 and left == right) else 2 * weight
                x = rows.get((g1, left)) or self.row(g1, left)
                y = rows.get((g2, right)) or self.row(g2, right)
                terms.append((mult, x, y))
        split = self._convolve(terms, top) if terms else [0] * (top + 1)
        s = [make_rational(reduced[m], den) + split[m] for m in range(top + 1)]
        self._shared[key] = s
        return s

    def _recurse(self, g: int, parts: tuple[int, ...]):
        d1 = parts[0]
        rest = parts[1:]
        d0 = g - 1 - sum(parts)
        q = self._secant(d0 + 1)
        total = make_rational(0)
        for v, c in Counter(rest).items():
            r = self.row(g, _remove_one(rest, v))
            nums = r.nums
            acc = make_rational(0)
            for L in range(d0 + 1):
                acc += q[L] * nums[L + d1 + v]
            total += c * (2 * v + 1) * acc / r.den
        shared = self._shared_sums(g, rest)
        if shared:
            acc = make_rational(0)
            for L in range(max(0, 1 - d1), d0 + 1):
                acc += q[L] * shared[L + d1 - 1]
            total += 2 * acc
        return total


def _raw(key) -> tuple[int, tuple[int, ...]]:
    if isinstance(key, BracketKey):
        return key.genus, key.parts
    g, d = key
    return int(g), tuple(sorted((int(x) for x in d), reverse=True))


def _ensure_depth(g: int, n: int) -> None:
    need = 200 + 12 * (2 * g + n)
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)


def _as_key(key, parts=None) -> BracketKey:
    if isinstance(key, BracketKey):
        return key
    if parts is None:
        g, parts = key
        return BracketKey(g, parts)
    return BracketKey(key, parts)


def bracket_coefficient(key, store: MemoStore) -> Fraction:
    """Rational part of the bracket (the pi power is ``key.pi_exp``)."""
    k = _as_key(key)
    if k.n == 0:
        raise ValueError("n = 0 brackets are computed by empty_bracket")
    if k.degree > k.genus - 1:
        return Fraction(0)
    _ensure_depth(k.genus, k.n)
    v = store.coefficient(k.genus, k.parts)
    return Fraction(int(v.numerator), int(v.denominator))


def bracket(key, store: MemoStore) -> PiScalar:
    k = _as_key(key)
    return PiScalar(bracket_coefficient(k, store), k.pi_exp)


@lru_cache(maxsize=None)
def _sin_weight(L: int) -> Fraction:
    return Fraction((-1) ** L, factorial(2 * L + 1))


def _empty_terms(g: int, store: MemoStore) -> list[PiScalar]:
    return [PiScalar(_sin_weight(L), 2 * L) * bracket(BracketKey(g, (L,)), store)
            for L in range(g)]


def empty_bracket(g: int, store: MemoStore) -> PiScalar:
    """``[ ]_g`` from the dilaton-type identity with one extra point."""
    if g < 2:
        raise ValueError("empty bracket needs g >= 2")
    cached = store.get_coefficient((g, ()))
    if cached is not None:
        return PiScalar(cached, 2 * g - 2)
    total = PiScalar.zero()
    for term in _empty_terms(g, store):
        total = total + term
    value = total / (2 * g - 2)
    store.insert((g, ()), value.coeff)
    return value


def _bracket_or_empty(g: int, parts: Sequence[int], store: MemoStore) -> PiScalar:
    if g < 1:
        return PiScalar.zero()
    if not parts:
        return empty_bracket(g, store) if g >= 2 else PiScalar.zero()
    key = BracketKey(g, parts)
    if key.degree > g - 1:
        return PiScalar.zero()
    return bracket(key, store)


def verify_recursion_I(g: int, d: Sequence[int], store: MemoStore) -> bool:
    """Check the tau_0 tau_1 identity at ``(g, d)`` exactly."""
    d = tuple(d)
    if g < 2 or sum(d) > g - 1:
        raise ValueError("need g >= 2 and |d| <= g - 1")
    lhs = _bracket_or_empty(g, (1, 0) + d, store)
    rhs = _bracket_or_empty(g - 1, (0, 0, 0, 0) + d, store)
    labels = range(len(d))
    for g1 in range(1, g):
        g2 = g - g1
        for size in range(len(d) + 1):
            for chosen in itertools.combinations(labels, size):
                left = (0, 0) + tuple(d[i] for i in chosen)
                right = (0, 0) + tuple(d[i] for i in labels if i not in chosen)
                rhs = rhs + 6 * _bracket_or_empty(g1, left, store) * _bracket_or_empty(g2, right, store)
    return lhs == rhs


def verify_recursion_II(g: int, d: Sequence[int], store: MemoStore) -> bool:
    """Check the forgetful identity that adds one point, exactly."""
    d = tuple(d)
    if sum(d) > g - 1:
        raise ValueError("need |d| <= g - 1")
    n = len(d)
    lhs = (2 * g - 2 + n) * _bracket_or_empty(g, d, store)
    rhs = PiScalar.zero()
    for L in range(g):
        rhs = rhs + PiScalar(_sin_weight(L), 2 * L) * _bracket_or_empty(g, (L,) + d, store)
    return lhs == rhs


def volume(g: int, n: int, store: MemoStore) -> PiScalar:
    if g < 1 or n < 0 or 2 * g - 2 + n <= 0:
        raise ValueError(f"unstable (g={g}, n={n})")
    if n == 0:
        return empty_bracket(g, store)
    return bracket(BracketKey(g, (0,) * n), store)


@dataclass(frozen=True)
class VolumePolynomial:
    """Coefficients of prod L_i**(2 d_i), one entry per sorted exponent vector.

    ``coefficients[d]`` is the coefficient of a single monomial with that
    exponent multiset; ``multiplicity(d)`` counts its distinct orderings.
    """

    genus: int
    n: int
    coefficients: dict

    @staticmethod
    def multiplicity(d: Sequence[int]) -> int:
        out = factorial(len(d))
        for c in Counter(d).values():
            out //= factorial(c)
        return out

    def constant_term(self) -> PiScalar:
        return self.coefficients.get((0,) * self.n, PiScalar.zero())

    def evaluate(self, lengths: Sequence[float], precision_bits: int = 256):
        if len(lengths) != self.n:
            raise ValueError("need one length per boundary")
        if any(x < 0 for x in lengths):
            raise ValueError("lengths must be nonnegative")
        with mpmath.workprec(precision_bits + 32):
            ls = [mpmath.mpf(x) for x in lengths]
            total = mpmath.mpf(0)
            for d, c in self.coefficients.items():
                cval = pi_eval(c, precision_bits)
                for perm in set(itertools.permutations(d)):
                    term = cval
                    for L, e in zip(ls, perm):
                        term *= L ** (2 * e)
                    total += term
            return total


def _exponent_vectors(n: int, max_sum: int, max_part: int | None = None):
    if max_part is None:
        max_part = max_sum
    if n == 0:
        yield ()
        return
    for first in range(min(max_sum, max_part), -1, -1):
        for tail in _exponent_vectors(n - 1, max_sum - first, first):
            yield (first,) + tail


def volume_polynomial(g: int, n: int, store: MemoStore) -> VolumePolynomial:
    if n < 1:
        raise ValueError("volume polynomials need n >= 1")
    coeffs = {}
    for d in _exponent_vectors(n, g - 1):
        b = bracket(BracketKey(g, d), store)
        scale = Fraction(1, 4 ** sum(d))
        for x in d:
            scale /= factorial(2 * x + 1)
        coeffs[d] = b * scale
    return VolumePolynomial(g, n, coeffs)


def evaluate_volume(g: int, n: int, lengths: Sequence[float], store: MemoStore,
                    precision_bits: int = 256):
    if len(lengths) != n:
        raise ValueError("need one length per boundary")
    if any(x < 0 for x in lengths):
        raise ValueError("lengths must be nonnegative")
    if n == 0:
        return pi_eval(volume(g, 0, store), precision_bits)
    return volume_polynomial(g, n, store).evaluate(lengths, precision_bits)


def jt_normalize(g: int, n: int, v: PiScalar) -> PiScalar:
    """Rescale by 2**(1 - g - n)."""
    return v * (Fraction(2) ** (1 - g - n))


# -- persistence -------------------------------------------------------------


def _format_entry(g: int, d: tuple[int, ...], v) -> str:
    return f"{g}|{','.join(map(str, d))}|{v.numerator}/{v.denominator}"


def cache_save(store: MemoStore, path) -> int:
    lines = sorted(_format_entry(g, d, v) for (g, d), v in store._values.items())
    text = "\n".join([CACHE_HEADER, *lines, f"#count={len(lines)}"]) + "\n"
    Path(path).write_text(text)
    return len(lines)


def cache_load(path, store: MemoStore | None = None) -> MemoStore:
    store = store if store is not None else MemoStore()
    text = Path(path).read_text()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != CACHE_HEADER:
        raise CacheFormatError(f"expected header {CACHE_HEADER!r}", 1)
    if len(lines) < 2 or not lines[-1].startswith("#count="):
        raise CacheFormatError("missing #count trailer", len(lines))
    entries = lines[1:-1]
    for offset, line in enumerate(entries, start=2):
        fields = line.split("|")
        if len(fields) != 3:
            raise CacheFormatError(f"malformed entry {line!r}", offset)
        try:
            g = int(fields[0])
            d = tuple(int(x) for x in fields[1].split(",")) if fields[1] else ()
            value = rational_from_str(fields[2])
        except ValueError as exc:
            raise CacheFormatError(f"malformed entry {line!r}: {exc}", offset) from None
        if list(d) != sorted(d, reverse=True) or any(x < 0 for x in d) or 2 * g - 2 + len(d) <= 0 or g < 1:
            raise CacheFormatError(f"non-canonical key in {line!r}", offset)
        try:
            store.insert((g, d), value)
        except MemoIntegrityError as exc:
            raise CacheFormatError(str(exc), offset) from None
    try:
        count = int(lines[-1][len("#count="):])
    except ValueError:
        raise CacheFormatError("unreadable #count trailer", len(lines)) from None
    if count != len(entries):
        raise CacheFormatError(f"checksum mismatch: trailer says {count}, found {len(entries)}",
                               len(lines))
    return store


# -- budget estimate -----------------------------------------------------------


@lru_cache(maxsize=None)
def _bounded_partitions(total: int, max_count: int, max_part: int) -> int:
    if total == 0:
        return 1
    if max_count == 0 or max_part == 0:
        return 0
    return sum(_bounded_partitions(total - x, max_count - 1, x)
               for x in range(1, min(total, max_part) + 1))


def _keys_at_level(g: int, n: int) -> int:
    # multisets of n nonnegative parts with sum <= g - 1
    return sum(_bounded_partitions(s, n, s) for s in range(g))


def estimate_key_count(targets: Iterable[tuple[int, int]]) -> int:
    """Upper estimate of memo entries needed for the given ``(g, n)`` volumes.

    Walks the recursion at the level of ``(genus, point count)`` pairs, which
    is cheap, and counts every key with admissible degree at each level
    reached.
    """
    seen: set[tuple[int, int]] = set()
    stack = []
    for g, n in targets:
        stack.append((g, max(n, 1)))
    while stack:
        g, n = stack.pop()
        if g < 1 or n < 1 or (g, n) in seen:
            continue
        seen.add((g, n))
        stack.append((g, n - 1))
        stack.append((g - 1, n + 1))
        for g1 in range(1, g):
            for n1 in range(1, n + 1):
                stack.append((g1, n1))
    return sum(_keys_at_level(g, n) for g, n in seen)
