"""Exact scalars of the form q * pi**k and finite Laurent polynomials in pi.

Everything here is rational arithmetic on top of :class:`fractions.Fraction`.
Numeric values only appear through :func:`pi_eval`, which uses mpmath at a
caller-chosen precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Mapping, Union

import mpmath

__all__ = [
    "Rational",
    "PiScalar",
    "PiLaurent",
    "TrigPoly",
    "SinCosPoly",
    "bernoulli",
    "zeta_even",
    "secant_rational",
    "secant_rationals",
    "secant_coefficient",
    "secant_delta",
    "secant_weighted_sum",
    "sin_weighted_sum",
    "pi_eval",
    "rational_to_str",
    "rational_from_str",
]

Rational = Fraction
RationalLike = Union[int, Fraction]


def rational_to_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def rational_from_str(text: str) -> Fraction:
    """Parse ``num/den``; the fraction must already be reduced with den > 0."""
    num_s, sep, den_s = text.partition("/")
    if not sep:
        raise ValueError(f"expected num/den, got {text!r}")
    num, den = int(num_s), int(den_s)
    if den <= 0:
        raise ValueError(f"denominator must be positive in {text!r}")
    q = Fraction(num, den)
    if q.numerator != num or q.denominator != den:
        raise ValueError(f"fraction {text!r} is not reduced")
    return q


@dataclass(frozen=True)
class PiScalar:
    """``coeff * pi**pi_exp`` with an exact rational coefficient."""

    coeff: Fraction
    pi_exp: int = 0

    def __post_init__(self) -> None:
        c = Fraction(self.coeff)
        object.__setattr__(self, "coeff", c)
        if c == 0:
            object.__setattr__(self, "pi_exp", 0)
        else:
            object.__setattr__(self, "pi_exp", int(self.pi_exp))

    @classmethod
    def zero(cls) -> "PiScalar":
        return cls(Fraction(0), 0)

    def is_zero(self) -> bool:
        return self.coeff == 0

    def _check_grading(self, other: "PiScalar") -> None:
        if self.pi_exp != other.pi_exp and not (self.is_zero() or other.is_zero()):
            raise ArithmeticError(
                f"cannot add pi^{self.pi_exp} and pi^{other.pi_exp} terms as a PiScalar"
            )

    def __add__(self, other: object) -> "PiScalar":
        if not isinstance(other, PiScalar):
            return NotImplemented
        self._check_grading(other)
        exp = self.pi_exp if not self.is_zero() else other.pi_exp
        return PiScalar(self.coeff + other.coeff, exp)

    def __sub__(self, other: object) -> "PiScalar":
        if not isinstance(other, PiScalar):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "PiScalar":
        return PiScalar(-self.coeff, self.pi_exp)

    def __mul__(self, other: object) -> "PiScalar":
        if isinstance(other, PiScalar):
            return PiScalar(self.coeff * other.coeff, self.pi_exp + other.pi_exp)
        if isinstance(other, (int, Fraction)):
            return PiScalar(self.coeff * other, self.pi_exp)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "PiScalar":
        if isinstance(other, PiScalar):
            if other.is_zero():
                raise ZeroDivisionError("division by zero PiScalar")
            return PiScalar(self.coeff / other.coeff, self.pi_exp - other.pi_exp)
        if isinstance(other, (int, Fraction)):
            return PiScalar(self.coeff / Fraction(other), self.pi_exp)
        return NotImplemented

    def to_laurent(self) -> "PiLaurent":
        return PiLaurent({self.pi_exp: self.coeff})

    def to_json(self) -> dict:
        return {"coefficient": rational_to_str(self.coeff), "pi_exponent": self.pi_exp}

    @classmethod
    def from_json(cls, obj: Mapping) -> "PiScalar":
        return cls(rational_from_str(obj["coefficient"]), int(obj["pi_exponent"]))

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        if self.pi_exp == 0:
            return str(self.coeff)
        return f"{self.coeff}*pi^{self.pi_exp}"


class PiLaurent:
    """Finite sum of rational multiples of integer powers of pi."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[int, RationalLike] | None = None) -> None:
        clean: dict[int, Fraction] = {}
        for exp, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                clean[int(exp)] = clean.get(int(exp), Fraction(0)) + c
        self._terms = {e: c for e, c in sorted(clean.items()) if c != 0}

    @classmethod
    def constant(cls, c: RationalLike) -> "PiLaurent":
        return cls({0: c})

    @classmethod
    def pi_power(cls, k: int, c: RationalLike = 1) -> "PiLaurent":
        return cls({k: c})

    @classmethod
    def coerce(cls, x: object) -> "PiLaurent":
        if isinstance(x, PiLaurent):
            return x
        if isinstance(x, PiScalar):
            return x.to_laurent()
        if isinstance(x, (int, Fraction)):
            return cls.constant(x)
        raise TypeError(f"cannot interpret {type(x).__name__} as PiLaurent")

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def coefficient(self, exp: int) -> Fraction:
        return self._terms.get(exp, Fraction(0))

    def exponents(self) -> list[int]:
        return list(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: object) -> "PiLaurent":
        try:
            o = PiLaurent.coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for e, c in o._terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return PiLaurent(out)

    __radd__ = __add__

    def __neg__(self) -> "PiLaurent":
        return PiLaurent({e: -c for e, c in self._terms.items()})

    def __sub__(self, other: object) -> "PiLaurent":
        try:
            o = PiLaurent.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: object) -> "PiLaurent":
        return PiLaurent.coerce(other) - self

    def __mul__(self, other: object) -> "PiLaurent":
        try:
            o = PiLaurent.coerce(other)
        except TypeError:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in o._terms.items():
                out[e1 + e2] = out.get(e1 + e2, Fraction(0)) + c1 * c2
        return PiLaurent(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "PiLaurent":
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = PiLaurent.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, other: object) -> "PiLaurent":
        if isinstance(other, (int, Fraction)):
            return PiLaurent({e: c / Fraction(other) for e, c in self._terms.items()})
        if isinstance(other, PiScalar):
            if other.is_zero():
                raise ZeroDivisionError("division by zero")
            return PiLaurent({e - other.pi_exp: c / other.coeff for e, c in self._terms.items()})
        if isinstance(other, PiLaurent) and len(other._terms) == 1:
            ((e0, c0),) = other._terms.items()
            return self / PiScalar(c0, e0)
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        try:
            o = PiLaurent.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def to_json(self) -> list[dict]:
        return [PiScalar(c, e).to_json() for e, c in self._terms.items()]

    @classmethod
    def from_json(cls, items: Iterable[Mapping]) -> "PiLaurent":
        out = cls()
        for item in items:
            out = out + PiScalar.from_json(item)
        return out

    def __repr__(self) -> str:
        return f"PiLaurent({self._terms!r})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(str(PiScalar(c, e)) for e, c in self._terms.items())


def _pi_of(x: object) -> PiLaurent:
    return PiLaurent.coerce(x)


@lru_cache(maxsize=None)
def bernoulli(m: int) -> Fraction:
    """Bernoulli number B_m with B_1 = -1/2."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return Fraction(1)
    if m > 1 and m % 2 == 1:
        return Fraction(0)
    total = sum(comb(m + 1, j) * bernoulli(j) for j in range(m))
    return -total / (m + 1)


def zeta_even(k: int) -> PiScalar:
    """zeta(2k) as an exact rational multiple of pi**(2k)."""
    if k < 1:
        raise ValueError("zeta_even needs k >= 1 (zeta has a pole at 1)")
    b = bernoulli(2 * k)
    coeff = (-1) ** (k + 1) * b * Fraction(2 ** (2 * k), 2 * factorial(2 * k))
    return PiScalar(coeff, 2 * k)


@lru_cache(maxsize=None)
def secant_rationals(count: int) -> tuple[Fraction, ...]:
    """First ``count`` Taylor coefficients q_n of sec(y) = sum q_n y**(2n)."""
    q: list[Fraction] = []
    for n in range(count):
        if n == 0:
            q.append(Fraction(1))
            continue
        s = Fraction(0)
        for k in range(1, n + 1):
            s += Fraction((-1) ** (k + 1), factorial(2 * k)) * q[n - k]
        q.append(s)
    return tuple(q)


def secant_rational(n: int) -> Fraction:
    if n < 0:
        return Fraction(0)
    size = 1
    while size <= n:
        size *= 2
    return secant_rationals(size)[n]


def secant_coefficient(n: int) -> PiScalar:
    """a_n, the x**(2n) coefficient of 1/cos(pi x); a_{-1} = 0."""
    if n < -1:
        raise ValueError("secant coefficients are defined for n >= -1")
    if n == -1:
        return PiScalar.zero()
    return PiScalar(secant_rational(n), 2 * n)


def secant_delta(n: int) -> PiLaurent:
    """a_n / 4**n - a_{n-1} / 4**(n-1)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    cur = secant_coefficient(n) / (4**n)
    if n == 0:
        return cur.to_laurent()
    return cur.to_laurent() - (secant_coefficient(n - 1) / (4 ** (n - 1))).to_laurent()


class TrigPoly:
    """sum_l (x/2)**l * (m_l cosh(x/2) + n_l sinh(x/2)) with rational m_l, n_l."""

    __slots__ = ("m", "n")

    def __init__(self, m: Mapping[int, RationalLike] | None = None,
                 n: Mapping[int, RationalLike] | None = None) -> None:
        self.m = {l: Fraction(c) for l, c in (m or {}).items() if c}
        self.n = {l: Fraction(c) for l, c in (n or {}).items() if c}

    @classmethod
    def cosh(cls) -> "TrigPoly":
        return cls(m={0: 1})

    @classmethod
    def sinh(cls) -> "TrigPoly":
        return cls(n={0: 1})

    def degree(self) -> int:
        return max([*self.m, *self.n], default=0)

    def triples(self) -> list[tuple[int, Fraction, Fraction]]:
        return [(l, self.m.get(l, Fraction(0)), self.n.get(l, Fraction(0)))
                for l in range(self.degree() + 1)]

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        m = dict(self.m)
        n = dict(self.n)
        for l, c in other.m.items():
            m[l] = m.get(l, Fraction(0)) + c
        for l, c in other.n.items():
            n[l] = n.get(l, Fraction(0)) + c
        return TrigPoly(m, n)

    def _apply(self, shift: int) -> "TrigPoly":
        # With y = x/2: D = (1/2) y d/dy and F = (1/2) d/dy y; shift = 0 or 1.
        m: dict[int, Fraction] = {}
        n: dict[int, Fraction] = {}
        half = Fraction(1, 2)
        for l, c in self.m.items():
            m[l] = m.get(l, Fraction(0)) + half * (l + shift) * c
            n[l + 1] = n.get(l + 1, Fraction(0)) + half * c
        for l, c in self.n.items():
            n[l] = n.get(l, Fraction(0)) + half * (l + shift) * c
            m[l + 1] = m.get(l + 1, Fraction(0)) + half * c
        return TrigPoly(m, n)

    def apply_D(self) -> "TrigPoly":
        return self._apply(0)

    def apply_F(self) -> "TrigPoly":
        return self._apply(1)

    def eta_weights(self) -> tuple[Fraction, dict[int, Fraction]]:
        """Integrate against exp(-x/2)/cosh(x/2)**2 over (0, inf).

        Returns ``(constant, w)`` where the integral equals
        ``constant + sum_l w[l] * I(l)`` and ``I(l)`` is the integral of
        exp(-x/2)/cosh(x/2) * (x/2)**l.  Integration by parts turns each
        sinh term into cosh terms: the sinh integral at degree l equals
        2*[l == 0] + l*I(l-1) - I(l).
        """
        const = 2 * self.n.get(0, Fraction(0))
        w: dict[int, Fraction] = {}
        for l in range(self.degree() + 1):
            val = self.m.get(l, Fraction(0)) - self.n.get(l, Fraction(0)) \
                + (l + 1) * self.n.get(l + 1, Fraction(0))
            if val:
                w[l] = val
        return const, w

    def __repr__(self) -> str:
        return f"TrigPoly({self.triples()!r})"


def _cosh_moment(l: int) -> PiScalar:
    # integral of exp(-x/2)/cosh(x/2) (x/2)**l = 2**(1-l) l! eta(l+1); only odd l is in Q[pi]
    if l % 2 == 0:
        raise ArithmeticError(f"moment of degree {l} involves an odd zeta value")
    k = (l + 1) // 2
    eta = zeta_even(k) * (1 - Fraction(1, 2 ** (2 * k - 1)))
    return eta * (Fraction(2) ** (1 - l) * factorial(l))


@lru_cache(maxsize=None)
def secant_weighted_sum(j: int) -> PiLaurent:
    """sum_{i>=0} i**j * (a_i/4**i - a_{i-1}/4**(i-1)) in closed form."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    even_poly = TrigPoly.cosh()
    odd_poly = TrigPoly.sinh()
    for _ in range(j):
        even_poly = even_poly.apply_D()
        odd_poly = odd_poly.apply_F()
    const, weights = (even_poly + odd_poly).eta_weights()
    for l, w in weights.items():
        if l % 2 == 0 and w != 0:
            raise ArithmeticError(f"odd zeta contribution at degree {l} does not cancel")
    total = PiLaurent.constant(const)
    for l, w in weights.items():
        total = total + _cosh_moment(l) * w
    if j == 0:
        # the -1 in cosh(x/2) - 1 integrates to 2 - pi; the i = 0 term adds pi
        total = total + 2
    return total * PiLaurent.pi_power(-1)


class SinCosPoly:
    """P(x) sin x + Q(x) cos x with P, Q Laurent polynomials in x over Q."""

    __slots__ = ("p", "q")

    def __init__(self, p: Mapping[int, RationalLike] | None = None,
                 q: Mapping[int, RationalLike] | None = None) -> None:
        self.p = {e: Fraction(c) for e, c in (p or {}).items() if c}
        self.q = {e: Fraction(c) for e, c in (q or {}).items() if c}

    @classmethod
    def sinc(cls) -> "SinCosPoly":
        return cls(p={-1: 1})

    def apply_D(self) -> "SinCosPoly":
        # (x/2) d/dx (P sin + Q cos) = (x/2)(P' - Q) sin + (x/2)(P + Q') cos
        p: dict[int, Fraction] = {}
        q: dict[int, Fraction] = {}
        half = Fraction(1, 2)
        for e, c in self.p.items():
            p[e] = p.get(e, Fraction(0)) + half * e * c
            q[e + 1] = q.get(e + 1, Fraction(0)) + half * c
        for e, c in self.q.items():
            q[e] = q.get(e, Fraction(0)) + half * e * c
            p[e + 1] = p.get(e + 1, Fraction(0)) - half * c
        return SinCosPoly(p, q)

    def times_x(self) -> "SinCosPoly":
        return SinCosPoly({e + 1: c for e, c in self.p.items()},
                          {e + 1: c for e, c in self.q.items()})

    def at_half_pi(self) -> PiLaurent:
        """Exact value at x = pi/2, where the cosine part vanishes."""
        return PiLaurent({e: c / Fraction(2) ** e for e, c in self.p.items()})


@lru_cache(maxsize=None)
def sin_weighted_sum(k: int) -> PiLaurent:
    """sum_{L>=0} (-1)**L (pi/2)**(2L+1) L**k / (2L+1)! in closed form."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    f = SinCosPoly.sinc()
    for _ in range(k):
        f = f.apply_D()
    return f.times_x().at_half_pi()


def pi_eval(x: object, precision_bits: int = 256) -> mpmath.mpf:
    """Numeric value of a PiScalar / PiLaurent / rational at the given precision."""
    if precision_bits < 64:
        raise ValueError("precision_bits must be at least 64")
    lau = _pi_of(x)
    with mpmath.workprec(precision_bits + 32):
        pi = mpmath.pi
        total = mpmath.mpf(0)
        for e, c in lau.terms.items():
            total += mpmath.mpf(c.numerator) / c.denominator * pi**e
    return total
