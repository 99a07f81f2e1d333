"""Exact arithmetic in F = Q_p and in a quadratic extension E = F + F*w.

Elements are stored exactly as rationals (F) or pairs of rationals (E, the
pair (c0, c1) standing for c0 + c1*w with w*w = a).  Every element that the
verification suites build lies in the number field Q(sqrt(a)), which is dense
in E, so nothing is ever truncated.  The p-adic view of an element -- its
valuation and its unit residue modulo p^K -- is derived on demand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Union

INF = math.inf

Rational = Union[int, Fraction]


class PrecisionError(ArithmeticError):
    """An operation needs more p-adic digits than the working precision K."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def vp_int(n: int, p: int) -> int | float:
    if n == 0:
        return INF
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp(x: Rational, p: int) -> int | float:
    """p-adic valuation of a rational, +inf for zero."""
    x = Fraction(x)
    if x == 0:
        return INF
    return vp_int(x.numerator, p) - vp_int(x.denominator, p)


def padic_unit(x: Rational, p: int) -> Fraction:
    """The unit part u of x = p^v * u."""
    x = Fraction(x)
    v = vp(x, p)
    return x / Fraction(p) ** v


def mod_pk(x: Rational, p: int, k: int) -> int:
    """Reduce a p-integral rational modulo p^k to an integer in [0, p^k)."""
    x = Fraction(x)
    if k <= 0:
        return 0
    m = p**k
    if x.denominator % p == 0:
        raise ValueError(f"{x} is not p-integral")
    return (x.numerator * pow(x.denominator, -1, m)) % m


def truncate_below(x: Rational, p: int, e: int) -> Fraction:
    """Canonical representative of x modulo p^e * Z_p.

    This is the p-adic expansion of x with every digit at position >= e
    dropped, so two rationals agree modulo p^e exactly when their truncations
    are equal.
    """
    x = Fraction(x)
    if x == 0:
        return Fraction(0)
    v = vp(x, p)
    if v >= e:
        return Fraction(0)
    u = x / Fraction(p) ** v
    return Fraction(mod_pk(u, p, e - v)) * Fraction(p) ** v


def frac_part(x: Rational, p: int) -> Fraction:
    """Fractional part {x}_p in [0, 1); the standard character of Q_p is e({x}_p)."""
    return truncate_below(x, p, 0)


def legendre(a: int, p: int) -> int:
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def parse_padic(token: str, p: int) -> Fraction:
    """Parse a coefficient.

    Plain tokens are base-p digit strings, most significant digit first, with
    an optional radix point: for p = 3, ``"21"`` is 7 and ``"1.2"`` is 5/3.
    Tokens containing ``/`` are decimal fractions such as ``"-1/2"``.  A leading
    ``-`` negates either form.
    """
    s = token.strip()
    if not s:
        raise ValueError("empty coefficient")
    if "/" in s:
        return Fraction(s)
    sign = 1
    if s[0] in "+-":
        sign = -1 if s[0] == "-" else 1
        s = s[1:]
    if "." in s:
        whole, frac = s.split(".", 1)
    else:
        whole, frac = s, ""
    digits = whole + frac
    if not digits or any(not ch.isdigit() or int(ch) >= p for ch in digits):
        raise ValueError(f"{token!r} is not a base-{p} digit string")
    return sign * Fraction(int(digits, p), p ** len(frac))


def format_padic(x: Rational, p: int) -> str:
    """Inverse of :func:`parse_padic`; exact whenever the denominator is a p-power."""
    x = Fraction(x)
    den = x.denominator
    k = vp_int(den, p)
    if den != p**k:
        return f"{x.numerator}/{x.denominator}"
    sign = "-" if x < 0 else ""
    n = abs(x.numerator)
    if n == 0:
        return "0"
    digits = []
    while n:
        digits.append(str(n % p))
        n //= p
    s = "".join(reversed(digits))
    if k:
        s = s.rjust(k + 1, "0")
        s = s[:-k] + "." + s[-k:]
    return sign + s


class BaseFieldElement:
    """An element of F = Q_p, viewed as p^valuation * unit."""

    __slots__ = ("value", "p", "precision")

    def __init__(self, value: Rational, p: int, precision: int = 8):
        self.value = Fraction(value)
        self.p = p
        self.precision = precision

    def _wrap(self, value) -> "BaseFieldElement":
        return BaseFieldElement(value, self.p, self.precision)

    @staticmethod
    def _raw(other):
        if isinstance(other, BaseFieldElement):
            return other.value
        if isinstance(other, (int, Fraction)):
            return other
        return NotImplemented

    @property
    def valuation(self) -> int | float:
        return vp(self.value, self.p)

    @property
    def unit(self) -> Fraction:
        if self.value == 0:
            return Fraction(0)
        return padic_unit(self.value, self.p)

    @property
    def unit_residue(self) -> int:
        """Unit part modulo p^K; 0 for the exact zero."""
        if self.value == 0:
            return 0
        return mod_pk(self.unit, self.p, self.precision)

    def abs(self) -> Fraction:
        v = self.valuation
        return Fraction(0) if v == INF else Fraction(self.p) ** (-v)

    def is_zero(self) -> bool:
        return self.value == 0

    def inv(self) -> "BaseFieldElement":
        if self.value == 0:
            raise ZeroDivisionError("inverse of exact zero in F")
        return self._wrap(1 / self.value)

    def __add__(self, other):
        o = self._raw(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._raw(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value - o)

    def __rsub__(self, other):
        o = self._raw(other)
        return NotImplemented if o is NotImplemented else self._wrap(o - self.value)

    def __mul__(self, other):
        o = self._raw(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._raw(other)
        if o is NotImplemented:
            return NotImplemented
        if o == 0:
            raise ZeroDivisionError("division by exact zero in F")
        return self._wrap(self.value / o)

    def __neg__(self):
        return self._wrap(-self.value)

    def __eq__(self, other):
        o = self._raw(other)
        return NotImplemented if o is NotImplemented else self.value == o

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"BaseFieldElement({format_padic(self.value, self.p)}, p={self.p})"


def base_arith(op: str, x: BaseFieldElement, y: BaseFieldElement | None = None) -> BaseFieldElement:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "neg":
        return -x
    if op == "inv":
        return x.inv()
    raise ValueError(f"unknown operation {op!r}")


@dataclass(frozen=True)
class ExtensionContext:
    """The prime p, the parameter a = w^2 and the working precision K.

    ``a`` must be either a unit non-square (E unramified, q_E = p^2) or p times
    a unit (E ramified, q_E = p).  Only odd p is supported.
    """

    p: int
    a: Fraction
    precision: int = 8

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        if not is_prime(self.p) or self.p == 2:
            raise ValueError(f"p must be an odd prime (p = 2 is not supported), got {self.p}")
        if self.precision <= 0:
            raise ValueError("precision must be positive")
        v = vp(self.a, self.p)
        if v == 0:
            if legendre(mod_pk(self.a, self.p, 1), self.p) != -1:
                raise ValueError(f"a = {self.a} is a square mod {self.p}; E would be split")
        elif v != 1:
            raise ValueError(f"a = {self.a} must be a unit non-square or p times a unit")

    @classmethod
    def unramified(cls, p: int, precision: int = 8) -> "ExtensionContext":
        """Unramified E with the smallest |a| among unit non-squares (a = -1 when p = 3 mod 4)."""
        if p % 4 == 3:
            return cls(p, Fraction(-1), precision)
        a = next(c for c in range(2, p) if legendre(c, p) == -1)
        return cls(p, Fraction(a), precision)

    @classmethod
    def ramified(cls, p: int, unit: int = 1, precision: int = 8) -> "ExtensionContext":
        return cls(p, Fraction(p * unit), precision)

    @property
    def ramified_ext(self) -> bool:
        return vp(self.a, self.p) == 1

    @property
    def ramification(self) -> str:
        return "ramified" if self.ramified_ext else "unramified"

    @property
    def e(self) -> int:
        return 2 if self.ramified_ext else 1

    @property
    def f(self) -> int:
        return 1 if self.ramified_ext else 2

    @property
    def q_F(self) -> int:
        return self.p

    @property
    def q_E(self) -> int:
        return self.p**self.f

    def coord_levels(self, j: int) -> tuple[int, int]:
        """(e0, e1) with P_E^j = p^e0 Z_p + p^e1 Z_p w."""
        if self.ramified_ext:
            return ceil_div(j, 2), ceil_div(j - 1, 2)
        return j, j

    def F(self, x: Rational) -> BaseFieldElement:
        return BaseFieldElement(x, self.p, self.precision)

    def elem(self, c0: Rational = 0, c1: Rational = 0) -> "ExtElement":
        return ExtElement(self, c0, c1)

    @cached_property
    def zero(self) -> "ExtElement":
        return ExtElement(self, 0, 0)

    @cached_property
    def one(self) -> "ExtElement":
        return ExtElement(self, 1, 0)

    @cached_property
    def omega(self) -> "ExtElement":
        return ExtElement(self, 0, 1)

    @cached_property
    def uniformizer(self) -> "ExtElement":
        return self.omega if self.ramified_ext else ExtElement(self, self.p, 0)

    @cached_property
    def abs_two(self) -> Fraction:
        """|2|_E (equal to 1 for odd p, computed rather than assumed)."""
        return abs_ext(ExtElement(self, 2, 0))

    def parse(self, s: str) -> "ExtElement":
        return parse_ext(self, s)


class ExtElement:
    """c0 + c1*w in E, with exact rational coordinates."""

    __slots__ = ("ctx", "c0", "c1")

    def __init__(self, ctx: ExtensionContext, c0: Rational = 0, c1: Rational = 0):
        self.ctx = ctx
        self.c0 = c0 if type(c0) is Fraction else Fraction(c0)
        self.c1 = c1 if type(c1) is Fraction else Fraction(c1)

    def _coerce(self, other) -> "ExtElement":
        if isinstance(other, ExtElement):
            return other
        if isinstance(other, (int, Fraction)):
            return ExtElement(self.ctx, other, 0)
        if isinstance(other, BaseFieldElement):
            return ExtElement(self.ctx, other.value, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ExtElement(self.ctx, self.c0 + o.c0, self.c1 + o.c1)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ExtElement(self.ctx, self.c0 - o.c0, self.c1 - o.c1)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExtElement(self.ctx, self.c0 * other, self.c1 * other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a = self.ctx.a
        return ExtElement(
            self.ctx,
            self.c0 * o.c0 + a * self.c1 * o.c1,
            self.c0 * o.c1 + self.c1 * o.c0,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return ExtElement(self.ctx, -self.c0, -self.c1)

    def norm_value(self) -> Fraction:
        return self.c0 * self.c0 - self.ctx.a * self.c1 * self.c1

    def inv(self) -> "ExtElement":
        n = self.norm_value()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in E")
        return ExtElement(self.ctx, self.c0 / n, -self.c1 / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inv()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inv()

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        result, base = self.ctx.one, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> "ExtElement":
        return ExtElement(self.ctx, self.c0, -self.c1)

    def is_zero(self) -> bool:
        return self.c0 == 0 and self.c1 == 0

    def __bool__(self):
        return not self.is_zero()

    def in_F(self) -> bool:
        return self.c1 == 0

    @property
    def valuation(self) -> int | float:
        """Normalized valuation of E (the uniformizer of E has valuation 1)."""
        p = self.ctx.p
        v0, v1 = vp(self.c0, p), vp(self.c1, p)
        if self.ctx.ramified_ext:
            return min(2 * v0, 2 * v1 + 1)
        return min(v0, v1)

    def abs(self) -> Fraction:
        return abs_ext(self)

    def is_integral(self) -> bool:
        return self.valuation >= 0

    def is_unit(self) -> bool:
        return self.valuation == 0

    def in_ideal(self, j: int) -> bool:
        """Membership in P_E^j."""
        return self.valuation >= j

    def reduce(self, j: int) -> "ExtElement":
        """Canonical representative of the class of self modulo P_E^j."""
        e0, e1 = self.ctx.coord_levels(j)
        p = self.ctx.p
        return ExtElement(self.ctx, truncate_below(self.c0, p, e0), truncate_below(self.c1, p, e1))

    def residue_key(self, j: int) -> tuple[Fraction, Fraction]:
        r = self.reduce(j)
        return (r.c0, r.c1)

    def coords(self) -> tuple[BaseFieldElement, BaseFieldElement]:
        return self.ctx.F(self.c0), self.ctx.F(self.c1)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.c0 == o.c0 and self.c1 == o.c1

    def __hash__(self):
        return hash((self.c0, self.c1))

    def __str__(self):
        return format_ext(self)

    def __repr__(self):
        return f"ExtElement({format_ext(self)!r})"


def ext_arith(op: str, x: ExtElement, y: ExtElement | None = None) -> ExtElement:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "neg":
        return -x
    if op == "inv":
        return x.inv()
    if op == "conj":
        return x.conj()
    raise ValueError(f"unknown operation {op!r}")


def field_norm(x: ExtElement) -> BaseFieldElement:
    """N_{E/F}(x) = x * conj(x) = c0^2 - a c1^2."""
    return x.ctx.F(x.norm_value())


def trace_EF(x: ExtElement) -> BaseFieldElement:
    return x.ctx.F(2 * x.c0)


def abs_ext(x: ExtElement) -> Fraction:
    """Normalized absolute value |x|_E = q_E^(-v_E(x)).

    Computed through the norm: |x|_E = |N_{E/F}(x)|_F.  This is the square of
    the unique extension of |.|_p (whose value is the square root of
    |N(x)|_p), normalized so that a uniformizer of E has absolute value 1/q_E.
    """
    n = x.norm_value()
    if n == 0:
        return Fraction(0)
    return Fraction(x.ctx.p) ** (-vp(n, x.ctx.p))


def parse_ext(ctx: ExtensionContext, s: str) -> ExtElement:
    """Parse ``"c0+c1*w"``, ``"c0"`` or ``"c1*w"`` with coefficients as in :func:`parse_padic`."""
    s = s.replace(" ", "")
    if not s.endswith("*w"):
        return ExtElement(ctx, parse_padic(s, ctx.p), 0)
    body = s[:-2]
    # split at the last sign that is not the leading one
    cut = max(body.rfind("+", 1), body.rfind("-", 1))
    if cut <= 0:
        return ExtElement(ctx, 0, parse_padic(body, ctx.p))
    c0, c1 = body[:cut], body[cut:]
    if c1[0] == "+":
        c1 = c1[1:]
    return ExtElement(ctx, parse_padic(c0, ctx.p), parse_padic(c1, ctx.p))


def format_ext(x: ExtElement) -> str:
    p = x.ctx.p
    if x.c1 == 0:
        return format_padic(x.c0, p)
    c1 = format_padic(abs(x.c1), p)
    sign = "-" if x.c1 < 0 else "+"
    if x.c0 == 0:
        return f"{'-' if sign == '-' else ''}{c1}*w"
    return f"{format_padic(x.c0, p)}{sign}{c1}*w"
