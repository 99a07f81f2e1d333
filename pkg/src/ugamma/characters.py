"""Characters of E and exact sums of their values.

Character values are elements of Q/Z (the exponent t of e(t) = exp(2 pi i t)).
Sums of roots of unity of p-power order are accumulated exactly in
:class:`ExactSum`, an integer-style vector indexed by Z/p^k whose vanishing
is decided by the cyclotomic relations, never by floating point.
"""
from __future__ import annotations

import cmath
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .localfield import (
    ExtElement,
    ExtensionContext,
    PrecisionError,
    frac_part,
    vp_int,
)


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured size budget."""


def check_budget(size: int, budget: int | None, what: str) -> None:
    if budget is not None and size > budget:
        raise BudgetExceeded(f"{what}: {size} elements exceeds budget {budget}")


class CharacterValue:
    """An element of Q/Z, stored reduced into [0, 1)."""

    __slots__ = ("exponent",)

    def __init__(self, exponent=0):
        e = Fraction(exponent)
        self.exponent = e - math.floor(e)

    def __add__(self, other: "CharacterValue") -> "CharacterValue":
        return CharacterValue(self.exponent + other.exponent)

    def __sub__(self, other: "CharacterValue") -> "CharacterValue":
        return CharacterValue(self.exponent - other.exponent)

    def __neg__(self) -> "CharacterValue":
        return CharacterValue(-self.exponent)

    def __mul__(self, k: int) -> "CharacterValue":
        return CharacterValue(self.exponent * k)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, CharacterValue):
            return self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self == CharacterValue(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.exponent)

    def is_trivial(self) -> bool:
        return self.exponent == 0

    @property
    def order(self) -> int:
        return self.exponent.denominator

    def to_complex(self) -> complex:
        return cmath.exp(2j * math.pi * float(self.exponent))

    def __str__(self):
        return f"{self.exponent.numerator}/{self.exponent.denominator}"

    def __repr__(self):
        return f"CharacterValue({self})"


def _p_exponent(den: int, p: int) -> int:
    k = vp_int(den, p)
    if p**k != den:
        raise ValueError(f"denominator {den} is not a power of {p}")
    return k


class ExactSum:
    """A formal sum of c_r * zeta^r, zeta a primitive p^k-th root of unity.

    Coefficients are rationals so that measure weights can be carried along.
    The representation is canonical: inside every block {r + i p^(k-1)} the
    top coefficient is subtracted off, which is exactly reduction modulo the
    relations sum_i zeta^(r + i p^(k-1)) = 0 generating the kernel.
    """

    __slots__ = ("p", "k", "coeffs")

    def __init__(self, p: int, k: int = 0, coeffs: dict[int, Fraction] | None = None):
        self.p = p
        self.k = k
        self.coeffs: dict[int, Fraction] = {}
        for r, c in (coeffs or {}).items():
            if c:
                self.coeffs[r % p**k] = Fraction(c)

    @classmethod
    def from_values(cls, p: int, values: Iterable[CharacterValue], weight=1) -> "ExactSum":
        s = cls(p)
        for v in values:
            s.add(v, weight)
        return s

    def _lift(self, k: int) -> None:
        if k <= self.k:
            return
        scale = self.p ** (k - self.k)
        self.coeffs = {r * scale: c for r, c in self.coeffs.items()}
        self.k = k

    def add(self, value: CharacterValue, weight=1) -> "ExactSum":
        e = value.exponent
        k = _p_exponent(e.denominator, self.p)
        self._lift(k)
        r = e.numerator * self.p ** (self.k - k) % self.p**self.k
        c = self.coeffs.get(r, 0) + Fraction(weight)
        if c:
            self.coeffs[r] = c
        else:
            self.coeffs.pop(r, None)
        return self

    def add_counts(self, counts: dict[Fraction, int], weight=1) -> "ExactSum":
        for e, n in counts.items():
            self.add(CharacterValue(e), Fraction(weight) * n)
        return self

    def merge(self, other: "ExactSum") -> "ExactSum":
        if other.p != self.p:
            raise ValueError("cannot merge sums over different primes")
        out = self.copy()
        out._lift(other.k)
        scale = other.p ** (out.k - other.k)
        for r, c in other.coeffs.items():
            rr = r * scale
            v = out.coeffs.get(rr, 0) + c
            if v:
                out.coeffs[rr] = v
            else:
                out.coeffs.pop(rr, None)
        return out

    __add__ = merge

    def scale(self, w) -> "ExactSum":
        return ExactSum(self.p, self.k, {r: c * w for r, c in self.coeffs.items()})

    def copy(self) -> "ExactSum":
        return ExactSum(self.p, self.k, dict(self.coeffs))

    def canonical(self) -> tuple[int, tuple[tuple[int, Fraction], ...]]:
        """Reduced (k, coefficient list); equal sums have equal canonical forms.

        At level k the reduced vector avoids the top block; if it is then
        supported on multiples of p the sum lives at level k-1 and is reduced
        again there.
        """
        p, k = self.p, self.k
        c = dict(self.coeffs)
        while True:
            if k == 0:
                v = c.get(0, Fraction(0))
                return 0, ((0, v),) if v else ()
            sub = p ** (k - 1)
            reduced: dict[int, Fraction] = {}
            for r0 in range(sub):
                top = c.get(r0 + (p - 1) * sub, Fraction(0))
                for i in range(p - 1):
                    r = r0 + i * sub
                    v = c.get(r, Fraction(0)) - top
                    if v:
                        reduced[r] = v
            if not reduced:
                return 0, ()
            if all(r % p == 0 for r in reduced):
                c = {r // p: v for r, v in reduced.items()}
                k -= 1
                continue
            return k, tuple(sorted(reduced.items()))

    def is_zero(self) -> bool:
        return not self.canonical()[1]

    def __eq__(self, other):
        if not isinstance(other, ExactSum):
            return NotImplemented
        return self.p == other.p and (self - other).is_zero()

    def __sub__(self, other: "ExactSum") -> "ExactSum":
        return self.merge(other.scale(-1))

    def __hash__(self):
        return hash(self.canonical())

    def total_weight(self) -> Fraction:
        return sum(self.coeffs.values(), Fraction(0))

    def rational_value(self) -> Fraction | None:
        """The value if it is rational, else None."""
        k, items = self.canonical()
        if not items:
            return Fraction(0)
        if k == 0:
            return items[0][1]
        return None

    def to_complex(self) -> complex:
        n = self.p**self.k
        return sum(complex(c) * cmath.exp(2j * math.pi * r / n) for r, c in self.coeffs.items())

    def to_json(self) -> dict:
        k, items = self.canonical()
        return {
            "p": self.p,
            "k": k,
            "coefficients": {str(r): str(c) for r, c in items},
            "terms": [f"{c}*e({Fraction(r, self.p ** k)})" for r, c in items],
        }

    def __repr__(self):
        k, items = self.canonical()
        if not items:
            return "ExactSum(0)"
        return "ExactSum(" + " + ".join(f"{c}*e({Fraction(r, self.p ** k)})" for r, c in items) + ")"


def cyclotomic_sum(p: int, values: Iterable[CharacterValue]) -> ExactSum:
    return ExactSum.from_values(p, values)


def is_zero(s: ExactSum) -> bool:
    return s.is_zero()


class AdditiveCharacter:
    """psi_0(c0 + c1 w) = {c0}_p + {c1}_p, with conductor O_E.

    The conductor is verified at construction: trivial on the Z_p-basis of
    O_E and nontrivial somewhere on P_E^-1 / O_E.
    """

    def __init__(self, ctx: ExtensionContext):
        self.ctx = ctx
        self._verify_conductor()

    def __call__(self, x: ExtElement) -> CharacterValue:
        return self.eval(x)

    def eval(self, x: ExtElement) -> CharacterValue:
        if x.valuation < -self.ctx.precision * self.ctx.e:
            raise PrecisionError(f"valuation {x.valuation} below working precision -{self.ctx.precision}")
        p = self.ctx.p
        return CharacterValue(frac_part(x.c0, p) + frac_part(x.c1, p))

    def linear_functional(self, x: ExtElement) -> Fraction:
        """The F-linear map lambda with psi_0(x) = psi_F(lambda(x))."""
        return x.c0 + x.c1

    def _verify_conductor(self) -> None:
        ctx = self.ctx
        for b in (ctx.one, ctx.omega):
            if not self.eval(b).is_trivial():
                raise ValueError("additive character is not trivial on O_E")
        found = False
        for x in ideal_quotient(ctx, -1, 0):
            if not self.eval(x).is_trivial():
                found = True
                break
        if not found:
            raise ValueError("additive character is trivial on P^-1; conductor is not O_E")


def eval_additive(psi: AdditiveCharacter, x: ExtElement) -> CharacterValue:
    return psi.eval(x)


def ideal_quotient(ctx: ExtensionContext, lo: int, hi: int) -> Iterable[ExtElement]:
    """Canonical representatives of P^lo / P^hi."""
    p = ctx.p
    a0, a1 = ctx.coord_levels(lo)
    b0, b1 = ctx.coord_levels(hi)
    s0 = Fraction(p) ** a0
    s1 = Fraction(p) ** a1
    for i, j in itertools.product(range(p ** (b0 - a0)), range(p ** (b1 - a1))):
        yield ExtElement(ctx, i * s0, j * s1)


def ideal_generators(ctx: ExtensionContext, n: int) -> tuple[ExtElement, ExtElement]:
    """Z_p-module generators of P^n."""
    e0, e1 = ctx.coord_levels(n)
    p = Fraction(ctx.p)
    return ExtElement(ctx, p**e0, 0), ExtElement(ctx, 0, p**e1)


def unit_residues(ctx: ExtensionContext, N: int) -> list[ExtElement]:
    """Canonical representatives of (O_E / P^N)^x."""
    return [x for x in ideal_quotient(ctx, 0, N) if x.valuation == 0]


def principal_units(ctx: ExtensionContext, n: int, N: int) -> list[ExtElement]:
    """Representatives 1 + x of (1 + P^n) / (1 + P^N)."""
    return [ctx.one + x for x in ideal_quotient(ctx, n, N)]


def residue_generator(ctx: ExtensionContext) -> ExtElement:
    """A generator of the multiplicative group of the residue field, as a canonical rep mod P."""
    q = ctx.q_E
    units = unit_residues(ctx, 1)
    for g in units:
        x, order = g, 1
        while x.reduce(1) != ctx.one:
            x = (x * g).reduce(1)
            order += 1
        if order == q - 1:
            return g
    raise AssertionError("residue field has no generator")


def teichmuller(u: ExtElement, N: int) -> ExtElement:
    """The root of unity of order prime to p congruent to u, modulo P^N.

    (1 + P)/(1 + P^N) has order q^(N-1), so u^(q^(N-1)) kills the principal
    part and fixes the root of unity.
    """
    ctx = u.ctx
    x = u.reduce(N)
    for _ in range(N - 1):
        x = _pow_mod(x, ctx.q_E, N)
    return x


def _pow_mod(x: ExtElement, k: int, N: int) -> ExtElement:
    result = x.ctx.one
    base = x.reduce(N)
    while k:
        if k & 1:
            result = (result * base).reduce(N)
        base = (base * base).reduce(N)
        k >>= 1
    return result


class UnitGroup:
    """(O_E / P^N)^x by brute force: generators, orders and a discrete-log table."""

    def __init__(self, ctx: ExtensionContext, N: int, budget: int | None = 100_000):
        if N < 1:
            raise ValueError("N must be at least 1")
        self.ctx = ctx
        self.N = N
        size = (ctx.q_E - 1) * ctx.q_E ** (N - 1)
        check_budget(size, budget, f"unit group mod P^{N}")
        self.size = size
        self.elements = unit_residues(ctx, N)
        assert len(self.elements) == size
        self._mul_cache: dict = {}
        self.generators, self.orders = self._find_generators()
        self._log = self._build_log_table()

    def key(self, u: ExtElement):
        return u.residue_key(self.N)

    def mul(self, x: ExtElement, y: ExtElement) -> ExtElement:
        return (x * y).reduce(self.N)

    def order(self, x: ExtElement) -> int:
        one = self.ctx.one
        y, k = x.reduce(self.N), 1
        while y != one:
            y = self.mul(y, x)
            k += 1
        return k

    def cyclic(self, x: ExtElement) -> list[ExtElement]:
        out = [self.ctx.one]
        y = x.reduce(self.N)
        while y != self.ctx.one:
            out.append(y)
            y = self.mul(y, x)
        return out

    def _find_generators(self):
        ctx, N = self.ctx, self.N
        g = teichmuller(residue_generator(ctx), N)
        gens = [g]
        orders = [self.order(g)]
        assert orders[0] == ctx.q_E - 1
        if N == 1:
            return gens, orders
        subgroup = {self.key(x) for x in self.cyclic(g)}
        principal = principal_units(ctx, 1, N)
        p_orders = {self.key(x): self.order(x) for x in principal}
        while len(subgroup) < self.size:
            best = None
            for x in principal:
                o = p_orders[self.key(x)]
                if best is not None and o <= best[1]:
                    continue
                cyc = self.cyclic(x)
                if all(self.key(c) not in subgroup for c in cyc[1:]):
                    best = (x, o)
            if best is None:
                raise AssertionError("no complement generator found")
            x, o = best
            new = set()
            for c in self.cyclic(x):
                for s in subgroup:
                    new.add(self.key(self.mul(c, ExtElement(ctx, *s))))
            subgroup = new
            gens.append(x)
            orders.append(o)
        assert math.prod(orders) == self.size
        return gens, orders

    def _build_log_table(self) -> dict:
        table = {self.key(self.ctx.one): (0,) * len(self.generators)}
        frontier = [(self.ctx.one, (0,) * len(self.generators))]
        for i, (g, o) in enumerate(zip(self.generators, self.orders)):
            nxt = []
            for x, e in frontier:
                y = x
                for j in range(o):
                    if j:
                        y = self.mul(y, g)
                    ee = e[:i] + (j,) + e[i + 1:]
                    table[self.key(y)] = ee
                    nxt.append((y, ee))
            frontier = nxt
        assert len(table) == self.size
        return table

    def log(self, u: ExtElement) -> tuple[int, ...]:
        if u.valuation != 0:
            raise ValueError(f"{u} is not a unit")
        return self._log[self.key(u)]


def principal_log(x: ExtElement, N: int) -> ExtElement:
    """log(x) modulo P^N for x in 1 + P.

    The k-th term y^k/k has valuation at least k - e*v_p(k); every term past
    4N + 10 lies in P^N, so the series is summed up to there.  Powers of y are
    kept modulo P^(N + e*v) with v bounding the p-adic valuation of k.
    """
    ctx = x.ctx
    y = (x - 1).reduce(N)
    if y.valuation < 1:
        raise ValueError("principal_log needs x in 1 + P")
    p, e = ctx.p, ctx.e
    kmax = 4 * N + 10
    guard = N + e * (int(math.log(kmax, p)) + 1)
    total = ctx.zero
    power = ctx.one
    for k in range(1, kmax + 1):
        power = (power * y).reduce(guard)
        if power.is_zero():
            break
        total = total + power * Fraction((-1) ** (k + 1), k)
    return total.reduce(N)


@dataclass
class MultiplicativeCharacter:
    """A character of E^x restricted to O_E^x, with conductor exactly 1 + P^N_chi.

    It is given either by images of the generators of a :class:`UnitGroup`
    or by a tame image and a wild parameter (then values come from the
    logarithm and no table is built).
    """

    ctx: ExtensionContext
    N_chi: int
    _fn: Callable[[ExtElement], CharacterValue] = field(repr=False)
    description: dict = field(default_factory=dict)

    @property
    def n_chi(self) -> int:
        return (self.N_chi + 1) // 2

    def __call__(self, u: ExtElement) -> CharacterValue:
        return self.eval(u)

    def eval(self, u: ExtElement) -> CharacterValue:
        if u.valuation != 0:
            raise ValueError(f"{u} is not a unit of O_E")
        return self._fn(u.reduce(self.N_chi))

    def inverse(self) -> "MultiplicativeCharacter":
        fn = self._fn
        return MultiplicativeCharacter(self.ctx, self.N_chi, lambda u: -fn(u), {"inverse_of": self.description})

    @property
    def sign_at_minus_one(self) -> CharacterValue:
        return self.eval(-self.ctx.one)

    def check_conductor(self) -> None:
        ctx, N = self.ctx, self.N_chi
        for g in ideal_generators(ctx, N):
            if not self.eval(ctx.one + g).is_trivial():
                raise ValueError("character is not trivial on 1 + P^N_chi")
        lower = unit_residues(ctx, N) if N == 1 else principal_units(ctx, N - 1, N)
        if all(self.eval(u).is_trivial() for u in lower):
            raise ValueError(f"conductor is smaller than 1 + P^{N}")


def make_mult_character(
    ctx: ExtensionContext,
    N_chi: int,
    generator_images: Sequence,
    group: UnitGroup | None = None,
) -> MultiplicativeCharacter:
    """Character from the images (in Q/Z) of the generators of (O_E/P^N_chi)^x."""
    group = group or UnitGroup(ctx, N_chi)
    images = [CharacterValue(x) if not isinstance(x, CharacterValue) else x for x in generator_images]
    if len(images) != len(group.generators):
        raise ValueError(f"expected {len(group.generators)} generator images, got {len(images)}")
    for img, o in zip(images, group.orders):
        if not (img * o).is_trivial():
            raise ValueError(f"image {img} is incompatible with generator order {o}")

    def fn(u: ExtElement) -> CharacterValue:
        e = group.log(u)
        v = CharacterValue(0)
        for ei, img in zip(e, images):
            v = v + img * ei
        return v

    chi = MultiplicativeCharacter(
        ctx, N_chi, fn, {"generator_images": [str(i) for i in images], "generators": [str(g) for g in group.generators]}
    )
    chi.check_conductor()
    return chi


def character_from_wild(ctx: ExtensionContext, N_chi: int, a0: ExtElement, tame=0) -> MultiplicativeCharacter:
    """chi(zeta * u1) = tame * index(zeta) + psi_0(a0 * log u1) for unramified E.

    zeta runs over roots of unity (indexed as powers of the Teichmuller lift of
    the fixed residue generator) and u1 over 1 + P.  v_E(a0) must be -N_chi.
    """
    if ctx.ramified_ext:
        raise ValueError("character_from_wild supports unramified E only")
    if a0.valuation != -N_chi:
        raise ValueError(f"wild parameter must have valuation -{N_chi}, got {a0.valuation}")
    tame = CharacterValue(tame)
    q = ctx.q_E
    if not (tame * (q - 1)).is_trivial():
        raise ValueError(f"tame image {tame} does not have order dividing {q - 1}")
    psi = AdditiveCharacter(ctx)
    N = N_chi
    g_res = residue_generator(ctx)
    res_index = {}
    x = ctx.one
    for i in range(q - 1):
        res_index[x.residue_key(1)] = i
        x = (x * g_res).reduce(1)
    a_red = a0.reduce(0)

    cache: dict = {}

    def fn(u: ExtElement) -> CharacterValue:
        key = u.residue_key(N)
        if key in cache:
            return cache[key]
        t = teichmuller(u, N)
        u1 = (u * t.inv()).reduce(N)
        i = res_index[u.residue_key(1)]
        wild = psi(a_red * principal_log(u1, N)) if N > 1 else CharacterValue(0)
        cache[key] = tame * i + wild
        return cache[key]

    chi = MultiplicativeCharacter(ctx, N_chi, fn, {"wild": str(a0), "tame": str(tame)})
    chi.check_conductor()
    return chi


def eval_mult(chi: MultiplicativeCharacter, u: ExtElement) -> CharacterValue:
    return chi.eval(u)


@dataclass(frozen=True)
class WildParameters:
    a: ExtElement
    b: ExtElement
    n_chi: int
    N_chi: int


def _solve_wild(chi: MultiplicativeCharacter, psi: AdditiveCharacter) -> ExtElement:
    ctx = chi.ctx
    N, n = chi.N_chi, chi.n_chi
    gens = ideal_generators(ctx, n)
    targets = [chi.eval(ctx.one + g) for g in gens]
    hits = []
    for a in ideal_quotient(ctx, -N, -n):
        if all(psi.eval(a * g) == t for g, t in zip(gens, targets)):
            hits.append(a)
    if len(hits) != 1:
        raise AssertionError(f"expected one wild parameter class, found {len(hits)}")
    return hits[0]


def wild_parameter(chi: MultiplicativeCharacter, psi: AdditiveCharacter) -> WildParameters:
    """a, b with chi(1+x) = psi_0(a x), chi^-1(1+x) = psi_0(b x) for x in P^n_chi.

    a is unique modulo P^-n_chi (the annihilator of P^n_chi under psi_0); the
    canonical representative is returned.
    """
    ctx = chi.ctx
    a = _solve_wild(chi, psi)
    b = _solve_wild(chi.inverse(), psi)
    q = ctx.q_E
    N, n = chi.N_chi, chi.n_chi
    if a.abs() != Fraction(q) ** N or b.abs() != Fraction(q) ** N:
        raise AssertionError("wild parameters do not have absolute value q^N_chi")
    if (a + b).abs() > Fraction(q) ** n:
        raise AssertionError("|a + b| exceeds q^n_chi")
    return WildParameters(a, b, n, N)


def value_counts(values: Iterable[CharacterValue]) -> Counter:
    return Counter(v.exponent for v in values)
