"""The unitary group U_m(T), its Lie algebra, lattice quotients and the doubling embedding."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from .characters import check_budget
from .localfield import ExtElement, ExtensionContext, vp
from .matrixalg import MatrixE, cayley, matrix_norm


@dataclass(frozen=True)
class FormContext:
    """U_m(T) for T = diag(p^-1 u_1, ..., p^-1 u_k, u_(k+1), ..., u_m), u_i units of F.

    The first k diagonal entries have |T_ii|_F = q_F, the rest are units.
    """

    ext: ExtensionContext
    m: int
    k: int = 0
    T_units: tuple = ()

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")
        if not 0 <= self.k <= self.m:
            raise ValueError(f"k must lie in [0, m], got {self.k}")
        units = tuple(Fraction(u) for u in (self.T_units or (1,) * self.m))
        if len(units) != self.m:
            raise ValueError(f"need {self.m} unit parts of T, got {len(units)}")
        for u in units:
            if u == 0 or vp(u, self.ext.p) != 0:
                raise ValueError(f"T unit part {u} is not a p-adic unit")
        object.__setattr__(self, "T_units", units)

    @property
    def p(self) -> int:
        return self.ext.p

    @cached_property
    def T_diag(self) -> tuple[Fraction, ...]:
        p = self.ext.p
        return tuple(u / p if i < self.k else u for i, u in enumerate(self.T_units))

    @cached_property
    def T(self) -> MatrixE:
        return MatrixE.diag(self.ext, [self.ext.elem(t) for t in self.T_diag])

    @cached_property
    def T_inv(self) -> MatrixE:
        return MatrixE.diag(self.ext, [self.ext.elem(1 / t) for t in self.T_diag])

    @cached_property
    def w_m(self) -> MatrixE:
        return MatrixE.antidiag_identity(self.ext, self.m)

    @cached_property
    def I(self) -> MatrixE:
        return MatrixE.identity(self.ext, self.m)

    def T_valuation(self, i: int) -> int:
        """v_E(T_ii)."""
        return self.ext.elem(self.T_diag[i]).valuation

    @cached_property
    def measure_constant(self) -> Fraction:
        """Density of dmu(y) against the product of coordinate measures of y.

        dmu(y) = dx with x = y T^-1 w_m: the entry x_(i, m+1-j) is y_ij / T_jj,
        so each free E-coordinate (i < j) picks up |T_jj|_E^-1 and each
        diagonal F w-coordinate picks up |T_ii|_F^-1.
        """
        ctx = self.ext
        c = Fraction(1)
        for i in range(self.m):
            for j in range(i + 1, self.m):
                c /= ctx.elem(self.T_diag[j]).abs()
            c /= ctx.F(self.T_diag[i]).abs()
        return c

    def describe(self) -> dict:
        return {
            "p": self.p,
            "a": str(self.ext.a),
            "ramification": self.ext.ramification,
            "m": self.m,
            "k": self.k,
            "T": [str(t) for t in self.T_diag],
        }


def is_group_element(ctx: FormContext, g: MatrixE) -> bool:
    """g* T g = T exactly."""
    return g.star() @ ctx.T @ g == ctx.T


def group_report(ctx: FormContext, g: MatrixE) -> dict:
    d = g.det()
    return {"member": is_group_element(ctx, g), "det_norm_one": d * d.conj() == 1}


def is_lie_element(ctx: FormContext, x: MatrixE) -> bool:
    """x* T + T x = 0 exactly."""
    return (x.star() @ ctx.T + ctx.T @ x).is_zero()


@dataclass(frozen=True)
class Coordinate:
    """One F-coordinate of the free parametrization of the Lie algebra.

    kind is "upper" (component 0 or 1 of x_ij, i < j) or "diag" (the w-part of x_ii).
    """

    kind: str
    i: int
    j: int
    component: int


def lie_coordinates(ctx: FormContext) -> list[Coordinate]:
    out = []
    for i in range(ctx.m):
        out.append(Coordinate("diag", i, i, 1))
        for j in range(i + 1, ctx.m):
            out.append(Coordinate("upper", i, j, 0))
            out.append(Coordinate("upper", i, j, 1))
    return out


def coordinate_level(ctx: FormContext, c: Coordinate, n: int) -> int:
    """p-adic level of coordinate c on the lattice g(P^n) = g intersected with Mat(P^n)."""
    ext = ctx.ext
    if c.kind == "diag":
        return ext.coord_levels(n)[1]
    delta = ctx.T_valuation(c.i) - ctx.T_valuation(c.j)
    level = n + max(0, -delta)
    return ext.coord_levels(level)[c.component]


def lie_from_coords(ctx: FormContext, values: dict) -> MatrixE:
    """Assemble the Lie algebra element with given coordinate values (keyed by Coordinate)."""
    ext = ctx.ext
    m = ctx.m
    rows = [[ext.zero] * m for _ in range(m)]
    upper: dict = {}
    for c, v in values.items():
        if c.kind == "diag":
            rows[c.i][c.i] = ExtElement(ext, 0, v)
        else:
            c0, c1 = upper.get((c.i, c.j), (0, 0))
            upper[(c.i, c.j)] = (v, c1) if c.component == 0 else (c0, v)
    Td = ctx.T_diag
    for (i, j), (c0, c1) in upper.items():
        x = ExtElement(ext, c0, c1)
        rows[i][j] = x
        rows[j][i] = -(x.conj() * (Td[i] / Td[j]))
    return MatrixE(ext, rows)


def coords_of(ctx: FormContext, x: MatrixE) -> dict:
    out = {}
    for c in lie_coordinates(ctx):
        e = x[c.i, c.j]
        out[c] = e.c1 if c.component == 1 else e.c0
    return out


class LatticeQuotient:
    """Coset representatives of g(P^n) / g(P^N), each carrying the measure of one coset."""

    def __init__(self, ctx: FormContext, n: int, N: int, budget: int | None = None):
        if N < n:
            raise ValueError(f"need N >= n, got n={n}, N={N}")
        self.ctx = ctx
        self.n = n
        self.N = N
        self.coords = lie_coordinates(ctx)
        self.lo = [coordinate_level(ctx, c, n) for c in self.coords]
        self.hi = [coordinate_level(ctx, c, N) for c in self.coords]
        p = ctx.p
        self.size = math.prod(p ** (h - l) for l, h in zip(self.lo, self.hi))
        check_budget(self.size, budget, f"lattice quotient g(P^{n})/g(P^{N})")
        self.weight = ctx.measure_constant * math.prod(Fraction(1, p**h) for h in self.hi)

    @property
    def total_measure(self) -> Fraction:
        """mu(g(P^n))."""
        return self.weight * self.size

    def __len__(self):
        return self.size

    def coefficient_tuples(self) -> Iterator[tuple[int, ...]]:
        p = self.ctx.p
        return itertools.product(*[range(p ** (h - l)) for l, h in zip(self.lo, self.hi)])

    def basis(self) -> list[MatrixE]:
        """The lattice generators e_s: coordinate s set to p^lo_s."""
        p = Fraction(self.ctx.p)
        return [lie_from_coords(self.ctx, {c: p**l}) for c, l in zip(self.coords, self.lo)]

    def element(self, t: Sequence[int]) -> MatrixE:
        p = Fraction(self.ctx.p)
        return lie_from_coords(self.ctx, {c: ti * p**l for c, ti, l in zip(self.coords, t, self.lo)})

    def __iter__(self) -> Iterator[MatrixE]:
        for t in self.coefficient_tuples():
            yield self.element(t)


def enumerate_lie_quotient(ctx: FormContext, n: int, N: int, budget: int | None = None):
    """Stream of (representative, weight) over g(P^n)/g(P^N)."""
    q = LatticeQuotient(ctx, n, N, budget)
    for x in q:
        yield x, q.weight


# The doubled group


def doubled_form(ctx: FormContext) -> MatrixE:
    """Gram matrix w_2m of the doubled space in the standard basis."""
    return MatrixE.antidiag_identity(ctx.ext, 2 * ctx.m)


def embed_doubled(ctx: FormContext, g: MatrixE, check: bool = True) -> MatrixE:
    """i(g, 1) in the standard basis of V x V."""
    if check and not is_group_element(ctx, g):
        raise ValueError("embed_doubled needs an element of U_m(T)")
    I, T, Ti, w = ctx.I, ctx.T, ctx.T_inv, ctx.w_m
    half = Fraction(1, 2)
    A = (g + I).scale(half)
    B = ((g - I) @ Ti @ w).scale(Fraction(1, 4))
    C = w @ T @ (g - I)
    D = (w @ T @ (g + I) @ Ti @ w).scale(half)
    return MatrixE.blocks(A, B, C, D)


def doubled_w(ctx: FormContext) -> MatrixE:
    """w = i(1, -1)."""
    Z = MatrixE.zeros(ctx.ext, ctx.m)
    return MatrixE.blocks(Z, (ctx.T_inv @ ctx.w_m).scale(Fraction(1, 2)), (ctx.w_m @ ctx.T).scale(2), Z)


def preserves_doubled_form(ctx: FormContext, h: MatrixE) -> bool:
    J = doubled_form(ctx)
    return h.star() @ J @ h == J


# The open orbit


def orbit_admissible(ctx: FormContext, x: MatrixE) -> bool:
    """(w_m x)* = -(w_m x)."""
    wx = ctx.w_m @ x
    return wx.star() == -wx


@dataclass
class OrbitSolution:
    h: MatrixE
    E: MatrixE
    Y: MatrixE
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def solve_orbit(ctx: FormContext, x: MatrixE) -> OrbitSolution:
    """Solve [[0, T^-1 w/2], [2 w T, 2 w T x]] = [[E, Y], [0, E^dagger]] i(h, 1).

    h = (2 x w T + I)(2 x w T - I)^-1, E = -(2 x w T + I)^-1, and Y is read off
    the top-left block.  All four blocks of the product are compared with the
    left-hand side exactly.
    """
    if not orbit_admissible(ctx, x):
        raise ValueError("x does not satisfy (w_m x)* = -(w_m x)")
    I, T, Ti, w = ctx.I, ctx.T, ctx.T_inv, ctx.w_m
    z = (x @ w @ T).scale(2)
    if (I - z).det().is_zero():
        raise ValueError("det(I - 2 x w T) = 0: the orbit system has no solution")
    h = (z + I) @ (z - I).inv()
    E = -(z + I).inv()
    E_dag = w @ E.star().inv() @ w
    Y = -(E @ (h + I) @ (h - I).inv() @ Ti @ w).scale(Fraction(1, 2))
    Z = MatrixE.zeros(ctx.ext, ctx.m)
    P = MatrixE.blocks(E, Y, Z, E_dag)
    lhs = MatrixE.blocks(Z, (Ti @ w).scale(Fraction(1, 2)), (w @ T).scale(2), (w @ T @ x).scale(2))
    rhs = P @ embed_doubled(ctx, h, check=False)
    dh = h.det()
    sol = OrbitSolution(h, E, Y)
    sol.checks = {
        "block_identity": lhs == rhs,
        "h_minus_cayley": h == -cayley(z),
        "det_norm_one": dh * dh.conj() == 1,
        "h_in_group": is_group_element(ctx, h),
        "lie_equivalence": is_lie_element(ctx, z),
    }
    return sol


# Separation of I from the Lie algebra


@dataclass
class SeparationReport:
    n: int
    searched: int
    witness: MatrixE | None

    @property
    def ok(self) -> bool:
        return self.witness is None


def separation_check(ctx: FormContext, n: int, budget: int | None = None) -> SeparationReport:
    """Search g(O)/g(P^(n+1)) for X with X - I in Mat(P^n)."""
    if n <= ctx.ext.elem(2).valuation:
        raise ValueError("separation needs n > v_E(2)")
    quot = LatticeQuotient(ctx, 0, n + 1, budget)
    I = ctx.I
    for X in quot:
        if (X - I).in_level(n):
            return SeparationReport(n, quot.size, X)
    return SeparationReport(n, quot.size, None)


def separation_control(ctx: FormContext, n: int, budget: int | None = None) -> SeparationReport:
    """Same search over all of gl_m(O)/gl_m(P^n); must find I itself."""
    from .characters import ideal_quotient

    ext = ctx.ext
    reps = list(ideal_quotient(ext, 0, n))
    size = len(reps) ** (ctx.m * ctx.m)
    check_budget(size, budget, "gl control search")
    I = ctx.I
    for entries in itertools.product(reps, repeat=ctx.m * ctx.m):
        X = MatrixE(ext, [entries[r * ctx.m:(r + 1) * ctx.m] for r in range(ctx.m)])
        if (X - I).in_level(n):
            return SeparationReport(n, size, X)
    return SeparationReport(n, size, None)


# Cayley transform on lattice quotients


def cayley_quotient_check(ctx: FormContext, n: int, N: int, budget: int | None = None) -> dict:
    """C maps g(P^n)/g(P^N) injectively into U_m(T) mod P^N.

    For T = I the image is also compared with a brute-force enumeration of
    {g = I mod P^n : g* g = I mod P^N}, giving a group-side count that does
    not use the Cayley transform.
    """
    quot = LatticeQuotient(ctx, n, N, budget)
    images = {}
    in_group = True
    for x in quot:
        g = cayley(x)
        if not is_group_element(ctx, g):
            in_group = False
        images.setdefault(g.residue_key(N), x)
    out = {
        "size": quot.size,
        "image_size": len(images),
        "injective": len(images) == quot.size,
        "in_group": in_group,
        "lie_measure": quot.total_measure,
        "image_measure": len(images) * quot.weight,
    }
    if ctx.k == 0 and all(t == 1 for t in ctx.T_units):
        oracle = unitary_residues(ctx, n, N, budget=None if budget is None else budget * 100)
        out["group_count"] = len(oracle)
        out["image_equals_group"] = oracle == set(images)
    return out


def unitary_residues(ctx: FormContext, n: int, N: int, budget: int | None = None) -> set:
    """Residue keys of g = I + z, z in Mat(P^n)/Mat(P^N), with g* g = I mod P^N (T = I only)."""
    from .characters import ideal_quotient

    ext = ctx.ext
    m = ctx.m
    reps = list(ideal_quotient(ext, n, N))
    check_budget(len(reps) ** (m * m), budget, "unitary residue enumeration")
    I = ctx.I
    out = set()
    for entries in itertools.product(reps, repeat=m * m):
        g = I + MatrixE(ext, [entries[r * m:(r + 1) * m] for r in range(m)])
        if (g.star() @ g - I).in_level(N):
            out.add(g.residue_key(N))
    return out


def measure_identity_m1(ctx: FormContext, N: int, f) -> dict:
    """The Cayley change of variables for m = 1 as an identity of finite sums.

    f is a function on residue keys of (O_E/P^N)^x, so it is locally constant
    on 1 + P^N and supported on 1 + P.  Left side: sum over y in g(P)/g(P^N)
    of f(C(y)) |det(I - y)|^-1 times the coset measure.  Right side: sum of
    f(h) over norm-one residues h = 1 mod P, found by solving c0^2 - a c1^2 = 1
    mod p^N directly, each weighted by the Haar measure of 1 + P^N in U_1,
    normalized to agree with mu(g(P^N)).
    """
    from .characters import ideal_quotient

    if ctx.m != 1:
        raise ValueError("measure_identity_m1 is for m = 1")
    ext = ctx.ext
    quot = LatticeQuotient(ctx, 1, N)
    lhs = Fraction(0)
    for y in quot:
        d = (ctx.I - y).det()
        lhs += Fraction(f(cayley(y)[0, 0].residue_key(N))) / d.abs() * quot.weight
    rhs = Fraction(0)
    count = 0
    for z in ideal_quotient(ext, 1, N):
        h = ext.one + z
        if (h * h.conj() - 1).valuation >= N:
            count += 1
            rhs += Fraction(f(h.residue_key(N))) * quot.weight
    return {"lhs": lhs, "rhs": rhs, "equal": lhs == rhs, "group_count": count, "lie_count": quot.size}


# Sampling


def random_lie_element(ctx: FormContext, rng, n: int = 1, depth: int = 3) -> MatrixE:
    """A random element of g(P^n), coordinates drawn modulo g(P^(n+depth))."""
    p = Fraction(ctx.p)
    vals = {}
    for c in lie_coordinates(ctx):
        lo = coordinate_level(ctx, c, n)
        hi = coordinate_level(ctx, c, n + depth)
        vals[c] = rng.randrange(ctx.p ** (hi - lo)) * p**lo
    return lie_from_coords(ctx, vals)


def random_group_element(ctx: FormContext, rng, n: int = 1, depth: int = 3) -> MatrixE:
    """C(y) for random y in g(P^n); an exact element of U_m(T)."""
    return cayley(random_lie_element(ctx, rng, n, depth))


def sample_lie_with_norm(ctx: FormContext, rng, L: int, depth: int = 2, tries: int = 1000) -> MatrixE:
    """X in g with ||X|| = q^L exactly (rejection from g(P^-L) at resolution depth)."""
    for _ in range(tries):
        X = random_lie_element(ctx, rng, -L, depth)
        if matrix_norm(X).log_value == L:
            return X
    raise RuntimeError(f"could not sample a Lie element of norm q^{L}")


def sample_matrix_with_norm(ctx: FormContext, rng, L: int, depth: int = 2, tries: int = 1000) -> MatrixE:
    """X in gl_m(E) with ||X|| = q^L exactly."""
    from .matrixalg import random_matrix

    for _ in range(tries):
        X = random_matrix(ctx.ext, ctx.m, rng, -L, depth)
        if matrix_norm(X).log_value == L:
            return X
    raise RuntimeError(f"could not sample a matrix of norm q^{L}")
