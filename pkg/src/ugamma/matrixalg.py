"""Exact matrices over E: star, trace, determinant, max-entry norm, Cayley transform.

Also the det/trace congruence on Mat_m(P^C) and restriction of scalars to
2m x 2m matrices over F.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .localfield import INF, ExtElement, ExtensionContext, parse_ext

# det(I - v) = 1 + TRACE_SIGN * tr(v) mod P^(2C) for v in Mat_m(P^C);
# fixed by symbolic expansion in the test suite
TRACE_SIGN = -1


class SingularMatrixError(ZeroDivisionError):
    pass


class CayleyDomainError(ValueError):
    """A Cayley transform was applied outside its domain; names the vanishing determinant."""


class MatrixE:
    """An immutable rows x cols matrix with ExtElement entries."""

    __slots__ = ("ctx", "rows", "cols", "entries", "_hash")

    def __init__(self, ctx: ExtensionContext, entries: Sequence[Sequence]):
        self.ctx = ctx
        rows = []
        for row in entries:
            rows.append(tuple(x if isinstance(x, ExtElement) else ExtElement(ctx, x) for x in row))
        self.entries = tuple(rows)
        self.rows = len(rows)
        self.cols = len(rows[0]) if rows else 0
        if any(len(r) != self.cols for r in rows):
            raise ValueError("ragged matrix")
        self._hash = None

    @classmethod
    def identity(cls, ctx: ExtensionContext, m: int) -> "MatrixE":
        return cls(ctx, [[ctx.one if i == j else ctx.zero for j in range(m)] for i in range(m)])

    @classmethod
    def zeros(cls, ctx: ExtensionContext, r: int, c: int | None = None) -> "MatrixE":
        return cls(ctx, [[ctx.zero] * (c if c is not None else r) for _ in range(r)])

    @classmethod
    def diag(cls, ctx: ExtensionContext, d: Sequence) -> "MatrixE":
        m = len(d)
        return cls(ctx, [[d[i] if i == j else ctx.zero for j in range(m)] for i in range(m)])

    @classmethod
    def antidiag_identity(cls, ctx: ExtensionContext, m: int) -> "MatrixE":
        """w_m: ones on the antidiagonal."""
        return cls(ctx, [[ctx.one if i + j == m - 1 else ctx.zero for j in range(m)] for i in range(m)])

    @classmethod
    def unit_matrix(cls, ctx: ExtensionContext, m: int, i: int, j: int, value=None) -> "MatrixE":
        value = ctx.one if value is None else value
        return cls(ctx, [[value if (r, c) == (i, j) else ctx.zero for c in range(m)] for r in range(m)])

    @classmethod
    def blocks(cls, A: "MatrixE", B: "MatrixE", C: "MatrixE", D: "MatrixE") -> "MatrixE":
        top = [ra + rb for ra, rb in zip(A.entries, B.entries)]
        bot = [rc + rd for rc, rd in zip(C.entries, D.entries)]
        return cls(A.ctx, top + bot)

    @classmethod
    def parse(cls, ctx: ExtensionContext, rows: Sequence[Sequence[str]]) -> "MatrixE":
        return cls(ctx, [[parse_ext(ctx, s) if isinstance(s, str) else s for s in row] for row in rows])

    def block(self, i: int, j: int, size: int) -> "MatrixE":
        return MatrixE(
            self.ctx,
            [row[j * size:(j + 1) * size] for row in self.entries[i * size:(i + 1) * size]],
        )

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def is_square(self) -> bool:
        return self.rows == self.cols

    def _coerce(self, other):
        if isinstance(other, MatrixE):
            return other
        if isinstance(other, (int, Fraction, ExtElement)):
            if not self.is_square():
                raise ValueError("scalar coercion needs a square matrix")
            x = other if isinstance(other, ExtElement) else ExtElement(self.ctx, other)
            return MatrixE.diag(self.ctx, [x] * self.rows)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.shape != self.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {o.shape}")
        return MatrixE(self.ctx, [[x + y for x, y in zip(r, s)] for r, s in zip(self.entries, o.entries)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.shape != self.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {o.shape}")
        return MatrixE(self.ctx, [[x - y for x, y in zip(r, s)] for r, s in zip(self.entries, o.entries)])

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return MatrixE(self.ctx, [[-x for x in r] for r in self.entries])

    def scale(self, c) -> "MatrixE":
        return MatrixE(self.ctx, [[c * x for x in r] for r in self.entries])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, ExtElement)):
            return self.scale(other)
        if not isinstance(other, MatrixE):
            return NotImplemented
        return self @ other

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, ExtElement)):
            return self.scale(other)
        return NotImplemented

    def _scaled_ints(self) -> tuple[int, list]:
        # integer coordinates over one common denominator
        D = math.lcm(*(c.denominator for r in self.entries for x in r for c in (x.c0, x.c1)))
        return D, [[(x.c0.numerator * (D // x.c0.denominator), x.c1.numerator * (D // x.c1.denominator))
                     for x in r] for r in self.entries]

    def __matmul__(self, other: "MatrixE") -> "MatrixE":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        a = self.ctx.a
        an, ad = a.numerator, a.denominator
        D1, A = self._scaled_ints()
        D2, B = other._scaled_ints()
        cols = list(zip(*B))
        den = D1 * D2 * ad
        out = []
        for r in A:
            row = []
            for c in cols:
                s0 = s1 = s11 = 0
                for (x0, x1), (y0, y1) in zip(r, c):
                    s0 += x0 * y0
                    s11 += x1 * y1
                    s1 += x0 * y1 + x1 * y0
                row.append(ExtElement(self.ctx, Fraction(s0 * ad + an * s11, den), Fraction(s1 * ad, den)))
            out.append(row)
        return MatrixE(self.ctx, out)

    def transpose(self) -> "MatrixE":
        return MatrixE(self.ctx, list(zip(*self.entries)))

    def conj(self) -> "MatrixE":
        return MatrixE(self.ctx, [[x.conj() for x in r] for r in self.entries])

    def star(self) -> "MatrixE":
        """Conjugate transpose."""
        return MatrixE(self.ctx, [[x.conj() for x in r] for r in zip(*self.entries)])

    def trace(self) -> ExtElement:
        acc = self.ctx.zero
        for i in range(min(self.rows, self.cols)):
            acc = acc + self.entries[i][i]
        return acc

    def det(self) -> ExtElement:
        if not self.is_square():
            raise ValueError("det of a non-square matrix")
        if self.rows <= 4:
            if self.ctx.a.denominator == 1:
                D, A = self._scaled_ints()
                d0, d1 = _det_int(A, int(self.ctx.a))
                Dm = D**self.rows
                return ExtElement(self.ctx, Fraction(d0, Dm), Fraction(d1, Dm))
            return _det_cofactor(self.entries)
        return _det_pivot(self)

    def minor(self, i: int, j: int) -> "MatrixE":
        return MatrixE(
            self.ctx,
            [r[:j] + r[j + 1:] for k, r in enumerate(self.entries) if k != i],
        )

    def adjugate(self) -> "MatrixE":
        m = self.rows
        if m == 1:
            return MatrixE(self.ctx, [[self.ctx.one]])
        if self.ctx.a.denominator != 1:
            cof = [[(self.minor(i, j).det() * (-1 if (i + j) % 2 else 1)) for j in range(m)] for i in range(m)]
            return MatrixE(self.ctx, cof).transpose()
        a = int(self.ctx.a)
        D, A = self._scaled_ints()
        Dm = D ** (m - 1)
        adj = []
        for j in range(m):
            row = []
            for i in range(m):
                sub = [r[:j] + r[j + 1:] for k, r in enumerate(A) if k != i]
                d0, d1 = _det_int(sub, a)
                if (i + j) % 2:
                    d0, d1 = -d0, -d1
                row.append(ExtElement(self.ctx, Fraction(d0, Dm), Fraction(d1, Dm)))
            adj.append(row)
        return MatrixE(self.ctx, adj)

    def inv(self) -> "MatrixE":
        d = self.det()
        if d.is_zero():
            raise SingularMatrixError("matrix is singular")
        if self.rows > 4:
            return _inv_gauss(self)
        return self.adjugate().scale(d.inv())

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.entries for x in r)

    def min_valuation(self) -> int | float:
        return min((x.valuation for r in self.entries for x in r), default=INF)

    def norm(self) -> "MatrixNormValue":
        return matrix_norm(self)

    def reduce(self, N: int) -> "MatrixE":
        return MatrixE(self.ctx, [[x.reduce(N) for x in r] for r in self.entries])

    def residue_key(self, N: int) -> tuple:
        return tuple(x.residue_key(N) for r in self.entries for x in r)

    def in_level(self, n: int) -> bool:
        """All entries in P^n."""
        return self.min_valuation() >= n

    def is_integral(self) -> bool:
        return self.in_level(0)

    def __eq__(self, other):
        if not isinstance(other, MatrixE):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.entries)
        return self._hash

    def to_strings(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.entries]

    def __repr__(self):
        return f"MatrixE({self.to_strings()})"


def _det_int(rows, a: int) -> tuple[int, int]:
    """Cofactor determinant of integer pairs (c0, c1) standing for c0 + c1*w with w^2 = a."""
    m = len(rows)
    if m == 1:
        return rows[0][0]
    if m == 2:
        (x0, x1), (y0, y1) = rows[0]
        (u0, u1), (v0, v1) = rows[1]
        return (x0 * v0 + a * x1 * v1 - y0 * u0 - a * y1 * u1,
                x0 * v1 + x1 * v0 - y0 * u1 - y1 * u0)
    r0 = r1 = 0
    for j, (x0, x1) in enumerate(rows[0]):
        if not (x0 or x1):
            continue
        s0, s1 = _det_int([r[:j] + r[j + 1:] for r in rows[1:]], a)
        t0, t1 = x0 * s0 + a * x1 * s1, x0 * s1 + x1 * s0
        if j % 2:
            r0, r1 = r0 - t0, r1 - t1
        else:
            r0, r1 = r0 + t0, r1 + t1
    return r0, r1


def _det_cofactor(rows) -> ExtElement:
    m = len(rows)
    if m == 1:
        return rows[0][0]
    if m == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = None
    for j, x in enumerate(rows[0]):
        if x.is_zero():
            continue
        sub = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = x * _det_cofactor(sub)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc if acc is not None else rows[0][0].ctx.zero


def _det_pivot(x: MatrixE) -> ExtElement:
    """Gaussian elimination choosing the pivot of least valuation in each column."""
    a = [list(r) for r in x.entries]
    m = x.rows
    det = x.ctx.one
    for c in range(m):
        cand = [(a[r][c].valuation, r) for r in range(c, m) if not a[r][c].is_zero()]
        if not cand:
            return x.ctx.zero
        _, r = min(cand)
        if r != c:
            a[c], a[r] = a[r], a[c]
            det = -det
        piv = a[c][c]
        det = det * piv
        pinv = piv.inv()
        for rr in range(c + 1, m):
            if a[rr][c].is_zero():
                continue
            f = a[rr][c] * pinv
            a[rr] = [y - f * z for y, z in zip(a[rr], a[c])]
    return det


def _inv_gauss(x: MatrixE) -> MatrixE:
    m = x.rows
    ctx = x.ctx
    a = [list(r) + [ctx.one if i == j else ctx.zero for j in range(m)] for i, r in enumerate(x.entries)]
    for c in range(m):
        cand = [(a[r][c].valuation, r) for r in range(c, m) if not a[r][c].is_zero()]
        if not cand:
            raise SingularMatrixError("matrix is singular")
        _, r = min(cand)
        a[c], a[r] = a[r], a[c]
        pinv = a[c][c].inv()
        a[c] = [y * pinv for y in a[c]]
        for rr in range(m):
            if rr != c and not a[rr][c].is_zero():
                f = a[rr][c]
                a[rr] = [y - f * z for y, z in zip(a[rr], a[c])]
    return MatrixE(ctx, [r[m:] for r in a])


def mat_arith(op: str, x: MatrixE, y: MatrixE | None = None):
    if op == "add":
        return x + y
    if op == "mul":
        return x @ y
    if op == "neg":
        return -x
    if op == "star":
        return x.star()
    if op == "trace":
        return x.trace()
    if op == "det":
        return x.det()
    if op == "inv":
        return x.inv()
    raise ValueError(f"unknown operation {op!r}")


@dataclass(frozen=True, order=False)
class MatrixNormValue:
    """The norm q_E ** log_value; log_value = -inf for the zero matrix."""

    log_value: float
    q: int

    def value(self) -> Fraction:
        if self.log_value == -INF:
            return Fraction(0)
        return Fraction(self.q) ** int(self.log_value)

    def __lt__(self, other):
        return self.log_value < other.log_value

    def __le__(self, other):
        return self.log_value <= other.log_value

    def __gt__(self, other):
        return self.log_value > other.log_value

    def __ge__(self, other):
        return self.log_value >= other.log_value

    def __str__(self):
        return "0" if self.log_value == -INF else f"q^{int(self.log_value)}"


def matrix_norm(x: MatrixE) -> MatrixNormValue:
    v = x.min_valuation()
    return MatrixNormValue(-INF if v == INF else -v, x.ctx.q_E)


def cayley(y: MatrixE) -> MatrixE:
    """(I + y)(I - y)^-1 on the set where det(I - y) det(I + y) != 0."""
    I = MatrixE.identity(y.ctx, y.rows)
    minus = I - y
    plus = I + y
    if minus.det().is_zero():
        raise CayleyDomainError("det(I - y) = 0")
    if plus.det().is_zero():
        raise CayleyDomainError("det(I + y) = 0")
    return plus @ minus.inv()


def cayley_inv(t: MatrixE) -> MatrixE:
    """(t - I)(t + I)^-1 on the set where det(t + I) != 0 (and det(t) != 0 for the round trip)."""
    I = MatrixE.identity(t.ctx, t.rows)
    plus = t + I
    if plus.det().is_zero():
        raise CayleyDomainError("det(t + I) = 0")
    return (t - I) @ plus.inv()


@dataclass
class IdentityReport:
    results: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    literal: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.results.values())

    def record(self, name: str, lhs: MatrixE, rhs: MatrixE) -> None:
        good = lhs == rhs
        self.results[name] = good
        if not good:
            for i, j in itertools.product(range(lhs.rows), range(lhs.cols)):
                if lhs[i, j] != rhs[i, j]:
                    self.witnesses[name] = {"entry": [i, j], "lhs": str(lhs[i, j]), "rhs": str(rhs[i, j])}
                    break


def verify_ct_identities(v: MatrixE, g: MatrixE) -> IdentityReport:
    """The Cayley identities, checked as exact equalities of matrices.

    With c = C^-1(g):
    CT1   I - C(v) g    = (I - v)^-1 (-c - v) (I + g)
    CT2   I + C(v) g    = (I - v)^-1 (I + v c) (I + g)
    CT3   I + C(v) g invertible iff I + v c is, and then
          C^-1(C(v) g)  = (I - v)^-1 (c + v) (I + v c)^-1 (I - v)
    CT1'  I - C(v)^-1 g = (I + v)^-1 (-c + v) (I + g)
    CT2'  I + C(v)^-1 g = (I + v)^-1 (I - v c) (I + g)
    CT3'  I + C(v)^-1 g invertible iff I - v c is, and then
          C^-1(C(v)^-1 g) = (I + v)^-1 (c - v) (I - v c)^-1 (I + v)

    The ratio of CT1' to CT2' gives the factor c - v in CT3'; the printed form
    with v - c is off by an overall sign.  Its truth value is kept in
    ``rep.literal["CT3'"]`` for the record.
    """
    ctx = v.ctx
    m = v.rows
    I = MatrixE.identity(ctx, m)
    for name, mat in (("I - v", I - v), ("I + v", I + v), ("I + g", I + g)):
        if mat.det().is_zero():
            raise CayleyDomainError(f"det({name}) = 0")
    cv = cayley(v)
    cv_inv = cv.inv()
    c = cayley_inv(g)
    im_v_inv = (I - v).inv()
    ip_v_inv = (I + v).inv()
    rep = IdentityReport()
    rep.record("CT1", I - cv @ g, im_v_inv @ (-c - v) @ (I + g))
    rep.record("CT2", I + cv @ g, im_v_inv @ (I + v @ c) @ (I + g))
    rep.record("CT1'", I - cv_inv @ g, ip_v_inv @ (v - c) @ (I + g))
    rep.record("CT2'", I + cv_inv @ g, ip_v_inv @ (I - v @ c) @ (I + g))
    for name, lhs, mid, rhs in (
        ("CT3", I + cv @ g, I + v @ c, None),
        ("CT3'", I + cv_inv @ g, I - v @ c, None),
    ):
        lhs_inv = not lhs.det().is_zero()
        mid_inv = not mid.det().is_zero()
        if lhs_inv != mid_inv:
            rep.results[name] = False
            rep.witnesses[name] = {"invertibility": [lhs_inv, mid_inv]}
            continue
        if not lhs_inv:
            rep.results[name] = True
            continue
        if name == "CT3":
            rep.record(name, cayley_inv(cv @ g), im_v_inv @ (c + v) @ mid.inv() @ (I - v))
        else:
            lhs3 = cayley_inv(cv_inv @ g)
            rep.record(name, lhs3, ip_v_inv @ (c - v) @ mid.inv() @ (I + v))
            rep.literal[name] = lhs3 == ip_v_inv @ (v - c) @ mid.inv() @ (I + v)
    return rep


@dataclass
class CongruenceReport:
    ok: bool
    det: ExtElement
    trace: ExtElement
    in_principal: bool
    congruence: bool
    unit_abs: bool
    sign: int

    def witness(self) -> dict:
        return {"det": str(self.det), "trace": str(self.trace), "sign": self.sign}


def det_trace_congruence(v: MatrixE, C: int, sign: int = TRACE_SIGN) -> CongruenceReport:
    """Check det(I - v) in 1 + P^C and det(I - v) = 1 + sign*tr(v) mod P^2C for v in Mat(P^C)."""
    if C < 0 or not v.in_level(C):
        raise ValueError(f"v is not in Mat(P^{C})")
    I = MatrixE.identity(v.ctx, v.rows)
    d = (I - v).det()
    t = v.trace()
    in_principal = (d - 1).valuation >= C
    congruence = (d - 1 - t * sign).valuation >= 2 * C
    unit_abs = d.abs() == 1 if C > 0 else True
    return CongruenceReport(in_principal and congruence and unit_abs, d, t, in_principal, congruence, unit_abs, sign)


def restrict_scalars(X: MatrixE) -> np.ndarray:
    """2m x 2m matrix over F: f1 + f2 w becomes [[f1, a f2], [f2, f1]]."""
    a = X.ctx.a
    out = np.empty((2 * X.rows, 2 * X.cols), dtype=object)
    for i, j in itertools.product(range(X.rows), range(X.cols)):
        x = X[i, j]
        out[2 * i, 2 * j] = x.c0
        out[2 * i, 2 * j + 1] = a * x.c1
        out[2 * i + 1, 2 * j] = x.c1
        out[2 * i + 1, 2 * j + 1] = x.c0
    return out


def unrestrict_scalars(ctx: ExtensionContext, Y: np.ndarray) -> MatrixE:
    """Inverse of :func:`restrict_scalars` on E-linear block matrices."""
    r, c = Y.shape
    return MatrixE(ctx, [[ExtElement(ctx, Y[2 * i, 2 * j], Y[2 * i + 1, 2 * j]) for j in range(c // 2)] for i in range(r // 2)])


def block_conj(Y: np.ndarray) -> np.ndarray:
    """Apply the involution blockwise: [[f1, a f2], [f2, f1]] -> [[f1, -a f2], [-f2, f1]]."""
    out = Y.copy()
    r, c = Y.shape
    for i in range(r):
        for j in range(c):
            if (i % 2) != (j % 2):
                out[i, j] = -Y[i, j]
    return out


def block_transpose(Y: np.ndarray) -> np.ndarray:
    """Transpose at the block level, keeping each 2x2 block intact."""
    r, c = Y.shape
    out = np.empty((c, r), dtype=object)
    for i in range(r // 2):
        for j in range(c // 2):
            out[2 * j:2 * j + 2, 2 * i:2 * i + 2] = Y[2 * i:2 * i + 2, 2 * j:2 * j + 2]
    return out


def check_blocks(Y: np.ndarray, a) -> dict:
    """E-linearity (every 2x2 block is [[f1, a f2], [f2, f1]]) and E-unitarity conj(transp(Y)) = -Y."""
    a = Fraction(a)
    r, c = Y.shape
    linear = r % 2 == 0 and c % 2 == 0
    if linear:
        for i in range(0, r, 2):
            for j in range(0, c, 2):
                f1, af2, f2, f1b = Y[i, j], Y[i, j + 1], Y[i + 1, j], Y[i + 1, j + 1]
                if f1 != f1b or af2 != a * f2:
                    linear = False
    unitary = False
    if linear:
        unitary = bool(np.all(block_conj(block_transpose(Y)) == -Y))
    return {"E_linear": linear, "E_unitary": unitary}


def random_matrix(ctx: ExtensionContext, m: int, rng, level: int = 0, depth: int = 3, cols: int | None = None) -> MatrixE:
    """Entries drawn from P^level modulo P^(level+depth)."""
    return MatrixE(ctx, [[random_element(ctx, rng, level, depth) for _ in range(cols or m)] for _ in range(m)])


def random_element(ctx: ExtensionContext, rng, level: int = 0, depth: int = 3) -> ExtElement:
    e0, e1 = ctx.coord_levels(level)
    f0, f1 = ctx.coord_levels(level + depth)
    p = Fraction(ctx.p)
    return ExtElement(ctx, rng.randrange(ctx.p ** (f0 - e0)) * p**e0, rng.randrange(ctx.p ** (f1 - e1)) * p**e1)


def random_unimodular(ctx: ExtensionContext, m: int, rng, depth: int = 2) -> MatrixE:
    """A random element of GL_m(O_E)."""
    while True:
        k = random_matrix(ctx, m, rng, 0, depth)
        if k.det().valuation == 0:
            return k
