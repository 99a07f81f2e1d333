"""The stable gamma factor as an exact finite character sum, and the inner-sum lemmas."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .characters import (
    AdditiveCharacter,
    CharacterValue,
    ExactSum,
    MultiplicativeCharacter,
    WildParameters,
    wild_parameter,
)
from .localfield import INF, ExtElement, vp_int
from .matrixalg import TRACE_SIGN, MatrixE, cayley, cayley_inv, matrix_norm
from .unitary import FormContext, LatticeQuotient, is_lie_element


class HypothesisViolation(ValueError):
    """Inputs do not satisfy the hypotheses of the lemma being tested."""


class CosetConstancyError(AssertionError):
    pass


def plus(L: int) -> int:
    return max(L, 0)


def minus(L: int) -> int:
    return max(-L, 0)


def stability_threshold(q: int, abs_eight: Fraction) -> int:
    """Smallest positive even N with q^N > |8|^-1 q^4."""
    N = 2
    while Fraction(q) ** N <= Fraction(q) ** 4 / abs_eight:
        N += 2
    return N


@dataclass
class GammaInstance:
    ctx: FormContext
    chi: MultiplicativeCharacter
    psi: AdditiveCharacter = None
    budget: int | None = None

    def __post_init__(self):
        if self.psi is None:
            self.psi = AdditiveCharacter(self.ctx.ext)
        if self.chi.ctx != self.ctx.ext:
            raise ValueError("character and form live over different extensions")

    @property
    def N_chi(self) -> int:
        return self.chi.N_chi

    @property
    def n_chi(self) -> int:
        return (self.N_chi + 1) // 2

    @property
    def q(self) -> int:
        return self.ctx.ext.q_E

    @cached_property
    def N_floor(self) -> int:
        ext = self.ctx.ext
        return stability_threshold(self.q, ext.elem(8).abs())

    @property
    def stability_claimed(self) -> bool:
        return self.N_chi > self.N_floor

    @cached_property
    def wild(self) -> WildParameters:
        return wild_parameter(self.chi, self.psi)

    def describe(self) -> dict:
        return {
            **self.ctx.describe(),
            "N_chi": self.N_chi,
            "n_chi": self.n_chi,
            "N_floor": self.N_floor,
            "stability_claimed": self.stability_claimed,
            "chi": self.chi.description,
        }


@dataclass
class GammaResult:
    prefactor: dict
    sum: ExactSum
    M: int
    size: int
    refined: ExactSum | None = None

    @property
    def refinement_ok(self) -> bool:
        return self.refined is None or self.refined == self.sum

    def to_json(self) -> dict:
        return {
            "prefactor": self.prefactor["string"],
            "sum": self.sum.to_json(),
            "M": self.M,
            "cosets": self.size,
            "refinement_agrees": self.refinement_ok,
        }


def gamma_prefactor(inst: GammaInstance) -> dict:
    """|2|_F^(m^2) chi^-m(-1), kept symbolic: the F-absolute value and a Q/Z exponent."""
    m = inst.ctx.m
    abs2 = inst.ctx.ext.F(2).abs() ** (m * m)
    sign = inst.chi.sign_at_minus_one * (-m)
    return {"abs_two_power": abs2, "chi_minus_one_power": sign, "string": f"{abs2}*e({sign})"}


def _gamma_sum(inst: GammaInstance, M: int, check_constancy: bool) -> tuple[ExactSum, int]:
    ctx = inst.ctx
    quot = LatticeQuotient(ctx, inst.n_chi, M, inst.budget)
    chi_inv = inst.chi.inverse()
    I = ctx.I
    basis = LatticeQuotient(ctx, M, M + 1).basis() if check_constancy else []
    acc = ExactSum(ctx.p)
    for v in quot:
        val = chi_inv(( I - v).det())
        if check_constancy:
            for e in basis:
                if chi_inv((I - v - e).det()) != val:
                    raise CosetConstancyError(f"integrand not constant on v + g(P^{M}) at v = {v}")
        acc.add(val, quot.weight)
    return acc, quot.size


def stable_gamma(inst: GammaInstance, refine: bool = True, check_constancy: bool = True) -> GammaResult:
    """|2|^(m^2) chi^-m(-1) times the integral of chi^-1(det(I - v)) over g(P^n_chi).

    The integral is the weighted sum over g(P^n_chi)/g(P^N_chi); constancy of
    the integrand on cosets is asserted on a lattice basis, and the sum is
    recomputed at resolution N_chi + 1 when refine is set.
    """
    M = inst.N_chi
    total, size = _gamma_sum(inst, M, check_constancy)
    refined = _gamma_sum(inst, M + 1, False)[0] if refine else None
    return GammaResult(gamma_prefactor(inst), total, M, size, refined)


@dataclass
class DualPathReport:
    theorem_sum: ExactSum
    trace_sum: ExactSum
    literal_sign_sum: ExactSum
    control_sum: ExactSum
    total_measure: Fraction
    pointwise: bool
    b: ExtElement

    @property
    def agree(self) -> bool:
        return self.theorem_sum == self.trace_sum

    @property
    def ok(self) -> bool:
        return self.agree and self.pointwise and self.control_sum == ExactSum(self.theorem_sum.p).add(CharacterValue(0), self.total_measure)

    def to_json(self) -> dict:
        return {
            "agree": self.agree,
            "pointwise": self.pointwise,
            "b": str(self.b),
            "theorem_sum": self.theorem_sum.to_json(),
            "trace_sum": self.trace_sum.to_json(),
            "literal_sign_agrees": self.literal_sign_sum == self.theorem_sum,
            "control_total": str(self.control_sum.rational_value()),
            "total_measure": str(self.total_measure),
        }


def dual_path_gamma(inst: GammaInstance, gamma: GammaResult | None = None) -> DualPathReport:
    """The same integral with chi^-1(det(I - v)) replaced by psi_0(TRACE_SIGN * b tr v).

    Also compares pointwise, sums with the opposite sign (which agrees in total
    since the lattice is stable under v -> -v) and the b = 0 control whose
    value is the total measure.
    """
    ctx = inst.ctx
    gamma = gamma or stable_gamma(inst, refine=False)
    b = inst.wild.b
    psi = inst.psi
    chi_inv = inst.chi.inverse()
    quot = LatticeQuotient(ctx, inst.n_chi, inst.N_chi, inst.budget)
    I = ctx.I
    trace_sum = ExactSum(ctx.p)
    literal = ExactSum(ctx.p)
    control = ExactSum(ctx.p)
    pointwise = True
    for v in quot:
        t = v.trace()
        val = psi(b * t * TRACE_SIGN)
        trace_sum.add(val, quot.weight)
        literal.add(psi(b * t), quot.weight)
        control.add(psi(ctx.ext.zero * t), quot.weight)
        if val != chi_inv((I - v).det()):
            pointwise = False
    return DualPathReport(gamma.sum, trace_sum, literal, control, quot.total_measure, pointwise, b)


@dataclass
class VanishingResult:
    sum: ExactSum
    level: int
    M: int
    size: int
    predicted_zero: bool
    hypotheses: dict = field(default_factory=dict)
    refined: ExactSum | None = None

    @property
    def is_zero(self) -> bool:
        return self.sum.is_zero()


def check_vanishing_hypotheses(inst: GammaInstance, a: ExtElement, b: ExtElement, X: MatrixE, L: int) -> dict:
    """The hypotheses of the inner-sum lemma for L != 0 or for L = 0."""
    q = Fraction(inst.q)
    ext = inst.ctx.ext
    abs2 = ext.abs_two
    n, N = inst.n_chi, inst.N_chi
    norm_X = matrix_norm(X)
    h = {"norm_X": norm_X.log_value == L, "abs_a_eq_abs_b": a.abs() == b.abs()}
    if L != 0:
        h["abs_a_large"] = a.abs() > q ** (n + 1) / abs2
    else:
        h["X_in_lie"] = is_lie_element(inst.ctx, X)
        h["abs_a_q_N"] = a.abs() == q**N and b.abs() == q**N
        h["abs_a_plus_b"] = (a + b).abs() <= q**n
    return h


def inner_vanishing_sum(
    inst: GammaInstance,
    a: ExtElement,
    b: ExtElement,
    X: MatrixE,
    L: int,
    check_hypotheses: bool = True,
    refine: bool = False,
    direct: bool = False,
) -> VanishingResult:
    """Sum of psi_0(b tr v + a tr(v X)) over g(P^(L+ + n_chi)), exactly.

    The integrand is psi_0(tr(v Y)) with Y = b I + a X, additive in v.  With
    M >= -min valuation of Y it is constant on cosets of g(P^M), so the sum
    runs over g(P^level)/g(P^M).  Each coset value is read off its coordinates
    against the lattice basis (or, with direct, from the assembled matrix).
    """
    hyp = check_vanishing_hypotheses(inst, a, b, X, L)
    if check_hypotheses and not all(hyp.values()):
        bad = [k for k, v in hyp.items() if not v]
        raise HypothesisViolation(f"hypotheses fail for L={L}: {', '.join(bad)}")
    ctx = inst.ctx
    Y = ctx.I.scale(b) + X.scale(a)
    level = plus(L) + inst.n_chi
    vmin = Y.min_valuation()
    M = max(plus(L) + inst.N_chi, level, -vmin if vmin != INF else level)
    total, size, predicted = _linear_sum(inst, Y, level, M, direct)
    refined = _linear_sum(inst, Y, level, M + 1, direct)[0] if refine else None
    return VanishingResult(total, level, M, size, predicted, hyp, refined)


def _linear_sum(inst: GammaInstance, Y: MatrixE, level: int, M: int, direct: bool):
    """Exact sum of psi_0(tr(v Y)) over g(P^level)/g(P^M).

    A coset sum_s t_s e_s has value sum_s t_s lambda_s with lambda_s the value
    on the basis vector e_s, so the multiset of values over all cosets is the
    convolution of the multisets {t lambda_s : t mod p^(range_s)}.  With
    direct, every coset matrix is assembled and evaluated instead.
    """
    psi = inst.psi
    quot = LatticeQuotient(inst.ctx, level, M, inst.budget)
    acc = ExactSum(inst.ctx.p)
    basis_vals = [psi((e @ Y).trace()).exponent for e in quot.basis()]
    if direct:
        for v in quot:
            acc.add(psi((v @ Y).trace()), quot.weight)
    else:
        # integer numerators over the common denominator p^K
        p = inst.ctx.p
        K = max((vp_int(lam.denominator, p) for lam in basis_vals), default=0)
        D = p**K
        counts = Counter({0: 1})
        for lam, lo, hi in zip(basis_vals, quot.lo, quot.hi):
            r = lam.numerator * (D // lam.denominator)
            step = Counter(t * r % D for t in range(p ** (hi - lo)))
            nxt = Counter()
            for x, cx in counts.items():
                for y, cy in step.items():
                    nxt[(x + y) % D] += cx * cy
            counts = nxt
        acc = ExactSum(p, K, {r: quot.weight * c for r, c in counts.items()})
    predicted_zero = any(lam != 0 for lam in basis_vals)
    return acc, quot.size, predicted_zero


def x_classes(inst: GammaInstance, a: ExtElement, L: int, budget: int | None = None):
    """Every class of X with ||X|| = q^L that the vanishing sum can distinguish.

    The sum depends on X only through a X modulo the dual of g(P^level), so X
    is taken modulo Mat(P^R) with R = max(-v(a) - level, 1 - L).  For L = 0
    the classes run over g(O)/g(P^R), otherwise over Mat(P^-L)/Mat(P^R).
    """
    from itertools import product

    from .characters import check_budget, ideal_quotient

    ctx = inst.ctx
    level = plus(L) + inst.n_chi
    R = max(-int(a.valuation) - level, 1 - L)
    if L == 0:
        quot = LatticeQuotient(ctx, 0, R, budget)
        for X in quot:
            if matrix_norm(X).log_value == 0:
                yield X
        return
    reps = list(ideal_quotient(ctx.ext, -L, R))
    m = ctx.m
    check_budget(len(reps) ** (m * m), budget, "X classes")
    for entries in product(reps, repeat=m * m):
        X = MatrixE(ctx.ext, [entries[r * m:(r + 1) * m] for r in range(m)])
        if matrix_norm(X).log_value == L:
            yield X


@dataclass
class ShiftReport:
    norm_before: float
    norm_after: float
    forward: bool
    converse: bool
    invertibility: bool

    @property
    def ok(self) -> bool:
        return self.forward and self.converse and self.invertibility


def shift_invariance_check(inst: GammaInstance, v: MatrixE, u: MatrixE, g: MatrixE, L: int) -> ShiftReport:
    """||C^-1(C(v) u g)|| = q^L given ||C^-1(u g)|| = q^L, and the converse.

    The converse applies the same statement to C(v) u g and -v, since
    C(-v) C(v) = I.  Also checks that I + C(v) u g is invertible exactly when
    I + v C^-1(u g) is.
    """
    ctx = inst.ctx
    if not is_lie_element(ctx, v) or not v.in_level(plus(L) + inst.n_chi):
        raise HypothesisViolation("v must lie in g(P^(L+ + n_chi))")
    if L <= -inst.n_chi:
        raise HypothesisViolation("need L > -n_chi")
    I = ctx.I
    ug = u @ g
    X = cayley_inv(ug)
    before = matrix_norm(X).log_value
    if before != L:
        raise HypothesisViolation(f"||C^-1(u g)|| = q^{before}, expected q^{L}")
    cv = cayley(v)
    shifted = cv @ ug
    inv_a = not (I + shifted).det().is_zero()
    inv_b = not (I + v @ X).det().is_zero()
    after = matrix_norm(cayley_inv(shifted)).log_value if inv_a else None
    forward = after == L
    back = cayley(-v) @ shifted
    converse = back == ug and matrix_norm(cayley_inv(back)).log_value == L if forward else False
    return ShiftReport(before, after, forward, converse, inv_a == inv_b)
