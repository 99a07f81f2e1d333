import itertools
import random
from fractions import Fraction

import pytest

from ugamma.characters import BudgetExceeded, ideal_quotient
from ugamma.localfield import ExtensionContext
from ugamma.matrixalg import MatrixE, cayley
from ugamma.unitary import (
    FormContext,
    LatticeQuotient,
    cayley_quotient_check,
    doubled_form,
    doubled_w,
    embed_doubled,
    enumerate_lie_quotient,
    group_report,
    is_group_element,
    is_lie_element,
    measure_identity_m1,
    orbit_admissible,
    preserves_doubled_form,
    random_group_element,
    random_lie_element,
    separation_check,
    separation_control,
    solve_orbit,
)

P = 3
UNR = ExtensionContext.unramified(P)


def test_form_invariants(form):
    assert form.T.star() == form.T
    assert form.T_inv.star() == form.T_inv
    assert form.T @ form.T_inv == form.I
    for i in range(form.m):
        assert form.T_valuation(i) == (-1 if i < form.k else 0)


def test_form_rejects_bad_input():
    with pytest.raises(ValueError):
        FormContext(UNR, 2, 3)
    with pytest.raises(ValueError):
        FormContext(UNR, 2, 0, (1, 3))


def test_measure_constant():
    assert FormContext(UNR, 2, 0).measure_constant == 1
    assert FormContext(UNR, 1, 1).measure_constant == Fraction(1, 3)
    # |T_22|_E^-1 |T_11|_F^-1 |T_22|_F^-1 with T = diag(1/3, 1)
    assert FormContext(UNR, 2, 1).measure_constant == Fraction(1, 3)
    assert FormContext(UNR, 2, 2).measure_constant == Fraction(1, 9 * 9)


# membership


def test_group_examples():
    ctx = FormContext(UNR, 2)
    assert is_group_element(ctx, ctx.I)
    u = UNR.elem(Fraction(3, 5), Fraction(4, 5))
    assert is_group_element(ctx, MatrixE.diag(UNR, [u, UNR.one]))
    assert not is_group_element(ctx, MatrixE.diag(UNR, [UNR.elem(3), UNR.one]))
    g = random_group_element(FormContext(UNR, 2, 1), random.Random(0))
    assert group_report(FormContext(UNR, 2, 1), g) == {"member": True, "det_norm_one": True}


def test_lie_examples():
    ctx = FormContext(UNR, 2)
    assert is_lie_element(ctx, ctx.I.scale(UNR.omega))
    x = MatrixE.unit_matrix(UNR, 2, 0, 1) - MatrixE.unit_matrix(UNR, 2, 1, 0)
    assert is_lie_element(ctx, x)
    assert not is_lie_element(ctx, MatrixE.unit_matrix(UNR, 2, 0, 0))


# lattice quotients


def test_m1_quotient_hand_enumeration():
    ctx = FormContext(UNR, 1)
    reps = [x for x, _ in enumerate_lie_quotient(ctx, 1, 2)]
    assert sorted(x[0, 0].c1 for x in reps) == [0, 3, 6]
    assert all(x[0, 0].c0 == 0 for x in reps)


def test_m2_quotient_count():
    assert len(LatticeQuotient(FormContext(UNR, 2), 1, 2)) == 81
    assert len(LatticeQuotient(FormContext(UNR, 2, 1), 1, 2)) == 81
    assert len(LatticeQuotient(FormContext(UNR, 2), 1, 3)) == 3**8


def test_n_equals_N_single_rep(form):
    q = LatticeQuotient(form, 2, 2)
    (x,) = list(q)
    assert x.is_zero() and q.weight == q.total_measure


def test_reps_are_distinct_lie_elements(form):
    q = LatticeQuotient(form, 1, 3)
    keys = set()
    for x in q:
        assert is_lie_element(form, x) and x.in_level(1)
        keys.add(x.residue_key(3))
    assert len(keys) == q.size == 3 ** ((3 - 1) * form.m**2)


def test_quotient_matches_residue_oracle_T_identity():
    # for T = I every x with x* + x = 0 mod P^2 lifts to the skew part of x
    ctx = FormContext(UNR, 2)
    reps = list(ideal_quotient(UNR, 1, 2))
    oracle = set()
    for e in itertools.product(reps, repeat=4):
        x = MatrixE(UNR, [e[:2], e[2:]])
        if (x.star() + x).in_level(2):
            oracle.add(x.residue_key(2))
    lattice = {x.residue_key(2) for x in LatticeQuotient(ctx, 1, 2)}
    assert lattice == oracle and len(oracle) == 81


def test_measure_additivity_under_refinement(form):
    for n in (0, 1, 2):
        totals = {LatticeQuotient(form, n, N).total_measure for N in range(n, n + 3)}
        assert len(totals) == 1
    # at level 0 the off-diagonal E-coordinate is forced into P when T_11 has valuation -1 and T_22 does not
    forced = 2 if (form.m, form.k) == (2, 1) else 0
    assert LatticeQuotient(form, 0, 0).total_measure == form.measure_constant / P**forced


def test_budget_enforced():
    with pytest.raises(BudgetExceeded):
        LatticeQuotient(FormContext(UNR, 2), 0, 3, budget=1000)


# doubled group


def test_embedding_identity_and_minus_identity(form):
    assert embed_doubled(form, form.I) == MatrixE.identity(UNR, 2 * form.m)
    # substituting g = -I gives -w, which differs from w by the central element -1
    assert embed_doubled(form, -form.I) == -doubled_w(form)
    assert preserves_doubled_form(form, doubled_w(form))


def test_doubled_w_formula(form):
    w = doubled_w(form)
    m = form.m
    Tinv_w = (form.T_inv @ form.w_m).scale(Fraction(1, 2))
    wT = (form.w_m @ form.T).scale(2)
    for i, j in itertools.product(range(m), repeat=2):
        assert w[i, j] == 0 and w[m + i, m + j] == 0
        assert w[i, m + j] == Tinv_w[i, j]
        assert w[m + i, j] == wT[i, j]


def test_embedding_preserves_form_and_multiplies(form):
    rng = random.Random(1)
    for _ in range(20):
        g1, g2 = random_group_element(form, rng), random_group_element(form, rng)
        h1 = embed_doubled(form, g1)
        assert h1.star() @ doubled_form(form) @ h1 == doubled_form(form)
        assert embed_doubled(form, g1 @ g2) == h1 @ embed_doubled(form, g2)


def test_embedding_rejects_non_group():
    ctx = FormContext(UNR, 1)
    with pytest.raises(ValueError):
        embed_doubled(ctx, ctx.I.scale(2))


# open orbit


def test_orbit_zero():
    ctx = FormContext(UNR, 2, 1)
    sol = solve_orbit(ctx, MatrixE.zeros(UNR, 2))
    assert sol.h == -ctx.I and sol.E == -ctx.I and sol.ok


def test_orbit_random(form):
    rng = random.Random(2)
    for _ in range(25):
        y = random_lie_element(form, rng, rng.randint(-1, 1), 2)
        x = (y @ form.T_inv @ form.w_m).scale(Fraction(1, 2))
        try:
            sol = solve_orbit(form, x)
        except ValueError:
            continue
        assert sol.ok, sol.checks
        z = (x @ form.w_m @ form.T).scale(2)
        assert sol.h == -cayley(z)
        d = sol.h.det()
        assert d * d.conj() == 1


def test_orbit_rejects_inadmissible():
    ctx = FormContext(UNR, 2)
    with pytest.raises(ValueError):
        solve_orbit(ctx, MatrixE.unit_matrix(UNR, 2, 0, 0))


@pytest.mark.parametrize("k", [0, 1])
def test_orbit_admissibility_equivalence_exhaustive(k):
    ctx = FormContext(UNR, 2, k)
    # entries c0 + c1 w with c0, c1 in {-1, 0, 1}
    vals = [UNR.elem(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)]
    both = 0
    for e in itertools.product(vals, repeat=4):
        x = MatrixE(UNR, [e[:2], e[2:]])
        left = orbit_admissible(ctx, x)
        right = is_lie_element(ctx, (x @ ctx.w_m @ ctx.T).scale(2))
        assert left == right
        both += left
    assert both == 3**4


# separation


@pytest.mark.parametrize("m,k", [(1, 0), (1, 1), (2, 0), (2, 1)])
def test_separation(m, k):
    rep = separation_check(FormContext(UNR, m, k), 1)
    assert rep.ok and rep.searched == 3 ** (2 * m * m)


@pytest.mark.parametrize("m", [1, 2])
def test_separation_control_finds_identity(m):
    rep = separation_control(FormContext(UNR, m), 1)
    assert rep.witness == MatrixE.identity(UNR, m)


def test_separation_precondition():
    with pytest.raises(ValueError):
        separation_check(FormContext(UNR, 1), 0)


# Cayley on quotients and the m = 1 measure identity


@pytest.mark.parametrize("m,k", [(1, 0), (1, 1), (2, 0), (2, 1)])
def test_cayley_quotient_bijection(m, k):
    rep = cayley_quotient_check(FormContext(UNR, m, k), 1, 2)
    assert rep["injective"] and rep["in_group"]
    assert rep["image_size"] == rep["size"]
    assert rep["lie_measure"] == rep["image_measure"]
    if k == 0:
        assert rep["image_equals_group"] and rep["group_count"] == rep["size"]


@pytest.mark.parametrize("N", [2, 3])
def test_measure_identity_m1(N):
    rng = random.Random(N)
    table = {}

    def f(key):
        return table.setdefault(key, rng.randrange(-4, 5))

    rep = measure_identity_m1(FormContext(UNR, 1), N, f)
    assert rep["equal"]
    assert rep["group_count"] == rep["lie_count"] == 3 ** (N - 1)
