import cmath
import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ugamma.characters import (
    AdditiveCharacter,
    BudgetExceeded,
    CharacterValue,
    ExactSum,
    UnitGroup,
    character_from_wild,
    cyclotomic_sum,
    eval_additive,
    eval_mult,
    ideal_generators,
    ideal_quotient,
    is_zero,
    make_mult_character,
    principal_log,
    principal_units,
    residue_generator,
    teichmuller,
    unit_residues,
    wild_parameter,
)
from ugamma.localfield import ExtElement, ExtensionContext, PrecisionError

P = 3
UNR = ExtensionContext.unramified(P)
PSI = AdditiveCharacter(UNR)


def cv_list(max_k=3):
    return st.lists(
        st.builds(lambda n, k: CharacterValue(Fraction(n, P**k)), st.integers(0, 80), st.integers(0, max_k)),
        max_size=30,
    )


# ExactSum


def test_all_pth_roots_vanish():
    assert is_zero(cyclotomic_sum(P, [CharacterValue(Fraction(j, P)) for j in range(P)]))


def test_single_one_is_one():
    s = cyclotomic_sum(P, [CharacterValue(0)])
    assert not s.is_zero() and s.rational_value() == 1


def test_full_character_sum_over_P_inverse():
    vals = [PSI(x) for x in ideal_quotient(UNR, -1, 0)]
    assert len(vals) == 9
    assert cyclotomic_sum(P, vals).is_zero()


def test_mixed_denominators_rejected():
    with pytest.raises(ValueError):
        cyclotomic_sum(P, [CharacterValue(Fraction(1, 2))])


def test_ninth_roots_subsums():
    # the primitive ninth roots sum to zero, the cube roots alone sum to zero
    prim = [CharacterValue(Fraction(j, 9)) for j in range(9) if j % 3]
    assert cyclotomic_sum(P, prim).is_zero()
    s = cyclotomic_sum(P, [CharacterValue(Fraction(j, 9)) for j in (0, 3, 6)])
    assert s.is_zero()
    assert not cyclotomic_sum(P, [CharacterValue(Fraction(1, 9)), CharacterValue(Fraction(4, 9))]).is_zero()


def test_is_zero_agrees_with_floats_on_random_multisets():
    rng = random.Random(5)
    zeros = 0
    for _ in range(100):
        k = rng.randint(1, 3)
        n = P**k
        if rng.random() < 0.5:
            # unions of full cosets of subgroups are zero
            counts = [0] * n
            for _ in range(rng.randint(1, 3)):
                step = P ** rng.randint(0, k - 1)
                start = rng.randrange(n)
                for j in range(n // step):
                    counts[(start + j * step) % n] += 1
            counts[rng.randrange(n)] += rng.choice([0, 0, 1])
        else:
            counts = [rng.randint(0, 3) for _ in range(n)]
        vals = [CharacterValue(Fraction(r, n)) for r, c in enumerate(counts) for _ in range(c)]
        exact = cyclotomic_sum(P, vals).is_zero()
        approx = abs(sum(c * cmath.exp(2j * math.pi * r / n) for r, c in enumerate(counts)))
        assert exact == (approx < 1e-6)
        zeros += exact
    assert 10 < zeros < 90


@given(cv_list(), cv_list())
def test_merge_is_partition_independent(xs, ys):
    whole = cyclotomic_sum(P, xs + ys)
    parts = cyclotomic_sum(P, xs) + cyclotomic_sum(P, ys)
    assert whole == parts
    assert abs(whole.to_complex() - parts.to_complex()) < 1e-9
    assert whole.canonical() == parts.canonical()


@given(cv_list())
def test_canonical_matches_complex_value(xs):
    s = cyclotomic_sum(P, xs)
    assert s.is_zero() == (abs(s.to_complex()) < 1e-6)
    r = s.rational_value()
    if r is not None:
        assert abs(s.to_complex() - float(r)) < 1e-9


def test_weights_are_rational():
    s = ExactSum(P).add(CharacterValue(0), Fraction(1, 3)).add(CharacterValue(Fraction(1, 3)), Fraction(1, 3))
    assert not s.is_zero()
    s.add(CharacterValue(Fraction(2, 3)), Fraction(1, 3))
    assert s.is_zero()


# additive character


def test_psi_examples():
    assert PSI(UNR.elem(Fraction(1, 3))) == CharacterValue(Fraction(1, 3))
    for u in ideal_quotient(UNR, 0, 2):
        assert PSI(u).is_trivial()
    assert not all(PSI(x).is_trivial() for x in ideal_quotient(UNR, -1, 0))


def test_psi_additive_on_random_pairs():
    rng = random.Random(6)
    for _ in range(100):
        x = UNR.elem(Fraction(rng.randint(-99, 99), 27), Fraction(rng.randint(-99, 99), 9))
        y = UNR.elem(Fraction(rng.randint(-99, 99), 3), Fraction(rng.randint(-99, 99), 81))
        assert eval_additive(PSI, x + y) == PSI(x) + PSI(y)


def test_psi_precision_guard():
    with pytest.raises(PrecisionError):
        PSI(UNR.elem(Fraction(1, 3**20)))


def test_ramified_psi_conductor_checked():
    ram = ExtensionContext.ramified(P)
    psi = AdditiveCharacter(ram)
    assert all(psi(x).is_trivial() for x in ideal_quotient(ram, 0, 2))


# multiplicative characters


def test_unit_group_structure():
    G = UnitGroup(UNR, 2)
    assert G.size == 8 * 9
    assert math.prod(G.orders) == G.size
    assert G.orders[0] == 8
    for u in G.elements:
        assert G.log(u) is not None


def test_teichmuller_is_root_of_unity():
    g = teichmuller(residue_generator(UNR), 3)
    assert (g**8 - 1).in_ideal(3)
    assert (g - residue_generator(UNR)).in_ideal(1)


def test_principal_log_homomorphism():
    N = 3
    us = principal_units(UNR, 1, N)
    rng = random.Random(7)
    for _ in range(50):
        x, y = rng.choice(us), rng.choice(us)
        lhs = principal_log((x * y).reduce(N), N)
        rhs = (principal_log(x, N) + principal_log(y, N)).reduce(N)
        assert lhs == rhs


def test_trivial_images_rejected():
    G = UnitGroup(UNR, 2)
    with pytest.raises(ValueError):
        make_mult_character(UNR, 2, [0] * len(G.generators), G)


def test_incompatible_image_rejected():
    G = UnitGroup(UNR, 2)
    with pytest.raises(ValueError):
        make_mult_character(UNR, 2, [Fraction(1, 5)] + [0] * (len(G.generators) - 1), G)


def test_conductor_smaller_than_requested_rejected():
    # tame-only image: conductor 1 + P, requested N = 2
    G = UnitGroup(UNR, 2)
    with pytest.raises(ValueError):
        make_mult_character(UNR, 2, [Fraction(1, 8)] + [0] * (len(G.generators) - 1), G)


def test_wild_character_accepted_with_conductor_two():
    chi = character_from_wild(UNR, 2, UNR.elem(Fraction(1, 9)))
    assert chi.N_chi == 2 and chi.n_chi == 1
    chi.check_conductor()
    for g in ideal_generators(UNR, 2):
        assert chi(UNR.one + g).is_trivial()


def test_generator_images_round_trip():
    G = UnitGroup(UNR, 2)
    images = [Fraction(3, 8), Fraction(1, 3), Fraction(2, 3)][: len(G.generators)]
    chi = make_mult_character(UNR, 2, images, G)
    for g, img in zip(G.generators, images):
        assert eval_mult(chi, g) == CharacterValue(img)


def test_non_unit_rejected():
    chi = character_from_wild(UNR, 2, UNR.elem(Fraction(1, 9)))
    with pytest.raises(ValueError):
        chi(UNR.elem(3))


@pytest.mark.parametrize("a0", [Fraction(1, 9), Fraction(2, 9)])
def test_homomorphism_exhaustive_N2(a0):
    chi = character_from_wild(UNR, 2, UNR.elem(a0, Fraction(1, 3)), tame=Fraction(1, 4))
    units = unit_residues(UNR, 2)
    vals = {u.residue_key(2): chi(u) for u in units}
    for u, v in itertools.product(units, repeat=2):
        assert vals[(u * v).reduce(2).residue_key(2)] == vals[u.residue_key(2)] + vals[v.residue_key(2)]
    assert chi(-UNR.one) == chi.sign_at_minus_one
    assert chi.sign_at_minus_one == CharacterValue(Fraction(1, 4)) * 4


def test_table_and_log_constructions_agree():
    G = UnitGroup(UNR, 2)
    chi_log = character_from_wild(UNR, 2, UNR.elem(Fraction(1, 9), Fraction(2, 3)), tame=Fraction(3, 8))
    chi_tab = make_mult_character(UNR, 2, [chi_log(g).exponent for g in G.generators], G)
    for u in G.elements:
        assert chi_log(u) == chi_tab(u)


def test_value_depends_on_residue_only():
    chi = character_from_wild(UNR, 3, UNR.elem(Fraction(1, 27)))
    rng = random.Random(8)
    for u in rng.sample(unit_residues(UNR, 3), 40):
        x = rng.choice(list(ideal_quotient(UNR, 3, 5)))
        assert chi(u + x) == chi(u)


@pytest.mark.parametrize("N,a0", [(2, (Fraction(1, 9), 0)), (2, (Fraction(4, 9), Fraction(1, 9))), (3, (Fraction(2, 27), Fraction(1, 3)))])
def test_wild_parameter_exhaustive(N, a0):
    a0 = UNR.elem(*a0)
    chi = character_from_wild(UNR, N, a0)
    w = wild_parameter(chi, PSI)
    n = chi.n_chi
    assert w.a.abs() == Fraction(9) ** N and w.b.abs() == Fraction(9) ** N
    assert (w.a + w.b).valuation >= -n
    assert (w.a - a0).valuation >= -n
    inv = chi.inverse()
    for x in ideal_quotient(UNR, n, N):
        assert chi(UNR.one + x) == PSI(w.a * x)
        assert inv(UNR.one + x) == PSI(w.b * x)


def test_x_plus_one_group_isomorphism_exhaustive():
    for x, y in itertools.product(ideal_quotient(UNR, 1, 2), repeat=2):
        assert ((UNR.one + x) * (UNR.one + y)).reduce(2) == (UNR.one + x + y).reduce(2)


def test_character_round_trip_unique_class():
    # each character of (1+P)/(1+P^2) is x -> psi(a x) for one a in P^-2/P^-1
    gens = ideal_generators(UNR, 1)
    seen = {}
    for a in ideal_quotient(UNR, -2, -1):
        key = tuple(PSI(a * g).exponent for g in gens)
        seen.setdefault(key, []).append(a)
    assert len(seen) == 9 and all(len(v) == 1 for v in seen.values())


def test_unit_group_budget():
    with pytest.raises(BudgetExceeded):
        UnitGroup(UNR, 3, budget=100)


def test_ramified_wild_construction_refused():
    ram = ExtensionContext.ramified(P)
    with pytest.raises(ValueError):
        character_from_wild(ram, 2, ram.elem(Fraction(1, 3)))


def test_ramified_table_character():
    ram = ExtensionContext.ramified(P)
    G = UnitGroup(ram, 2)
    # images with the principal generator nontrivial give conductor exactly 2
    imgs = [0] * len(G.generators)
    imgs[-1] = Fraction(1, G.orders[-1])
    chi = make_mult_character(ram, 2, imgs, G)
    assert chi.N_chi == 2
