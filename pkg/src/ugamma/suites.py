"""Verification suites: each returns a list of JSON-ready records.

A record is {instance, lemma, status, witness?, detail?}.  status is "pass"
or "fail"; witness is the first failing input, serialized.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .characters import (
    CharacterValue,
    ideal_generators,
    ideal_quotient,
)
from .config import SUITE_NAMES, RunConfig
from .gammasum import (
    GammaInstance,
    HypothesisViolation,
    dual_path_gamma,
    inner_vanishing_sum,
    shift_invariance_check,
    stable_gamma,
    x_classes,
)
from .matrixalg import (
    TRACE_SIGN,
    MatrixE,
    cayley,
    cayley_inv,
    check_blocks,
    det_trace_congruence,
    matrix_norm,
    random_matrix,
    random_unimodular,
    restrict_scalars,
    verify_ct_identities,
)
from .unitary import (
    FormContext,
    cayley_quotient_check,
    doubled_w,
    embed_doubled,
    measure_identity_m1,
    orbit_admissible,
    preserves_doubled_form,
    random_group_element,
    random_lie_element,
    sample_lie_with_norm,
    sample_matrix_with_norm,
    separation_check,
    separation_control,
    solve_orbit,
)


def record(lemma: str, instance: dict, ok: bool, witness=None, **detail) -> dict:
    r = {"instance": instance, "lemma": lemma, "status": "pass" if ok else "fail"}
    if witness is not None and not ok:
        r["witness"] = witness
    if detail:
        r["detail"] = detail
    return r


def _mat(x: MatrixE) -> list:
    return x.to_strings()


class Tally:
    """Counts checks and keeps the first failing witness."""

    def __init__(self):
        self.n = 0
        self.failures = 0
        self.witness = None

    def check(self, ok: bool, witness: Callable[[], dict]) -> None:
        self.n += 1
        if not ok:
            self.failures += 1
            if self.witness is None:
                self.witness = witness()

    @property
    def ok(self) -> bool:
        return self.failures == 0


def _base(cfg: RunConfig, **extra) -> dict:
    d = {"p": cfg.p, "a": str(cfg.ext.a), "m": cfg.m, "k": cfg.k}
    d.update(extra)
    return d


# individual suites


def suite_norm_axioms(cfg: RunConfig, rng: random.Random) -> list:
    ext = cfg.ext
    out = []
    for m in sorted({1, 2, 3} | {cfg.m}):
        tallies = {f"Norm {i}": Tally() for i in range(1, 6)}
        for _ in range(cfg.samples):
            lx, ly = rng.randint(-2, 2), rng.randint(-2, 2)
            x = random_matrix(ext, m, rng, lx, 3)
            y = random_matrix(ext, m, rng, ly, 3)
            nx, ny, nxy = matrix_norm(x), matrix_norm(y), matrix_norm(x + y)
            wit = lambda: {"x": _mat(x), "y": _mat(y)}
            tallies["Norm 1"].check(nxy <= max(nx, ny), wit)
            if nx < ny:
                tallies["Norm 2"].check(nxy == ny, wit)
            k1, k2 = random_unimodular(ext, m, rng), random_unimodular(ext, m, rng)
            tallies["Norm 3"].check(matrix_norm(k1 @ x @ k2) == nx, lambda: {"x": _mat(x), "k1": _mat(k1), "k2": _mat(k2)})
            v = random_matrix(ext, m, rng, 1, 3)
            I = MatrixE.identity(ext, m)
            d = (I - v).det()
            ok4 = d.valuation == 0 and (I - v).inv().is_integral()
            tallies["Norm 4"].check(ok4, lambda: {"v": _mat(v)})
            tallies["Norm 5"].check(matrix_norm(x.star()) == nx, wit)
        for name, t in tallies.items():
            out.append(record(name, _base(cfg, m=m), t.ok, t.witness, checked=t.n))
    return out


def suite_cayley_identities(cfg: RunConfig, rng: random.Random) -> list:
    out = []
    for m in sorted({1, 2, 3} | {cfg.m}):
        ctx = cfg.form_with(m=m)
        ct = Tally()
        trip = Tally()
        literal_fail = 0
        for _ in range(cfg.samples):
            v = random_lie_element(ctx, rng, 1, 3)
            g = random_group_element(ctx, rng, 1, 3)
            rep = verify_ct_identities(v, g)
            ct.check(rep.ok, lambda: {"v": _mat(v), "g": _mat(g), "failed": rep.witnesses})
            if rep.literal.get("CT3'") is False:
                literal_fail += 1
            y = random_matrix(ctx.ext, m, rng, 1, 3)
            trip.check(cayley_inv(cayley(y)) == y, lambda: {"y": _mat(y)})
        inst = _base(cfg, m=m, k=ctx.k)
        out.append(record("CT 1-3'", inst, ct.ok, ct.witness, checked=ct.n, printed_CT3_prime_failures=literal_fail))
        out.append(record("cayley round trip", inst, trip.ok, trip.witness, checked=trip.n))
    return out


def suite_det_trace(cfg: RunConfig, rng: random.Random) -> list:
    ext = cfg.ext
    m = 2
    reps = list(ideal_quotient(ext, 1, 2))
    size = len(reps) ** (m * m)
    if size > cfg.budget:
        from .characters import BudgetExceeded

        raise BudgetExceeded(f"det-trace: {size} matrices exceeds budget {cfg.budget}")
    t = Tally()
    literal = 0
    for entries in itertools.product(reps, repeat=m * m):
        v = MatrixE(ext, [entries[r * m:(r + 1) * m] for r in range(m)])
        rep = det_trace_congruence(v, 1)
        t.check(rep.ok, lambda: {"v": _mat(v), **rep.witness()})
        if det_trace_congruence(v, 1, sign=-TRACE_SIGN).congruence:
            literal += 1
    return [record("det(I-v) = 1 + s tr v mod P^2C", _base(cfg, m=m, C=1), t.ok, t.witness,
                   checked=t.n, sign=TRACE_SIGN, opposite_sign_holds=literal)]


def suite_group_iso(cfg: RunConfig, rng: random.Random) -> list:
    ext = cfg.ext
    out = []
    for n, N in ((1, 2), (1, 1)):
        t = Tally()
        for x in ideal_quotient(ext, n, N):
            for y in ideal_quotient(ext, n, N):
                lhs = ((ext.one + x) * (ext.one + y)).reduce(N)
                rhs = (ext.one + x + y).reduce(N)
                t.check(lhs == rhs, lambda: {"x": str(x), "y": str(y)})
        out.append(record("1+x group isomorphism", _base(cfg, n=n, N=N), t.ok, t.witness, checked=t.n))
    # every character of (1+P)/(1+P^2) is x -> psi_0(a x) for exactly one a mod P^-1
    psi = cfg.psi
    n, N = 1, 2
    gens = ideal_generators(ext, n)
    orders = [ext.p ** (N - n)] * 2
    counts = {}
    for imgs in itertools.product(*[range(o) for o in orders]):
        target = [CharacterValue(Fraction(i, o)) for i, o in zip(imgs, orders)]
        hits = [a for a in ideal_quotient(ext, -N, 0)
                if all(psi(a * g) == tv for g, tv in zip(gens, target))]
        classes = {a.reduce(-n).residue_key(-n) for a in hits}
        counts[imgs] = len(classes)
    ok = all(c == 1 for c in counts.values())
    out.append(record("character round trip", _base(cfg, n=n, N=N), ok,
                      {"classes_per_character": {str(k): v for k, v in counts.items()}}, characters=len(counts)))
    return out


def suite_char_rewrite(cfg: RunConfig, rng: random.Random) -> list:
    ext = cfg.ext
    chi, psi = cfg.chi, cfg.psi
    m = 2
    inst = GammaInstance(cfg.form_with(m=1), chi, psi)
    a = inst.wild.a
    n, N = inst.n_chi, inst.N_chi
    reps = list(ideal_quotient(ext, n, N))
    size = len(reps) ** (m * m)
    if size > cfg.budget:
        from .characters import BudgetExceeded

        raise BudgetExceeded(f"char-rewrite: {size} matrices exceeds budget {cfg.budget}")
    I = MatrixE.identity(ext, m)
    t = Tally()
    literal = 0
    for entries in itertools.product(reps, repeat=m * m):
        v = MatrixE(ext, [entries[r * m:(r + 1) * m] for r in range(m)])
        lhs = chi((I - v).det())
        tr = v.trace()
        t.check(lhs == psi(a * tr * TRACE_SIGN), lambda: {"v": _mat(v), "chi": str(lhs)})
        if lhs == psi(a * tr):
            literal += 1
    return [record("chi(det(1-v)) = psi_0(s a tr v)", _base(cfg, m=m, n=n, N=N), t.ok, t.witness,
                   checked=t.n, a=str(a), sign=TRACE_SIGN, opposite_sign_matches=literal)]


def suite_restriction_scalars(cfg: RunConfig, rng: random.Random) -> list:
    ext = cfg.ext
    a = ext.a
    m = cfg.m
    hom = Tally()
    blocks = Tally()
    form_I = FormContext(ext, m, 0)
    for _ in range(cfg.samples):
        x = random_matrix(ext, m, rng, -1, 3)
        y = random_matrix(ext, m, rng, -1, 3)
        rx, ry = restrict_scalars(x), restrict_scalars(y)
        ok = (np.array_equal(restrict_scalars(x + y), rx + ry)
              and np.array_equal(restrict_scalars(x @ y), rx.dot(ry))
              and (x == y) == np.array_equal(rx, ry))
        hom.check(ok, lambda: {"x": _mat(x), "y": _mat(y)})
        z = random_lie_element(form_I, rng, 0, 3)
        cb = check_blocks(restrict_scalars(z), a)
        cx = check_blocks(restrict_scalars(x), a)
        skew = (x.star() == -x)
        blocks.check(cb == {"E_linear": True, "E_unitary": True} and cx["E_linear"] and cx["E_unitary"] == skew,
                     lambda: {"z": _mat(z), "x": _mat(x)})
    w_e11 = restrict_scalars(MatrixE.unit_matrix(ext, m, 0, 0, ext.omega))
    ok_basis = w_e11[0, 0] == 0 and w_e11[0, 1] == a and w_e11[1, 0] == 1 and w_e11[1, 1] == 0
    return [
        record("restriction is an injective F-algebra map", _base(cfg), hom.ok, hom.witness, checked=hom.n),
        record("E-linearity and E-unitarity blocks", _base(cfg, T="I"), blocks.ok and ok_basis, blocks.witness,
               checked=blocks.n, omega_e11_block=ok_basis),
    ]


def suite_embedding(cfg: RunConfig, rng: random.Random) -> list:
    ctx = cfg.form
    form = Tally()
    mult = Tally()
    for _ in range(cfg.samples):
        g1 = random_group_element(ctx, rng, 1, 3)
        g2 = random_group_element(ctx, rng, 1, 3)
        h1 = embed_doubled(ctx, g1)
        form.check(preserves_doubled_form(ctx, h1), lambda: {"g": _mat(g1)})
        mult.check(embed_doubled(ctx, g1 @ g2) == h1 @ embed_doubled(ctx, g2),
                   lambda: {"g1": _mat(g1), "g2": _mat(g2)})
    I2 = MatrixE.identity(ctx.ext, 2 * ctx.m)
    w = doubled_w(ctx)
    i_minus = embed_doubled(ctx, -ctx.I)
    inst = _base(cfg)
    return [
        record("i(g,1) preserves w_2m", inst, form.ok, form.witness, checked=form.n),
        record("i(g1 g2,1) = i(g1,1) i(g2,1)", inst, mult.ok, mult.witness, checked=mult.n),
        record("i(I,1) = I", inst, embed_doubled(ctx, ctx.I) == I2),
        record("w preserves w_2m", inst, preserves_doubled_form(ctx, w), {"w": _mat(w)}),
        record("i(-I,1) = -w", inst, i_minus == -w, {"i(-I,1)": _mat(i_minus), "w": _mat(w)},
               i_minus_I_equals_w=(i_minus == w)),
    ]


def suite_orbit_solve(cfg: RunConfig, rng: random.Random) -> list:
    ctx = cfg.form
    t = Tally()
    skipped = 0
    for _ in range(cfg.samples):
        y = random_lie_element(ctx, rng, rng.randint(-1, 1), 3)
        x = (y @ ctx.T_inv @ ctx.w_m).scale(Fraction(1, 2))
        assert orbit_admissible(ctx, x)
        try:
            sol = solve_orbit(ctx, x)
        except ValueError:
            skipped += 1
            continue
        t.check(sol.ok, lambda: {"x": _mat(x), "checks": sol.checks})
    zero = solve_orbit(ctx, MatrixE.zeros(ctx.ext, ctx.m))
    ok0 = zero.h == -ctx.I and zero.E == -ctx.I
    return [
        record("orbit system solution", _base(cfg), t.ok, t.witness, checked=t.n, singular_skipped=skipped),
        record("x = 0 gives h = E = -I", _base(cfg), ok0),
    ]


def suite_separation(cfg: RunConfig, rng: random.Random) -> list:
    out = []
    ext = cfg.ext
    for m in sorted({1, 2} | ({cfg.m} if cfg.m <= 2 else set())):
        for k in sorted({0, 1} & set(range(m + 1))):
            ctx = FormContext(ext, m, k)
            rep = separation_check(ctx, 1, cfg.budget)
            out.append(record("no X in g with X - I in Mat(P^n)", _base(cfg, m=m, k=k, n=1), rep.ok,
                              {"X": _mat(rep.witness)} if rep.witness is not None else None, searched=rep.searched))
        ctrl = separation_control(FormContext(ext, m, 0), 1, cfg.budget)
        found_I = ctrl.witness is not None and ctrl.witness == MatrixE.identity(ext, m)
        out.append(record("gl control finds I", _base(cfg, m=m, n=1), found_I, {"found": None}, searched=ctrl.searched))
    return out


def suite_shift_invariance(cfg: RunConfig, rng: random.Random) -> list:
    ctx = cfg.form
    inst = GammaInstance(ctx, cfg.chi, cfg.psi)
    out = []
    for L in range(-inst.n_chi + 1, 3):
        t = Tally()
        for _ in range(cfg.samples // 4 or 1):
            X = sample_lie_with_norm(ctx, rng, L, 2)
            try:
                target = cayley(X)
            except ValueError:
                continue
            u = random_group_element(ctx, rng, 1, 2)
            g = u.inv() @ target
            v = random_lie_element(ctx, rng, max(L, 0) + inst.n_chi, 2)
            rep = shift_invariance_check(inst, v, u, g, L)
            t.check(rep.ok, lambda: {"v": _mat(v), "X": _mat(X), "report": vars(rep)})
        out.append(record("||C^-1(C(v) u g)|| = ||C^-1(u g)||", _base(cfg, L=L, N_chi=inst.N_chi), t.ok, t.witness,
                          checked=t.n))
    return out


def _vanishing(cfg: RunConfig, rng: random.Random, Ls) -> list:
    ctx = cfg.form
    inst = GammaInstance(ctx, cfg.chi, cfg.psi, cfg.budget)
    wild = inst.wild
    p_inv = Fraction(1, cfg.p)
    out = []
    for L in Ls:
        if L == 0:
            a, b = wild.a, wild.b
        else:
            # scale so that |a| = |b| > q^(n_chi + 1)
            s = 0
            while wild.a.abs() * Fraction(inst.q) ** s <= Fraction(inst.q) ** (inst.n_chi + 1) / ctx.ext.abs_two:
                s += 1
            a, b = wild.a * p_inv**s, wild.b * p_inv**s
        if ctx.m == 1:
            Xs = list(x_classes(inst, a, L, cfg.budget))
            mode = "exhaustive"
        else:
            sampler = sample_lie_with_norm if L == 0 else sample_matrix_with_norm
            Xs = [sampler(ctx, rng, L, 2) for _ in range(cfg.samples)]
            mode = "sampled"
        t = Tally()
        for X in Xs:
            r = inner_vanishing_sum(inst, a, b, X, L)
            t.check(r.is_zero, lambda: {"X": _mat(X), "a": str(a), "b": str(b), "sum": r.sum.to_json(),
                                        "predicted_zero": r.predicted_zero})
        out.append(record(f"inner sum vanishes (L={L})", _base(cfg, L=L, N_chi=inst.N_chi, mode=mode),
                          t.ok, t.witness, checked=t.n, nonzero=t.failures,
                          stability_threshold_met=inst.stability_claimed))
    return out


def suite_vanishing_L(cfg: RunConfig, rng: random.Random) -> list:
    return _vanishing(cfg, rng, (-1, 1, 2))


def suite_vanishing_L0(cfg: RunConfig, rng: random.Random) -> list:
    out = _vanishing(cfg, rng, (0,))
    inst = GammaInstance(cfg.form, cfg.chi, cfg.psi, cfg.budget)
    try:
        inner_vanishing_sum(inst, inst.wild.a, inst.wild.b, cfg.form.I, 0)
        rejected = False
    except HypothesisViolation:
        rejected = True
    out.append(record("hypothesis filter rejects X = I", _base(cfg, L=0), rejected))
    return out


def suite_gamma(cfg: RunConfig, rng: random.Random) -> list:
    inst = GammaInstance(cfg.form, cfg.chi, cfg.psi, cfg.budget)
    res = stable_gamma(inst, refine=True)
    return [record("stable gamma sum", inst.describe(), res.refinement_ok, {"refined": res.refined.to_json()},
                   gamma=res.to_json())]


def suite_gamma_dual_path(cfg: RunConfig, rng: random.Random) -> list:
    inst = GammaInstance(cfg.form, cfg.chi, cfg.psi, cfg.budget)
    res = stable_gamma(inst, refine=False)
    rep = dual_path_gamma(inst, res)
    return [record("chi^-1(det(I-v)) path = psi_0(s b tr v) path", inst.describe(), rep.ok, rep.to_json(),
                   **rep.to_json())]


def suite_measure_m1(cfg: RunConfig, rng: random.Random) -> list:
    out = []
    ext = cfg.ext
    ctx1 = FormContext(ext, 1, 0)
    for N in (2, 3):
        table = {}

        def f(key):
            if key not in table:
                table[key] = rng.randrange(-5, 6)
            return table[key]

        rep = measure_identity_m1(ctx1, N, f)
        out.append(record("m=1 Cayley change of variables", _base(cfg, m=1, N=N), rep["equal"],
                          {k: str(v) for k, v in rep.items()},
                          lhs=str(rep["lhs"]), rhs=str(rep["rhs"]), group_count=rep["group_count"]))
    for m in sorted({1, 2} | ({cfg.m} if cfg.m <= 2 else set())):
        for k in sorted({0, 1} & set(range(m + 1))):
            ctx = FormContext(ext, m, k)
            rep = cayley_quotient_check(ctx, 1, 2, cfg.budget)
            ok = rep["injective"] and rep["in_group"] and rep["lie_measure"] == rep["image_measure"]
            ok = ok and rep.get("image_equals_group", True)
            out.append(record("Cayley bijection g(P)/g(P^2) -> U mod P^2", _base(cfg, m=m, k=k), ok,
                              {k2: str(v) for k2, v in rep.items()}, **{k2: str(v) for k2, v in rep.items()}))
    return out


@dataclass(frozen=True)
class Suite:
    name: str
    anchor: str
    run: Callable


REGISTRY = {
    s.name: s
    for s in (
        Suite("norm-axioms", "matrix norm properties Norm 1-5", suite_norm_axioms),
        Suite("cayley-identities", "Cayley transform identities CT 1-3'", suite_cayley_identities),
        Suite("det-trace", "det(I - v) versus 1 + tr(v) modulo P^2C", suite_det_trace),
        Suite("group-iso", "x -> 1 + x as a group isomorphism P^n/P^N -> (1+P^n)/(1+P^N)", suite_group_iso),
        Suite("char-rewrite", "chi(det(1 - v)) as psi_0(a tr v)", suite_char_rewrite),
        Suite("restriction-scalars", "restriction of scalars and the block conditions", suite_restriction_scalars),
        Suite("embedding", "explicit i(g,1) and w in the doubled group", suite_embedding),
        Suite("orbit-solve", "solution h, E of the open orbit system", suite_orbit_solve),
        Suite("separation", "no X in g with X - I small", suite_separation),
        Suite("shift-invariance", "norm of C^-1 under translation by C(v)", suite_shift_invariance),
        Suite("vanishing-L", "inner integral vanishing for L != 0", suite_vanishing_L),
        Suite("vanishing-L0", "inner integral vanishing for L = 0", suite_vanishing_L0),
        Suite("gamma", "stable gamma factor as a Lie algebra integral", suite_gamma),
        Suite("gamma-dual-path", "gamma integral through the wild parameter", suite_gamma_dual_path),
        Suite("measure-m1", "Cayley change of variables and quotient bijection", suite_measure_m1),
    )
}

assert tuple(REGISTRY) == SUITE_NAMES


def list_suites() -> list[dict]:
    return [{"name": s.name, "anchor": s.anchor} for s in REGISTRY.values()]


def run_suite(name: str, cfg: RunConfig) -> list:
    """Run one suite with its own RNG stream derived from the seed and the suite name."""
    rng = random.Random(f"{cfg.seed}:{name}")
    return REGISTRY[name].run(cfg, rng)
