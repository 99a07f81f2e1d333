"""Print inner vanishing sums that are nonzero although every checked hypothesis holds.

usage: python3 scripts/vanishing_counterexample.py [--N 2 3 7]
"""
import argparse
from fractions import Fraction

from ugamma.characters import character_from_wild
from ugamma.gammasum import GammaInstance, inner_vanishing_sum, x_classes
from ugamma.localfield import ExtensionContext
from ugamma.matrixalg import MatrixE
from ugamma.unitary import FormContext

P = 3
UNR = ExtensionContext.unramified(P)


def instance(m, k, N):
    return GammaInstance(FormContext(UNR, m, k), character_from_wild(UNR, N, UNR.elem(Fraction(1, P**N))), budget=10**8)


def show(label, inst, a, b, X, L):
    r = inner_vanishing_sum(inst, a, b, X, L)
    print(f"{label}: X={X.to_strings()} a={a} b={b} L={L}")
    print(f"  hypotheses {r.hypotheses}")
    print(f"  sum = {r.sum.to_json()['terms']} over {r.size} cosets")


def m1_counts(N, k):
    inst = instance(1, k, N)
    w = inst.wild
    q = Fraction(inst.q)
    for L in (-1, 0, 1, 2):
        a, b = w.a, w.b
        while L != 0 and a.abs() <= q ** (inst.n_chi + 1) / UNR.abs_two:
            a, b = a * Fraction(1, P), b * Fraction(1, P)
        results = [inner_vanishing_sum(inst, a, b, X, L) for X in x_classes(inst, a, L)]
        nz = sum(not r.is_zero for r in results)
        print(f"m=1 k={k} N_chi={N} L={L:>2}: {len(results):>5} classes, {nz:>3} nonzero"
              f" (stability threshold met: {inst.stability_claimed})")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, nargs="*", default=[2, 3])
    args = ap.parse_args()
    inst = instance(2, 0, 2)
    X = MatrixE.parse(UNR, [["22*w", "20+10*w"], ["-20+10*w", "12*w"]])
    show("m=2, T=I", inst, inst.wild.a, inst.wild.b, X, 0)
    inst = instance(1, 0, 2)
    show("m=1", inst, UNR.elem(Fraction(1, 9)), UNR.elem(Fraction(-1, 9)), MatrixE(UNR, [[UNR.elem(0, 2)]]), 0)
    for N in args.N:
        for k in (0, 1):
            m1_counts(N, k)


if __name__ == "__main__":
    main()
