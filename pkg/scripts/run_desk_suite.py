"""Run every suite at desk scale over a few (m, k, N_chi) profiles and print a summary table.

usage: python3 scripts/run_desk_suite.py [--samples N] [--seed S]
"""
import argparse
import time

from ugamma.characters import BudgetExceeded
from ugamma.config import SUITE_NAMES, RunConfig
from ugamma.suites import run_suite

PROFILES = [(1, 0, 2), (1, 1, 3), (2, 0, 2), (2, 1, 2)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'m':>2} {'k':>2} {'N':>2}  {'suite':<20} {'pass':>5} {'fail':>5} {'sec':>6}")
    for m, k, N in PROFILES:
        cfg = RunConfig(m=m, k=k, N_chi=N, samples=args.samples, seed=args.seed, budget=10**7)
        for name in SUITE_NAMES:
            t0 = time.time()
            try:
                recs = run_suite(name, cfg)
            except BudgetExceeded as e:
                print(f"{m:>2} {k:>2} {N:>2}  {name:<20} budget: {e}")
                continue
            ok = sum(r["status"] == "pass" for r in recs)
            print(f"{m:>2} {k:>2} {N:>2}  {name:<20} {ok:>5} {len(recs) - ok:>5} {time.time() - t0:>6.1f}")


if __name__ == "__main__":
    main()
