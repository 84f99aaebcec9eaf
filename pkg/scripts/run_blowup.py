#!/usr/bin/env python3
"""Monte Carlo demonstration of the two blow-up weight regimes.

tail_bounded: the union bound on the probability of any mode firing before
epsilon is summable, so the empirical firing fraction stays below it.
divergent: every mode keeps a k-independent chance of firing before its own
shrinking horizon eps_k, so the expected count grows without bound in K_max.
"""

import argparse

from roughstart.blowup import BlowupWeightSpec, trichotomy_mc


def run(args):
    tb = BlowupWeightSpec(regime="tail_bounded", K_max=args.K_max, lam=args.lam,
                          epsilon=args.epsilon, seed=args.seed)
    rep = trichotomy_mc(tb, args.samples, [args.epsilon / 2, args.epsilon])
    print("tail_bounded regime")
    for eps, frac in rep["fraction_before"].items():
        print(f"  P[min tau <= {eps:g}] = {frac:.4f}")
    print(f"  analytic union bound = {rep['tail_bound']:.4f}")

    dv = BlowupWeightSpec(regime="divergent", K_max=args.K_max, seed=args.seed)
    rep = trichotomy_mc(dv, args.samples, [args.epsilon])
    print("divergent regime")
    print(f"  mean #modes firing before their own eps_k = "
          f"{rep['own_eps_count_mean']:.4f} +/- {rep['own_eps_count_se']:.4f}")
    print(f"  analytic mean = {rep['own_eps_count_analytic']:.4f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--K-max", type=int, default=1000)
    p.add_argument("--lam", type=float, default=2.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    run(p.parse_args())
