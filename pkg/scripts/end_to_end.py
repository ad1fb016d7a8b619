"""Run the one-dimensional pipeline and print the per-factor audit and error histogram."""

import argparse
from fractions import Fraction

import numpy as np

from infraperiod.experiments import pipeline_setup
from infraperiod.pipeline import end_to_end, observed_errors


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--attempts", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--gamma", type=Fraction, default=Fraction(10))
    args = ap.parse_args()
    infra, inp, p = pipeline_setup(args.gamma)
    print(f"N={p.N} q={p.q} L={p.L} kappa={p.kappa}")
    res = end_to_end(infra, inp, p, args.attempts, args.seed)
    print(f"successes: {res.successes}/{args.attempts} within gamma={args.gamma}")
    for a in res.audit:
        print(f"  {a.name:<10} {a.successes}/{a.trials} = {a.observed:.4f}  bound {float(a.bound):.4f}  "
              f"{'ok' if a.ok else 'below'}")
    errs = observed_errors(res)
    if errs.size:
        print("error quantiles (0, 50, 90, 100%):", np.quantile(errs, [0, 0.5, 0.9, 1]).round(6))


if __name__ == "__main__":
    main()
