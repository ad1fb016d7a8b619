"""Print the expected-iteration and product tables as markdown."""

import argparse

from infraperiod.planner import c_constant_lower, iteration_tables, product_tables


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=10)
    args = ap.parse_args()
    print("| n | ours (1/bound) | competitor (1/bound) | log10 ratio |")
    print("|---|---|---|---|")
    for r in iteration_tables(args.n_max):
        print(f"| {r['n']} | {r['ours']} | {r['competitor']} | {r['ratio_log10']} |")
    print()
    print("| n | prod(1 - 2^-i) | prod 1/zeta(i) |")
    print("|---|---|---|")
    for r in product_tables(6):
        print(f"| {r['n']} | {r['span_product']:.4f} | {r['zeta_product']:.4f} |")
    print(f"\nc >= {float(c_constant_lower()):.7f}")


if __name__ == "__main__":
    main()
