"""Rademacher against a ratio-3 sine system: measured C_hat per family size.

Usage: python3 scripts/equivalence_ratio3.py [--m 6] [--count 50]
"""
import argparse
import time

from lacuna.equivalence import distribution_compare, make_family
from lacuna.systems import rademacher, trig_sine


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=6)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=8)
    args = ap.parse_args()
    S = trig_sine([3 ** k for k in range(args.m)], "sqrt2")
    fam = make_family(args.m, args.count, seed=args.seed)
    for size in sorted({max(1, args.count // 5), args.count // 2, args.count}):
        start = time.perf_counter()
        rep = distribution_compare(rademacher(args.m), S, range(1, args.m + 1),
                                   range(1, args.m + 1), fam[:size])
        w = rep.witnesses[0] if rep.witnesses else None
        where = f" at z={w.z:.4f} ({w.side})" if w else ""
        print(f"family {size:3d}: C_hat={rep.C_hat:.4f}{where} {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
