"""Extend random nearly multiplicative sets and verify the three conclusions.

Usage: python3 scripts/extension_random.py [--count 100] [--seed 5]
"""
import argparse
import random
import time

from lacuna.extension import extend_multiplicative, random_condition_set, verify_multiplicative


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--max-s", type=int, default=6)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    start = time.perf_counter()
    bad = 0
    pieces = 0
    for _ in range(args.count):
        g = random_condition_set(rng, rng.randint(1, args.max_s))
        h = extend_multiplicative(g, 1)
        ok = verify_multiplicative(h).ok and all(f.sup_abs() <= 1 for f in h)
        ok = ok and all(hi.restrict(0, 1) == gi for hi, gi in zip(h, g))
        bad += not ok
        pieces = max(pieces, max(len(f.values) for f in h))
    print(f"sets {args.count}, failures {bad}, largest piece count {pieces}, "
          f"{time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
