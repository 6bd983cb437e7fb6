"""Partition-norm sandwich and Holmstedt ratio over a seeded random corpus.

Usage: python3 scripts/sandwich_sweep.py [--count 1000] [--seed 20240601]
"""
import argparse
import math
import time

import numpy as np

from lacuna.kfunctional import holmstedt, k_exact
from lacuna.qnorm import q_norm_all


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    start = time.perf_counter()
    worst_low = worst_up = 0.0
    ratio = 1.0
    for _ in range(args.count):
        a = rng.uniform(-1, 1, int(rng.integers(1, 13)))
        q = q_norm_all(a)
        for t2 in range(1, a.size + 1):
            k = k_exact(a, math.sqrt(t2)).value
            worst_low = max(worst_low, q[t2 - 1] - k)
            worst_up = max(worst_up, k - math.sqrt(2) * q[t2 - 1])
            ratio = max(ratio, holmstedt(a, math.sqrt(t2)) / k)
    print(f"vectors            {args.count}")
    print(f"max Q - K          {worst_low:.3e}  (violation only above 1e-9)")
    print(f"max K - sqrt2 Q    {worst_up:.3e}  (violation only above 1e-9)")
    print(f"max Holmstedt/K    {ratio:.6f}")
    print(f"seconds            {time.perf_counter() - start:.1f}")


if __name__ == "__main__":
    main()
