"""Exact E R^{t'} for block-normalized Riesz products against the value 2.

The degree-zero part of the expansion contributes ((t-1)/(t-2))^t, which is
8 at t = 3, so independent systems land well above 2.

Usage: python3 scripts/riesz_dual_norm.py
"""
import numpy as np

from lacuna.selection import balanced_partition, block_weights, riesz_dual_norm
from lacuna.systems import rademacher


def main():
    rng = np.random.default_rng(7)
    print("  s   t      L_N   leading  perturbation")
    for s in (1, 2, 3, 4, 6, 8, 10):
        for t in (3, 4, 6):
            a = rng.uniform(-1, 1, s)
            part = balanced_partition(s, t)
            rep = riesz_dual_norm(rademacher(s), range(1, s + 1), block_weights(a, part, 1), t, part, 1)
            print(f"{s:3d} {t:3d} {rep.L_N:8.4f} {rep.leading:9.4f} {rep.perturbation:13.4f}")


if __name__ == "__main__":
    main()
