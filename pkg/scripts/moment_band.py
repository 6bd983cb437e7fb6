"""Measured band |P|_t / kappa(t, a) for Rademacher and lacunary sine systems.

Usage: python3 scripts/moment_band.py
"""
import numpy as np

from lacuna.equivalence import make_family
from lacuna.selection import moment_band
from lacuna.systems import rademacher, trig_sine

T_GRID = (1, 2, 4, 8, 16, 32)


def report(name, system, m, fam):
    band = moment_band(system, range(1, m + 1), fam, T_GRID)
    print(f"{name:<28} c1={band.c_lower:.4f} c2={band.c_upper:.4f} "
          f"c2/c1={band.c_upper / band.c_lower:.3f} beta={band.beta:.4f}")


def main():
    rng = np.random.default_rng(77)
    for m in (4, 8, 14):
        fam = [rng.uniform(-1, 1, m) for _ in range(60)]
        report(f"rademacher m={m}", rademacher(m), m, fam)
    fam = make_family(5, 30, seed=1)
    report("sine 3^k, m=5", trig_sine([3 ** k for k in range(5)], "sqrt2"), 5, fam)


if __name__ == "__main__":
    main()
