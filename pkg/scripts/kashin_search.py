"""Pattern-sum subset search on Walsh, Rademacher and cosine systems.

Usage: python3 scripts/kashin_search.py [--seed 0]
"""
import argparse
import time

from lacuna.errors import NotFound
from lacuna.exact import SQRT2
from lacuna.selection import kashin_select, verify_kashin_certificate
from lacuna.systems import rademacher, trig_cosine, walsh


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    jobs = [
        ("walsh N=256 s=8", walsh(256), 256, 8, 1, 100_000),
        ("rademacher N=64 s=6", rademacher(64), 64, 6, 1, 100_000),
        ("cosine 1..128 s=5", trig_cosine(range(1, 129), "sqrt2"), 128, 5, SQRT2, 100_000),
        # dense frequencies: the budget, not the threshold, ends this one
        ("cosine 1..24 s=6", trig_cosine(range(1, 25), "sqrt2"), 24, 6, SQRT2, 300),
    ]
    for name, system, N, s, D, budget in jobs:
        start = time.perf_counter()
        try:
            cert = kashin_select(system, N, s, D, budget=budget, seed=args.seed)
        except NotFound as exc:
            cert = exc.best
        ok = cert.status == "Success" and verify_kashin_certificate(cert)
        print(f"{name:<22} {cert.status:<9} {cert.indices} sum={cert.condition_sum} "
              f"evals={cert.search_stats['evaluations']} verified={ok} "
              f"{time.perf_counter() - start:.2f}s", flush=True)


if __name__ == "__main__":
    main()
