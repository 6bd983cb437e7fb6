import math
import time

import numpy as np
import pytest

from lacuna.kfunctional import holmstedt, k_exact
from lacuna.qnorm import q_norm_all
from lacuna.selection import moment_band
from lacuna.systems import rademacher

ACCEPTANCE: dict = {}


def record(number: int, ok: bool, detail: str):
    ACCEPTANCE[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"Criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def sandwich_corpus():
    """1000 seeded vectors, n <= 12, entries uniform in [-1, 1]."""
    rng = np.random.default_rng(20240601)
    out = []
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        out.append(rng.uniform(-1.0, 1.0, n))
    return out


@pytest.fixture(scope="session")
def sandwich_sweep(sandwich_corpus):
    """Partition-norm sandwich and Holmstedt ratios over the corpus, with timing."""
    start = time.perf_counter()
    lower_bad = upper_bad = holm_bad = 0
    max_ratio = 1.0
    checks = 0
    for a in sandwich_corpus:
        q = q_norm_all(a)
        for t2 in range(1, a.size + 1):
            t = math.sqrt(t2)
            k = k_exact(a, t).value
            qv = q[t2 - 1]
            checks += 1
            lower_bad += not (qv <= k + 1e-9)
            upper_bad += not (k <= math.sqrt(2) * qv + 1e-9)
            h = holmstedt(a, t)
            holm_bad += not (k <= h * (1 + 1e-12) + 1e-15)
            if k > 0:
                max_ratio = max(max_ratio, h / k)
    return {
        "checks": checks,
        "lower_bad": lower_bad,
        "upper_bad": upper_bad,
        "holm_bad": holm_bad,
        "alpha": max_ratio,
        "seconds": time.perf_counter() - start,
    }


@pytest.fixture(scope="session")
def measured_alpha(sandwich_sweep):
    return sandwich_sweep["alpha"]


HITCZENKO_T = (1, 2, 4, 8, 16, 32)


@pytest.fixture(scope="session")
def hitczenko_band():
    """Rademacher moment band over 200 seeded vectors with m <= 14."""
    rng = np.random.default_rng(77)
    start = time.perf_counter()
    fam_by_m: dict = {}
    for _ in range(200):
        m = int(rng.integers(1, 15))
        a = rng.uniform(-1.0, 1.0, m)
        if not np.any(a):
            a[0] = 1.0
        fam_by_m.setdefault(m, []).append(a)
    lo, hi = math.inf, 0.0
    for m, fam in sorted(fam_by_m.items()):
        band = moment_band(rademacher(m), range(1, m + 1), fam, HITCZENKO_T)
        lo, hi = min(lo, band.c_lower), max(hi, band.c_upper)
    return {"c_lower": lo, "c_upper": hi, "beta": max(hi, 1 / lo),
            "seconds": time.perf_counter() - start}


@pytest.fixture(scope="session")
def beta_prime(hitczenko_band):
    return hitczenko_band["beta"]
