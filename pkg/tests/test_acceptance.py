"""Acceptance criteria 1-9.  Each test records a PASS/FAIL line printed at session end."""
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import record
from oracles import k_grid
from lacuna.equivalence import default_z_grid, distribution_compare, make_family
from lacuna.errors import NotFound
from lacuna.exact import SQRT2
from lacuna.extension import (
    check_extension_condition,
    extend_multiplicative,
    random_condition_set,
    verify_multiplicative,
)
from lacuna.kfunctional import k_exact
from lacuna.selection import (
    EpsilonSchedule,
    balanced_partition,
    block_weights,
    kashin_condition_sum,
    kashin_select,
    riesz_dual_norm,
    riesz_lower_certificate,
    verify_kashin_certificate,
)
from lacuna.systems import polynomial, rademacher, tail_table, trig_cosine, trig_sine, walsh
from lacuna.tails import build_envelope


def test_criterion_1_partition_sandwich(sandwich_sweep):
    s = sandwich_sweep
    ok = s["lower_bad"] == 0 and s["upper_bad"] == 0 and s["seconds"] < 120
    record(1, ok, f"{s['checks']} checks, lower violations {s['lower_bad']}, "
                  f"upper violations {s['upper_bad']}, {s['seconds']:.1f}s")
    assert s["lower_bad"] == 0
    assert s["upper_bad"] == 0
    assert s["seconds"] < 120


def test_criterion_2_holmstedt(sandwich_sweep):
    s = sandwich_sweep
    ok = s["holm_bad"] == 0 and s["alpha"] <= 4
    record(2, ok, f"K <= H violations {s['holm_bad']}, measured max H/K = {s['alpha']:.6f}")
    assert s["holm_bad"] == 0
    assert s["alpha"] <= 4


def test_criterion_3_hitczenko_band(hitczenko_band):
    b = hitczenko_band
    spread = b["c_upper"] / b["c_lower"]
    ok = spread <= 10 and b["seconds"] < 300
    record(3, ok, f"band [{b['c_lower']:.4f}, {b['c_upper']:.4f}], c2/c1 = {spread:.3f}, "
                  f"beta' = {b['beta']:.4f}, {b['seconds']:.1f}s")
    assert math.isfinite(spread) and spread <= 10
    assert b["seconds"] < 300


def test_criterion_4_tail_envelope(measured_alpha, beta_prime):
    rng = np.random.default_rng(4)
    beta = beta_prime  # the system under test is the Rademacher system itself
    violations = cutoff_bad = chain_flags = points = 0
    for _ in range(60):
        m = int(rng.integers(1, 13))
        a = rng.uniform(-1, 1, m)
        if not np.any(a):
            a[0] = 1.0
        env = build_envelope(a, beta, measured_alpha, beta_prime)
        tail = tail_table(polynomial(rademacher(m), range(1, m + 1), a))
        zs = default_z_grid(env.a)
        for z in zs:
            ex = float(tail(z))
            points += 1
            if not (env.lower(z) <= ex <= env.upper(z)):
                violations += 1
            ch = env.chain(z)
            chain_flags += not (ch.kappa_ok and ch.f_ok)
        for z in (env.upper_cutoff, env.upper_cutoff * 1.5, env.upper_cutoff * 10):
            points += 1
            cutoff_bad += float(tail(z)) != 0.0 or env.upper(z) != 0.0
    ok = violations == 0 and cutoff_bad == 0
    record(4, ok, f"{points} points, envelope violations {violations}, cutoff violations "
                  f"{cutoff_bad}, chain flags {chain_flags} (reported), beta = {beta:.4f}, "
                  f"alpha = {measured_alpha:.4f}")
    assert violations == 0
    assert cutoff_bad == 0


def test_criterion_5_extension():
    rng = random.Random(5)
    start = time.perf_counter()
    failures = []
    for k in range(100):
        s = rng.randint(1, 6)
        g = random_condition_set(rng, s)
        assert check_extension_condition(g, 1).ok
        h = extend_multiplicative(g, 1)
        ver = verify_multiplicative(h)
        if not ver.ok:
            failures.append((k, "subset product", ver.worst_subset))
        if ver.checked != 2 ** s - 1:
            failures.append((k, "subset count", ver.checked))
        if any(f.sup_abs() > 1 for f in h):
            failures.append((k, "sup norm"))
        for hi, gi in zip(h, g):
            r = hi.restrict(0, 1)
            if r.breakpoints != gi.breakpoints or r.values != gi.values:
                failures.append((k, "restriction"))
    secs = time.perf_counter() - start
    ok = not failures and secs < 60
    record(5, ok, f"100 sets, failures {len(failures)}, {secs:.1f}s")
    assert not failures
    assert secs < 60


@pytest.fixture(scope="module")
def kashin_results():
    out = {}
    out["walsh"] = kashin_select(walsh(256), 256, 8, 1, budget=100_000, seed=0)
    out["rademacher"] = kashin_select(rademacher(64), 64, 6, 1, budget=100_000, seed=0)
    try:
        out["trig"] = kashin_select(trig_cosine(range(1, 129), "sqrt2"), 128, 5, SQRT2,
                                    budget=100_000, seed=0)
    except NotFound as exc:
        out["trig"] = exc.best
    return out


def test_criterion_6_kashin(kashin_results):
    w, r, tc = kashin_results["walsh"], kashin_results["rademacher"], kashin_results["trig"]
    w_ok = Fraction(w.condition_sum) == 0 and verify_kashin_certificate(w)
    r_ok = Fraction(r.condition_sum) == 0 and verify_kashin_certificate(r)
    if tc.status == "Success":
        t_ok = Fraction(tc.condition_sum) <= Fraction(1, 10 ** 5) and verify_kashin_certificate(tc)
    else:
        t_ok = tc.status == "NotFound" and tc.condition_sum is not None
    # independent recomputation of each sum
    again = [kashin_condition_sum(walsh(256), w.indices, 1),
             kashin_condition_sum(rademacher(64), r.indices, 1),
             kashin_condition_sum(trig_cosine(range(1, 129), "sqrt2"), tc.indices, SQRT2)]
    same = again == [Fraction(c.condition_sum) for c in (w, r, tc)]
    ok = w_ok and r_ok and t_ok and same
    record(6, ok, f"walsh {w.indices} sum {w.condition_sum}; rademacher {r.indices} sum "
                  f"{r.condition_sum}; trig-cosine {tc.status} {tc.indices} sum {tc.condition_sum}")
    assert w_ok and r_ok and t_ok and same


def test_criterion_7_riesz(kashin_results):
    rng = np.random.default_rng(7)
    lower_fail, L_values = [], []
    certified = [(walsh(256), kashin_results["walsh"].indices),
                 (rademacher(64), kashin_results["rademacher"].indices)]
    for system, idx in certified:
        s = len(idx)
        sched = EpsilonSchedule.geometric(s, 1)
        assert not sched.violations(1)
        for _ in range(5):
            a = rng.uniform(-1, 1, s)
            for t in (1, 2, 3):
                part = balanced_partition(s, t)
                cert = riesz_lower_certificate(system, idx, a, part, 1)
                if not cert.holds:
                    lower_fail.append((system.kind, t, cert.I_N, cert.lower_target))
            part = balanced_partition(s, 3)
            rep = riesz_dual_norm(system, idx, block_weights(a, part, 1), 3, part, 1)
            L_values.append(rep.L_N)
    worst_L = max(L_values)
    ok = not lower_fail and worst_L < 2
    record(7, ok, f"lower certificate failures {len(lower_fail)}; exact L_N range "
                  f"[{min(L_values):.4f}, {worst_L:.4f}] against the required < 2")
    assert not lower_fail
    assert worst_L < 2


def test_criterion_8_equivalence():
    R = rademacher(12)
    fam = make_family(3, 50, seed=8)
    same = distribution_compare(R, R, [4, 7, 9], [1, 2, 3], fam)
    S = trig_sine([3 ** k for k in range(6)], "sqrt2")
    fam6 = make_family(6, 50, seed=8)
    rep = distribution_compare(rademacher(6), S, range(1, 7), range(1, 7), fam6)
    ok = same.C_hat == 1.0 and math.isfinite(rep.C_hat) and rep.C_hat <= 20
    record(8, ok, f"subsystem C_hat = {same.C_hat!r}; Rademacher vs ratio-3 sine "
                  f"C_hat = {rep.C_hat:.4f} (lower bound)")
    assert same.C_hat == 1.0
    assert rep.C_hat <= 20


def test_criterion_9_k_oracle():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 4))
        a = rng.uniform(-1, 1, n)
        t = float(rng.uniform(0.05, 3.0))
        worst = max(worst, abs(k_grid(a, t) - k_exact(a, t).value))
    prop_bad = 0
    ts = np.linspace(0.05, 6.0, 40)
    for _ in range(100):
        n = int(rng.integers(1, 13))
        a = rng.uniform(-1, 1, n)
        c = float(rng.uniform(-5, 5))
        vals = np.array([k_exact(a, t).value for t in ts])
        scale = max(1.0, float(np.max(vals)))
        for t in ts[::7]:
            lhs = k_exact(c * a, t).value
            rhs = abs(c) * k_exact(a, t).value
            prop_bad += abs(lhs - rhs) > 1e-12 * max(1.0, abs(rhs))
        prop_bad += int(np.sum(np.diff(vals) < -1e-12 * scale))
        # concavity at equally spaced t
        second = vals[:-2] - 2 * vals[1:-1] + vals[2:]
        prop_bad += int(np.sum(second > 1e-12 * scale))
    ok = worst <= 2e-3 and prop_bad == 0
    record(9, ok, f"max |k_exact - grid| = {worst:.2e} over 200 instances; property violations {prop_bad}")
    assert worst <= 2e-3
    assert prop_bad == 0
