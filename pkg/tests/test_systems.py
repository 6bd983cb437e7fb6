import itertools
import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacuna.errors import PatternMismatch, SizeExceeded, UnsupportedKind
from lacuna.exact import SQRT2, Root2Multiple
from lacuna.steps import StepFunction, product
from lacuna.systems import (
    atoms,
    class_a,
    custom,
    function_step,
    in_class_a,
    is_multiplicative,
    is_strongly_multiplicative,
    lt_norm,
    monomial_expectation,
    parse_system,
    polynomial,
    polynomial_step,
    rademacher,
    sup_norm,
    sup_norm_bracket,
    system_from_json,
    tail_bracket,
    tail_probability,
    tail_table,
    trig_cosine,
    trig_sine,
    walsh,
)
from oracles import moment_brute, rademacher_values, tail_brute, trig_mean_grid


def test_monomial_examples():
    assert monomial_expectation(rademacher(3), (1, 2, 3), (1, 1, 1)) == 0
    assert monomial_expectation(trig_cosine((1, 2, 3)), (1, 2, 3), (1, 1, 1)) == Fr(1, 4)
    assert monomial_expectation(walsh(7), (1, 2, 3), (1, 1, 1)) == 1  # w3 = w1 w2
    with pytest.raises(PatternMismatch):
        monomial_expectation(rademacher(3), (1, 2), (1,))


def test_normalized_trig_is_exact():
    S = trig_sine((1, 3, 9), "sqrt2")
    assert S.second_moment(2) == 1
    v = monomial_expectation(trig_cosine((1, 2, 3), "sqrt2"), (1, 2, 3), (1, 1, 1))
    assert v == Root2Multiple(Fr(1, 2))


@pytest.mark.parametrize("kind,freqs,theta", [
    ("trig-sine", (1, 2, 3), (1, 2, 1)),
    ("trig-cosine", (1, 2, 3), (1, 1, 1)),
    ("trig-sine", (2, 3, 5, 7), (1, 1, 1, 1)),
    ("trig-cosine", (1, 3, 4), (2, 1, 1)),
])
def test_trig_expectation_matches_grid(kind, freqs, theta):
    S = trig_sine(freqs) if kind == "trig-sine" else trig_cosine(freqs)
    exact = float(monomial_expectation(S, range(1, len(freqs) + 1), theta))
    assert exact == pytest.approx(trig_mean_grid(kind, [k for k, e in zip(freqs, theta) for _ in range(e)], 4096), abs=1e-12)


def test_step_expectation_matches_step_products():
    for system in (rademacher(5), walsh(12)):
        for idx in itertools.combinations(range(1, system.size + 1), 3):
            for theta in ((1, 1, 1), (2, 1, 0), (1, 0, 2)):
                f = product([function_step(system, n) for n in idx], theta)
                assert monomial_expectation(system, idx, theta) == f.mean()


def test_patterns():
    pats = list(class_a(3))
    assert all(in_class_a(p) for p in pats)
    assert (2, 2, 1) not in pats and (0, 0, 0) not in pats and (2, 0, 0) not in pats
    assert len(pats) == sum(1 for p in itertools.product((0, 1, 2), repeat=3)
                            if 1 in p and p.count(2) <= 1)
    assert len(list(class_a(3, squares=False))) == 7


def test_strong_multiplicativity():
    assert is_strongly_multiplicative(trig_sine((1, 3, 9), "sqrt2"), (1, 2, 3)).ok
    rep = is_strongly_multiplicative(trig_sine((1, 2, 3)), (1, 2, 3))
    assert not rep.ok and rep.worst_pattern is not None and rep.worst_value != 0
    assert is_strongly_multiplicative(rademacher(6), (2, 4, 5)).ok
    assert not is_multiplicative(walsh(3), (1, 2, 3)).ok


def test_polynomial_step_examples():
    P = polynomial(rademacher(2), (1, 2), [1, 1])
    s = polynomial_step(P)
    assert list(s.values) == [2, 0, 0, -2]
    single = polynomial_step(polynomial(rademacher(3), (2,), [Fr(3, 2)]))
    assert single == function_step(rademacher(3), 2).scale(Fr(3, 2))
    zero = polynomial_step(polynomial(rademacher(2), (1, 2), [0, 0]))
    assert set(zero.values) == {0}
    with pytest.raises(UnsupportedKind):
        polynomial_step(polynomial(trig_sine((1,)), (1,), [1]))
    with pytest.raises(SizeExceeded):
        polynomial_step(polynomial(rademacher(21), range(1, 22), np.ones(21)))


def test_norms_and_tails_examples():
    P = polynomial(rademacher(2), (1, 2), [1, 1])
    assert lt_norm(P, 4) == pytest.approx(8 ** 0.25)
    assert lt_norm(P, 2) == pytest.approx(math.sqrt(2))
    assert tail_probability(P, 1) == 0.5
    assert tail_probability(P, 0) == 0.5
    assert tail_probability(P, 2) == 0
    assert sup_norm(P) == 2


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=8).map(np.array), st.floats(1, 6))
def test_rademacher_norms_match_enumeration(a, t):
    P = polynomial(rademacher(a.size), range(1, a.size + 1), a)
    assert lt_norm(P, t) == pytest.approx(moment_brute(a, t), rel=1e-10, abs=1e-12)
    for z in (0.0, 0.3, 1.0, float(np.abs(a).sum()) / 2):
        assert tail_probability(P, z) == pytest.approx(tail_brute(a, z), abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=7).map(np.array),
       st.lists(st.integers(1, 30), min_size=7, max_size=7, unique=True))
def test_subsystem_distribution_identity(a, picks):
    idx = sorted(picks)[: a.size]
    Pa = tail_table(polynomial(rademacher(30), idx, a))
    Pb = tail_table(polynomial(rademacher(a.size), range(1, a.size + 1), a))
    np.testing.assert_array_equal(Pa.support_points(), Pb.support_points())
    for z in np.concatenate([[0.0], Pb.support_points()]):
        assert Pa(z) == Pb(z)


def test_tail_is_monotone_right_continuous():
    rng = np.random.default_rng(2)
    a = rng.uniform(-1, 1, 6)
    T = tail_table(polynomial(rademacher(6), range(1, 7), a))
    zs = np.linspace(0, np.abs(a).sum() + 0.1, 400)
    vals = [T(z) for z in zs]
    assert all(x >= y for x, y in zip(vals, vals[1:]))
    for p in T.support_points():
        assert T(p) == T(p + 1e-13)
    assert T(0) <= 1


def test_khintchine_band():
    rng = np.random.default_rng(14)
    for p in (1, 3, 4, 8):
        ratios = []
        for _ in range(60):
            m = int(rng.integers(1, 15))
            a = rng.uniform(-1, 1, m)
            ratios.append(lt_norm(polynomial(rademacher(m), range(1, m + 1), a), p) / np.linalg.norm(a))
        assert 0.5 <= min(ratios) and max(ratios) <= math.sqrt(p) + 1


def test_trig_norms_and_tail_brackets():
    P = polynomial(trig_sine((1, 3, 9), "sqrt2"), (1, 2, 3), [1, -0.5, 0.25])
    x = np.arange(1 << 16) / (1 << 16)
    y = np.abs(P.evaluate(x))
    assert lt_norm(P, 2) == pytest.approx(math.sqrt(1 + 0.25 + 0.0625), rel=1e-10)
    assert lt_norm(P, 3) == pytest.approx(np.mean(y ** 3) ** (1 / 3), rel=1e-8)
    lo, hi = tail_bracket(P, 0.8)
    assert hi - lo <= 1e-6 + 1e-12 and lo <= np.mean(y > 0.8) + 1e-4 and np.mean(y > 0.8) <= hi + 1e-4
    slo, shi = sup_norm_bracket(P)
    assert slo <= y.max() + 1e-12 and y.max() <= shi + 1e-12


def test_dyadic_conventions():
    r1 = function_step(rademacher(2), 1)
    assert list(r1.values) == [1, -1]
    w3 = function_step(walsh(3), 3)
    assert w3 == product([function_step(walsh(3), 1), function_step(walsh(3), 2)])
    a = [1.0, 2.0]
    vals, w = atoms(polynomial(rademacher(2), (1, 2), a))
    assert sorted(vals.tolist()) == sorted(rademacher_values(a).tolist())


def test_atoms_weights_sum_to_one():
    vals, w = atoms(polynomial(walsh(8), (1, 3, 5), [1, 2, 3]))
    assert w.sum() == pytest.approx(1)


def test_system_parsing_and_json(tmp_path):
    S = parse_system("trig-sine:1,3,9@sqrt2")
    assert S.freqs == (1, 3, 9) and S.bound == SQRT2
    assert parse_system("trig-cosine:1..4").freqs == (1, 2, 3, 4)
    assert system_from_json(S.to_json()).to_json() == S.to_json()
    f = StepFunction((0, Fr(1, 2), 1), (Fr(1, 2), Fr(-1, 2)))
    C = custom([f], D=1)
    assert C.bound == 1 and system_from_json(C.to_json()).functions == (f,)
    with pytest.raises(ValueError):
        custom([f], D=Fr(1, 4))
    with pytest.raises(ValueError):
        trig_sine((3, 1))
    with pytest.raises(UnsupportedKind):
        parse_system("haar:4")
