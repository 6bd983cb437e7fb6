import random
from fractions import Fraction as Fr

import pytest

from lacuna.errors import BoundViolated, ConditionFailed, IrrationalData
from lacuna.extension import (
    _subset_integrals,
    check_extension_condition,
    extend_multiplicative,
    plan_extension,
    random_condition_set,
    rademacher_block,
    verify_multiplicative,
)
from lacuna.steps import StepFunction, product


def test_single_constant_function():
    g = [StepFunction.constant(Fr(1, 3))]
    assert check_extension_condition(g, 1).ok
    h = extend_multiplicative(g, 1)
    assert h[0].integral() == 0
    assert h[0].length == 2 and h[0].sup_abs() <= 1


def test_condition_failure():
    with pytest.raises(ConditionFailed):
        extend_multiplicative([StepFunction.constant(Fr(1, 2))], 1)
    with pytest.raises(BoundViolated):
        check_extension_condition([StepFunction.constant(2)], 1)


def test_irrational_data():
    with pytest.raises(IrrationalData):
        plan_extension([StepFunction.constant(0.1)], 1)
    with pytest.raises(IrrationalData):
        plan_extension([StepFunction.constant(Fr(1, 10))], "sqrt2")


def test_s_cap():
    g = [StepFunction.constant(0)] * 11
    with pytest.raises(ValueError):
        plan_extension(g, 1)


def test_alpha_closed_form():
    rng = random.Random(2)
    for _ in range(10):
        g = random_condition_set(rng, rng.randint(1, 4))
        plan = plan_extension(g, 1)
        ints = _subset_integrals(g, 1)
        for st in plan.stages:
            mask = sum(1 << (i - 1) for i in st.support)
            assert plan.v(st.k) + ints[mask] == 0
            assert st.left < st.alpha < st.right


def test_interval_map_is_binary_order():
    plan = plan_extension([StepFunction.constant(0)] * 3, 1)
    m = plan.interval_map
    assert m[(0, 0, 1)] == 1 and m[(1, 0, 0)] == 4 and m[(1, 1, 1)] == 7


@pytest.mark.parametrize("seed", range(8))
def test_conclusions(seed):
    rng = random.Random(seed)
    s = rng.randint(1, 5)
    D = Fr(rng.randint(1, 4), rng.randint(1, 3))
    g = random_condition_set(rng, s, D)
    h = extend_multiplicative(g, D)
    assert verify_multiplicative(h).ok
    for hi, gi in zip(h, g):
        assert hi.sup_abs() <= D
        r = hi.restrict(0, 1)
        assert (r.breakpoints, r.values) == (gi.breakpoints, gi.values)
    compressed = [f.dilate(2) for f in h]
    assert verify_multiplicative(compressed).ok
    # zero test is scale free, so products over [0,2] also vanish under dx/2
    for mask in range(1, 1 << s):
        assert product([h[i] for i in range(s) if mask >> i & 1]).integral() == 0


def test_verify_detects_failure():
    r = StepFunction.uniform([1, -1])
    rep = verify_multiplicative([r, r])
    assert not rep.ok and rep.worst_subset == (1, 2) and rep.checked == 3


def test_rademacher_block():
    bps, rows = rademacher_block(2, Fr(1), Fr(2))
    assert bps == [1, Fr(5, 4), Fr(3, 2), Fr(7, 4), 2]
    assert rows == [[1, 1, -1, -1], [1, -1, 1, -1]]


def test_plan_json():
    plan = plan_extension([StepFunction.constant(0)] * 2, 1)
    js = plan.to_json()
    assert js["s"] == 2 and len(js["stages"]) == 3
