import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacuna.kfunctional import (
    CoefficientVector,
    decreasing_rearrangement,
    holmstedt,
    k_exact,
    kappa,
    saturation_time,
    snapped_floor,
)
from oracles import k_grid

entries = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vectors = st.lists(entries, min_size=1, max_size=12).map(np.array)
ts = st.floats(0.01, 20)


def test_single_coordinate_examples():
    assert k_exact([1.0], 2).value == pytest.approx(1.0)
    assert k_exact([1.0], 0.5).value == pytest.approx(0.5)
    assert kappa([1.0], 1.0) == pytest.approx(1.0)
    assert kappa([1.0], 9.0) == pytest.approx(1.0)
    assert kappa([1.0], 0.25) == pytest.approx(0.5)


def test_zero_vector_is_legal():
    r = k_exact([0.0, 0.0], 3)
    assert r.value == 0 and r.threshold == 0
    assert kappa([0.0], 5) == 0


def test_t_one_gives_l2():
    a = np.array([3.0, -4.0, 1.0])
    assert k_exact(a, 1).value == pytest.approx(np.linalg.norm(a), rel=1e-12)


def test_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        k_exact([1.0], 0)
    with pytest.raises(ValueError):
        kappa([1.0], -1)


def test_split_realizes_value():
    a = np.array([2.0, -1.0, 0.5, 0.25])
    r = k_exact(a, 1.7)
    np.testing.assert_allclose(r.l1_part.entries + r.l2_part.entries, a)
    assert r.value == pytest.approx(r.l1_part.l1 + 1.7 * r.l2_part.l2, rel=1e-12)


@given(vectors, ts)
def test_trial_split_bound(a, t):
    v = k_exact(a, t).value
    assert v <= min(np.abs(a).sum(), t * np.linalg.norm(a)) * (1 + 1e-12) + 1e-15


@given(vectors, ts, st.floats(-5, 5))
def test_homogeneity(a, t, c):
    lhs = k_exact(c * a, t).value
    rhs = abs(c) * k_exact(a, t).value
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, rhs)


@given(vectors, ts)
def test_holmstedt_upper(a, t):
    assert k_exact(a, t).value <= holmstedt(a, t) * (1 + 1e-12) + 1e-15


@given(vectors, st.floats(0.01, 5), st.floats(0.01, 5), st.floats(0.01, 5))
def test_monotone_and_concave(a, x, y, z):
    t1, t2, t3 = sorted((x, y, z))
    v1, v2, v3 = (k_exact(a, t).value for t in (t1, t2, t3))
    scale = max(1.0, v3)
    assert v1 <= v2 + 1e-12 * scale and v2 <= v3 + 1e-12 * scale
    if t3 > t1:
        lam = (t2 - t1) / (t3 - t1)
        assert v2 >= (1 - lam) * v1 + lam * v3 - 1e-11 * scale


@given(vectors)
def test_permutation_and_sign_invariance(a):
    rng = np.random.default_rng(0)
    b = rng.permutation(a) * rng.choice([-1, 1], size=a.size)
    assert k_exact(a, 1.3).value == pytest.approx(k_exact(b, 1.3).value, rel=1e-12, abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=2).map(np.array), st.floats(0.05, 3))
def test_matches_grid_oracle(a, t):
    assert abs(k_grid(a, t) - k_exact(a, t).value) <= 2e-3


def test_limits():
    rng = np.random.default_rng(3)
    for _ in range(30):
        a = rng.uniform(-1, 1, int(rng.integers(1, 10)))
        assert kappa(a, 1e-8) <= 1e-3 * np.linalg.norm(a)
        assert kappa(a, 4 * a.size ** 2) == pytest.approx(np.abs(a).sum(), rel=1e-12)


def test_saturation_time_counts_nonzeros():
    a = [1.0, 0.0, -2.0, 0.5]
    assert saturation_time(a) == 3
    assert kappa(a, 3) == pytest.approx(3.5)
    assert kappa(a, 2.9) < 3.5


def test_snapped_floor():
    assert snapped_floor(3.9999999999999) == 4
    assert snapped_floor(3.5) == 3
    assert holmstedt([1.0, 1.0], math.sqrt(2)) == pytest.approx(2.0)


def test_coefficient_vector_validation():
    with pytest.raises(ValueError):
        CoefficientVector([])
    with pytest.raises(ValueError):
        CoefficientVector([float("nan")])
    assert decreasing_rearrangement([1, -3, 2]).entries.tolist() == [3, 2, 1]
