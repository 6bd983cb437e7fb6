"""Extending a nearly multiplicative set on [0,1] to a multiplicative set on [0,2].

[1,2) is cut into 2^s dyadic intervals.  Each nonzero 0/1 pattern theta owns
one interval, on which the functions in the support of theta are arranged so
that their product integrates to exactly minus the product integral over
[0,1], while every other subset product integrates to zero there.  The last
interval carries zeros.

Zero tests use plain Lebesgue integrals; the scale of the measure does not
affect them.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import BoundViolated, ConditionFailed, IrrationalData
from .exact import to_exact
from .steps import StepFunction, common_refinement

MAX_S = 10


def _subset_integrals(funcs: Sequence[StepFunction], scale=1):
    """Integral of prod_{i in mask} (f_i / scale) for every mask >= 1 (bit i <-> f_i)."""
    merged, table = common_refinement(list(funcs))
    widths = [b - a for a, b in zip(merged, merged[1:])]
    s = len(funcs)
    if scale != 1:
        table = [[v / scale for v in row] for row in table]
    prods = [None] * (1 << s)
    prods[0] = [Fraction(1)] * len(widths)
    out = {}
    for mask in range(1, 1 << s):
        low = (mask & -mask).bit_length() - 1
        prev = prods[mask & (mask - 1)]
        cur = [p * v for p, v in zip(prev, table[low])]
        prods[mask] = cur
        out[mask] = sum((w * v for w, v in zip(widths, cur)), Fraction(0))
    return out


def _mask_to_theta(mask: int, s: int) -> tuple:
    return tuple((mask >> i) & 1 for i in range(s))


def _theta_key(theta) -> int:
    """Binary number with theta_1 as the most significant digit."""
    k = 0
    for e in theta:
        k = 2 * k + e
    return k


@dataclass(frozen=True)
class ConditionReport:
    max_abs: Fraction
    ok: bool
    worst_pattern: tuple | None
    threshold: Fraction


def _require_bound(g, D):
    for i, f in enumerate(g, 1):
        if f.sup_abs() > D:
            raise BoundViolated(f"|g_{i}| exceeds D")


def _require_unit_domain(g):
    for f in g:
        if f.length != 1:
            raise ValueError("inputs must live on [0,1]")


def check_extension_condition(g: Sequence[StepFunction], D) -> ConditionReport:
    """max over 0/1 patterns of |E prod (g_i/D)^theta_i|, strictly below 2^-s for ok."""
    if not g:
        raise ValueError("need at least one function")
    _require_unit_domain(g)
    D = to_exact(D)
    _require_bound(g, D)
    s = len(g)
    ints = _subset_integrals(g, D)
    worst_mask = max(ints, key=lambda m: (abs(ints[m]), -m))
    worst = abs(ints[worst_mask])
    thr = Fraction(1, 2 ** s)
    return ConditionReport(max_abs=worst, ok=worst < thr,
                           worst_pattern=_mask_to_theta(worst_mask, s) if worst else None,
                           threshold=thr)


def rademacher_block(count: int, lo: Fraction, hi: Fraction):
    """``count`` Rademacher functions rescaled to [lo, hi): breakpoints and value rows."""
    n = 1 << count
    bps = [lo + (hi - lo) * Fraction(j, n) for j in range(n + 1)]
    rows = []
    for r in range(1, count + 1):
        rows.append([Fraction(1 - 2 * ((j >> (count - r)) & 1)) for j in range(n)])
    return bps, rows


@dataclass(frozen=True)
class IntervalStage:
    k: int
    theta: tuple
    support: tuple  # 1-based
    left: Fraction
    alpha: Fraction
    right: Fraction
    target: Fraction  # E of the normalized support product on [0,1]


@dataclass(frozen=True)
class ExtensionPlan:
    s: int
    D: Fraction
    stages: tuple

    @property
    def interval_map(self):
        return {st.theta: st.k for st in self.stages}

    @property
    def alphas(self):
        return [st.alpha for st in self.stages]

    def v(self, k: int) -> Fraction:
        st = self.stages[k - 1]
        return 2 * st.alpha - st.left - st.right

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "D": str(self.D),
            "stages": [{"k": st.k, "theta": list(st.theta), "support": list(st.support),
                        "interval": [str(st.left), str(st.right)], "alpha": str(st.alpha),
                        "target": str(st.target)} for st in self.stages],
        }


def _rational_inputs(g, D):
    if not isinstance(D, Fraction):
        raise IrrationalData("D must be rational")
    for f in g:
        if not f.is_exact:
            raise IrrationalData("step values must be exact rationals")


def plan_extension(g: Sequence[StepFunction], D) -> ExtensionPlan:
    s = len(g)
    if s > MAX_S:
        raise ValueError(f"s is capped at {MAX_S}")
    D = to_exact(D)
    _rational_inputs(g, D)
    rep = check_extension_condition(g, D)
    if not rep.ok:
        raise ConditionFailed(f"max pattern expectation {rep.max_abs} is not below 2^-{s}")
    ints = _subset_integrals(g, D)
    width = Fraction(1, 2 ** s)
    stages = []
    thetas = sorted((_mask_to_theta(m, s) for m in range(1, 1 << s)), key=_theta_key)
    for k, theta in enumerate(thetas, 1):
        mask = sum(1 << i for i, e in enumerate(theta) if e)
        left, right = 1 + (k - 1) * width, 1 + k * width
        target = ints[mask]
        alpha = (left + right) / 2 - target / 2
        support = tuple(i + 1 for i, e in enumerate(theta) if e)
        stages.append(IntervalStage(k, theta, support, left, alpha, right, target))
    return ExtensionPlan(s, D, tuple(stages))


def _stage_pieces(stage: IntervalStage, s: int, D: Fraction):
    """Breakpoints on [left, right] and per-function values on each piece."""
    m = len(stage.support)
    vals = {i: [] for i in range(1, s + 1)}
    if m == 1:
        bps = [stage.left, stage.alpha, stage.right]
        for i in vals:
            vals[i] = [D, -D] if i == stage.support[0] else [Fraction(0)] * 2
        return bps, vals
    lb, lrows = rademacher_block(m - 1, stage.left, stage.alpha)
    rb, rrows = rademacher_block(m - 1, stage.alpha, stage.right)
    bps = lb + rb[1:]
    n = len(lb) - 1
    prod_l = [Fraction(1)] * n
    prod_r = [Fraction(1)] * n
    for row_l, row_r in zip(lrows, rrows):
        prod_l = [p * v for p, v in zip(prod_l, row_l)]
        prod_r = [p * v for p, v in zip(prod_r, row_r)]
    for i in vals:
        if i not in stage.support:
            vals[i] = [Fraction(0)] * (2 * n)
    for j, i in enumerate(stage.support[:-1]):
        vals[i] = [D * v for v in lrows[j]] + [D * v for v in rrows[j]]
    vals[stage.support[-1]] = [D * v for v in prod_l] + [-D * v for v in prod_r]
    return bps, vals


def extend_with_plan(g: Sequence[StepFunction], plan: ExtensionPlan) -> list[StepFunction]:
    s, D = plan.s, plan.D
    tail_bps = [Fraction(1)]
    tail_vals = {i: [] for i in range(1, s + 1)}
    for st in plan.stages:
        bps, vals = _stage_pieces(st, s, D)
        tail_bps.extend(bps[1:])
        for i in tail_vals:
            tail_vals[i].extend(vals[i])
    # last dyadic interval: zero
    tail_bps.append(Fraction(2))
    for i in tail_vals:
        tail_vals[i].append(Fraction(0))
    out = []
    for i, f in enumerate(g, 1):
        bps = tuple(f.breakpoints) + tuple(tail_bps[1:])
        out.append(StepFunction(bps, tuple(f.values) + tuple(tail_vals[i])))
    return out


def extend_multiplicative(g: Sequence[StepFunction], D) -> list[StepFunction]:
    """Multiplicative h_1..h_s on [0,2] with h_i = g_i on [0,1] and |h_i| <= D."""
    return extend_with_plan(g, plan_extension(g, D))


@dataclass(frozen=True)
class MultiplicativeReport:
    ok: bool
    worst_subset: tuple | None
    worst_value: Fraction
    checked: int


def verify_multiplicative(h: Sequence[StepFunction]) -> MultiplicativeReport:
    """Every nonempty subset product must integrate to exactly zero."""
    if not h:
        raise ValueError("need at least one function")
    ints = _subset_integrals(h)
    worst_mask = max(ints, key=lambda m: (abs(ints[m]), -m))
    val = ints[worst_mask]
    subset = tuple(i + 1 for i in range(len(h)) if worst_mask >> i & 1) if val else None
    return MultiplicativeReport(ok=not val, worst_subset=subset, worst_value=val,
                                checked=len(ints))


def random_condition_set(rng, s: int, D=Fraction(1)) -> list[StepFunction]:
    """Random rational step functions on [0,1] that satisfy the extension condition.

    Start from s distinct Rademacher functions (random signs) on a grid of
    2^(s+3) pieces, then overwrite two shared pieces with random multiples of
    D/8.  Subset products then differ from zero only on those pieces, so each
    normalized expectation is at most 2^-(s+1) in absolute value.
    """
    D = to_exact(D)
    level = s + 3
    n = 1 << level
    which = rng.sample(range(1, level + 1), s)
    hit = rng.sample(range(n), 2)
    g = []
    for r in which:
        sign = rng.choice((1, -1))
        vals = [D * sign * (1 - 2 * ((j >> (level - r)) & 1)) for j in range(n)]
        for j in hit:
            vals[j] = D * Fraction(rng.randrange(-8, 9), 8)
        g.append(StepFunction.uniform(vals))
    return g


__all__ = [
    "ConditionReport", "ExtensionPlan", "IntervalStage", "MultiplicativeReport",
    "check_extension_condition", "extend_multiplicative", "extend_with_plan",
    "plan_extension", "random_condition_set", "rademacher_block", "verify_multiplicative",
]
