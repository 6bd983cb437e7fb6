"""Subsystem selection and Riesz-product certificates.

Two selection procedures are provided:

* ``kashin_select`` searches for s indices whose pattern sum
  ``sum_{theta in A_s} E[prod (f/D)^theta]^2`` is at most ``10^-s``;
* ``greedy_select`` scans candidates in order and accepts one when the
  subset sum against all earlier picks is below ``2^-i eps_i / D``.

Both return self-contained certificates that can be re-verified from the
JSON alone.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import HorizonExhausted, NotFound, TooManyIndices, WeightTooLarge, ZeroVector
from .exact import Exact, Root2Multiple, exact_str, to_exact
from .kfunctional import CoefficientVector, VectorLike, as_coefficients, kappa
from .steps import StepFunction, product
from .systems import (
    TRIG_KINDS,
    SystemSpec,
    class_a,
    dyadic_values,
    function_step,
    lt_norm,
    monomial_expectation,
    polynomial,
    sign_matrix,
    system_from_json,
)

MAX_SUBSET = 12
ZERO_TOL = 1e-12


def _f(x) -> float:
    return float(x)


def _exact_div_power(x: Exact, D: Exact, k: int) -> Exact:
    return x / (D ** k) if k else x


# --------------------------------------------------------------------------
# epsilon schedules


@dataclass(frozen=True)
class EpsilonSchedule:
    eps: tuple

    def __post_init__(self):
        e = tuple(float(x) for x in self.eps)
        if not e or any(not (x > 0) for x in e):
            raise ValueError("schedule entries must be positive")
        object.__setattr__(self, "eps", e)

    def __len__(self):
        return len(self.eps)

    def violations(self, D) -> list[str]:
        """Ways in which the schedule fails the admissibility conditions for D."""
        D = _f(D)
        cap = min(1.0, D) / 16
        out = []
        for i, x in enumerate(self.eps, 1):
            if not x < cap:
                out.append(f"eps_{i}={x} is not below min(1,D)/16={cap}")
            tail = sum(self.eps[i:])
            if not tail < x:
                out.append(f"tail after eps_{i} is {tail} >= {x}")
        return out

    def validate(self, D) -> "EpsilonSchedule":
        bad = self.violations(D)
        if bad:
            raise ValueError("; ".join(bad))
        return self

    @classmethod
    def geometric(cls, count: int, D, ratio: float = 0.25, first: float | None = None):
        """eps_i = first * ratio^(i-1); ratio < 1/2 keeps every tail below its head."""
        if not 0 < ratio < 0.5:
            raise ValueError("ratio must lie in (0, 1/2)")
        if first is None:
            first = min(1.0, _f(D)) / 17
        return cls(tuple(first * ratio ** k for k in range(count))).validate(D)


# --------------------------------------------------------------------------
# certificates


@dataclass
class SelectionCertificate:
    method: str
    system: dict
    indices: list
    D: str
    condition_sum: str
    condition_value: float
    threshold: str
    worst_pattern: list | None
    status: str = "Success"
    seed: int | None = None
    search_stats: dict = field(default_factory=dict)
    steps: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "status": self.status,
            "system": self.system,
            "indices": list(self.indices),
            "D": self.D,
            "condition_sum": self.condition_sum,
            "condition_value": self.condition_value,
            "threshold": self.threshold,
            "worst_pattern": self.worst_pattern,
            "seed": self.seed,
            "search_stats": self.search_stats,
            "steps": self.steps,
            "metadata": self.metadata,
        }


# --------------------------------------------------------------------------
# Kashin-type selection


def _pattern_terms(system: SystemSpec, indices, D: Exact):
    """Yield (theta, exact squared term) over class A_s."""
    for theta in class_a(len(indices)):
        e = monomial_expectation(system, indices, theta)
        if e:
            sq = _exact_div_power(e, D, sum(theta))
            yield theta, Fraction(sq * sq)


def kashin_condition_sum(system: SystemSpec, indices: Sequence[int], D) -> Fraction:
    """sum over A_s of E[prod (f_{n_i}/D)^theta_i]^2, exactly."""
    return kashin_condition_detail(system, indices, D)[0]


def kashin_condition_detail(system: SystemSpec, indices: Sequence[int], D):
    """(sum, worst pattern, per-position contribution) for the pattern sum."""
    idx = tuple(int(n) for n in indices)
    if len(set(idx)) != len(idx):
        raise ValueError("indices must be distinct")
    if len(idx) > MAX_SUBSET:
        raise TooManyIndices(f"pattern sums are capped at {MAX_SUBSET} indices")
    D = to_exact(D)
    total = Fraction(0)
    worst, worst_val = None, Fraction(0)
    contrib = [Fraction(0)] * len(idx)
    for theta, sq in _pattern_terms(system, idx, D):
        total += sq
        if sq > worst_val:
            worst, worst_val = theta, sq
        for p, e in enumerate(theta):
            if e:
                contrib[p] += sq
    return total, worst, contrib


def kashin_select(system: SystemSpec, N: int, s: int, D=None, budget: int = 100_000,
                  seed: int = 0, candidates: Sequence[int] | None = None) -> SelectionCertificate:
    """Randomized restarts with greedy repair.

    One evaluation is one exact pattern sum.  A repair step replaces the
    position carrying the largest share of the sum by the best of a few
    random unused candidates.
    """
    if not 1 <= s <= min(N, MAX_SUBSET):
        raise ValueError(f"need 1 <= s <= min(N, {MAX_SUBSET})")
    D = system.bound if D is None else to_exact(D)
    pool = list(candidates) if candidates is not None else list(range(1, N + 1))
    if len(pool) < s:
        raise ValueError("candidate pool smaller than s")
    rng = random.Random(seed)
    threshold = Fraction(1, 10 ** s)
    evals = restarts = 0
    best = None  # (sum, sorted indices, worst)
    tries_per_repair = 4
    repair_steps = 4 * s

    def evaluate(sub):
        nonlocal evals, best
        evals += 1
        tot, worst, contrib = kashin_condition_detail(system, sub, D)
        key = (tot, tuple(sorted(sub)))
        if best is None or key < (best[0], best[1]):
            best = (tot, tuple(sorted(sub)), worst)
        return tot, worst, contrib

    while evals < budget:
        restarts += 1
        cur = rng.sample(pool, s)
        tot, worst, contrib = evaluate(cur)
        for _ in range(repair_steps):
            if tot <= threshold or evals >= budget:
                break
            pos = max(range(s), key=lambda p: (contrib[p], -p))
            unused = [c for c in pool if c not in cur]
            if not unused:
                break
            trial_best = None
            for c in rng.sample(unused, min(tries_per_repair, len(unused))):
                if evals >= budget:
                    break
                trial = cur[:pos] + [c] + cur[pos + 1:]
                r = evaluate(trial)
                if trial_best is None or r[0] < trial_best[1][0]:
                    trial_best = (trial, r)
            if trial_best is None:
                break
            if trial_best[1][0] <= tot:
                cur, (tot, worst, contrib) = trial_best
        if tot <= threshold:
            break

    stats = {"restarts": restarts, "evaluations": evals, "budget": budget}
    tot, chosen, _ = best
    _, worst, _ = kashin_condition_detail(system, chosen, D)
    cert = SelectionCertificate(
        method="kashin", system=system.to_json(), indices=list(chosen), D=exact_str(D),
        condition_sum=str(tot), condition_value=float(tot), threshold=str(threshold),
        worst_pattern=list(worst) if worst else None, seed=seed, search_stats=stats,
        metadata={"s": s, "N": N},
    )
    if tot > threshold:
        cert.status = "NotFound"
        raise NotFound(f"no subset with pattern sum <= 10^-{s} within {budget} evaluations", best=cert)
    return cert


def verify_kashin_certificate(cert: dict | SelectionCertificate) -> bool:
    """Recompute the pattern sum from the certificate contents alone."""
    c = cert.to_json() if isinstance(cert, SelectionCertificate) else cert
    system = system_from_json(c["system"])
    total = kashin_condition_sum(system, c["indices"], to_exact(c["D"]))
    return total == Fraction(c["condition_sum"]) and total <= Fraction(c["threshold"])


# --------------------------------------------------------------------------
# greedy schedule selection


def _as_weight(h):
    if isinstance(h, StepFunction):
        return h
    return to_exact(h)


class _Expect:
    """E[w * prod f_n^e_n] with w = 1 or the caller's h; exact where possible."""

    def __init__(self, system: SystemSpec, h):
        self.system = system
        self.h = _as_weight(h)
        self._steps: dict = {}

    def _step(self, n):
        if n not in self._steps:
            self._steps[n] = function_step(self.system, n)
        return self._steps[n]

    def __call__(self, powers: dict, weighted: bool = False):
        idx = tuple(sorted(powers))
        exps = tuple(powers[n] for n in idx)
        if not weighted:
            return monomial_expectation(self.system, idx, exps) if idx else Fraction(1)
        if not isinstance(self.h, StepFunction):
            base = monomial_expectation(self.system, idx, exps) if idx else Fraction(1)
            return base * self.h if base else Fraction(0)
        funcs = [self.h] + [self._step(n) for n in idx]
        return product(funcs, (1,) + exps).mean()


def greedy_step_terms(ex: _Expect, chosen: Sequence[int], cand: int):
    """Every term of the acceptance sum for ``cand`` against the earlier picks."""
    terms = []
    for r in range(len(chosen) + 1):
        for J in itertools.combinations(chosen, r):
            base = {j: 1 for j in J}
            with_i = dict(base)
            with_i[cand] = 1
            terms.append(ex(with_i))
            terms.append(ex(with_i, weighted=True))
            sq = dict(base)
            sq[cand] = 2
            e1, e2 = ex(sq), ex(base, weighted=True)
            terms.append((e1, e2))
            for l in J:
                p = dict(with_i)
                p[l] = 2
                terms.append(ex(p))
    return terms


def _term_value(t) -> tuple[bool, float]:
    """(exactly zero?, |value| as float).  Pairs stand for a difference."""
    if isinstance(t, tuple):
        a, b = t
        if not b:
            t = a
        elif not a:
            t = -b
        elif type(a) is type(b):
            t = a - b
        else:
            # a nonzero rational minus a nonzero multiple of sqrt(2) is never 0
            return False, abs(_f(a) - _f(b))
    return (not t), abs(_f(t))


def greedy_select(system: SystemSpec, horizon: int, schedule: EpsilonSchedule, h=1, D=None,
                  count: int | None = None) -> SelectionCertificate:
    """Scan indices 1..horizon in order, accepting when the subset sum is small enough."""
    D = system.bound if D is None else to_exact(D)
    schedule.validate(D)
    want = min(len(schedule), MAX_SUBSET) if count is None else min(count, len(schedule), MAX_SUBSET)
    ex = _Expect(system, h)
    chosen: list[int] = []
    steps = []
    for cand in range(1, min(horizon, system.size) + 1):
        if len(chosen) >= want:
            break
        i = len(chosen) + 1
        thr = 2.0 ** -i * schedule.eps[i - 1] / _f(D)
        vals = [_term_value(t) for t in greedy_step_terms(ex, chosen, cand)]
        exact_zero = all(z for z, _ in vals)
        total = 0.0 if exact_zero else float(sum(v for _, v in vals))
        ok = exact_zero or total <= thr - ZERO_TOL
        if ok:
            chosen.append(cand)
            steps.append({"step": i, "index": cand, "sum": total, "threshold": thr,
                          "exact_zero": exact_zero, "terms": len(vals)})
    h_desc = h.to_json() if isinstance(h, StepFunction) else exact_str(to_exact(h))
    cert = SelectionCertificate(
        method="greedy", system=system.to_json(), indices=chosen, D=exact_str(D),
        condition_sum=repr(max((s["sum"] for s in steps), default=0.0)),
        condition_value=max((s["sum"] for s in steps), default=0.0),
        threshold="2^-i eps_i / D per step", worst_pattern=None, steps=steps,
        search_stats={"horizon": horizon, "scanned": min(horizon, system.size)},
        metadata={"eps": list(schedule.eps), "h": h_desc, "requested": want,
                  "note": "h is caller supplied; sums bound the quantities for this h"},
    )
    if len(chosen) < want:
        cert.status = "HorizonExhausted"
        raise HorizonExhausted(f"accepted {len(chosen)} of {want} within horizon {horizon}",
                               certificate=cert)
    return cert


def verify_greedy_certificate(cert: dict | SelectionCertificate, h=1) -> bool:
    c = cert.to_json() if isinstance(cert, SelectionCertificate) else cert
    system = system_from_json(c["system"])
    D = to_exact(c["D"])
    ex = _Expect(system, h)
    chosen: list[int] = []
    for st in c["steps"]:
        vals = [_term_value(t) for t in greedy_step_terms(ex, chosen, st["index"])]
        total = 0.0 if all(z for z, _ in vals) else float(sum(v for _, v in vals))
        thr = 2.0 ** -st["step"] * c["metadata"]["eps"][st["step"] - 1] / _f(D)
        if not (total == 0.0 or total <= thr - ZERO_TOL) or abs(total - st["sum"]) > 1e-12:
            return False
        chosen.append(st["index"])
    return chosen == list(c["indices"])


# --------------------------------------------------------------------------
# Riesz products


def joint_values(system: SystemSpec, indices: Sequence[int]):
    """(F, w): F[k, i] = f_{indices[i]} on atom k, w[k] its probability.

    Only for step kinds.  Rademacher functions are independent signs, so
    atoms are sign patterns regardless of which indices are used.
    """
    idx = [int(n) for n in indices]
    kind = system.kind
    if kind in TRIG_KINDS:
        raise ValueError("trigonometric systems have no atoms")
    if not idx:
        return np.ones((1, 0)), np.ones(1)
    if kind == "rademacher":
        if len(set(idx)) != len(idx):
            raise ValueError("indices must be distinct")
        S = sign_matrix(len(idx)).astype(float)
        return S, np.full(S.shape[0], 1.0 / S.shape[0])
    if kind == "walsh":
        level = max(n.bit_length() for n in idx)
        F = np.stack([dyadic_values(system, n, level).astype(float) for n in idx], axis=1)
        return F, np.full(F.shape[0], 1.0 / F.shape[0])
    from .steps import common_refinement

    merged, table = common_refinement([system.functions[n - 1] for n in idx])
    L = float(merged[-1])
    w = np.array([float(b - a) / L for a, b in zip(merged, merged[1:])])
    F = np.array([[float(v) for v in row] for row in table]).T
    return F, w


@dataclass(frozen=True)
class RieszProduct:
    system: SystemSpec
    indices: tuple
    b: tuple

    def factor_min(self) -> float:
        D = _f(self.system.bound)
        return min((1 - abs(x) * D for x in self.b), default=1.0)

    def evaluate(self, x) -> np.ndarray:
        """Pointwise values on [0,1] (trigonometric kinds)."""
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        amp = _f(self.system.amplitude)
        fn = np.sin if self.system.kind == "trig-sine" else np.cos
        for n, bi in zip(self.indices, self.b):
            out = out * (1 + bi * amp * fn(2 * np.pi * self.system.freqs[n - 1] * x))
        return out

    def atoms(self):
        F, w = joint_values(self.system, self.indices)
        R = np.prod(1 + F * np.asarray(self.b)[None, :], axis=1) if self.b else np.ones(F.shape[0])
        return R, w, F

    def step(self) -> StepFunction:
        """Exact StepFunction; weights are converted to their exact binary value."""
        if not self.indices:
            return StepFunction.constant(Fraction(1))
        funcs = []
        for n, bi in zip(self.indices, self.b):
            f = function_step(self.system, n)
            bi = Fraction(bi)
            funcs.append(StepFunction(f.breakpoints, tuple(1 + bi * v for v in f.values)))
        return product(funcs)

    def expansion_mean(self) -> float:
        """E R from the expansion sum_S prod_S b * E prod_S f."""
        s = len(self.indices)
        if s > MAX_SUBSET:
            raise TooManyIndices("expansion mean is capped at 12 factors")
        total = 0.0
        for r in range(s + 1):
            for S in itertools.combinations(range(s), r):
                if not S:
                    total += 1.0
                    continue
                e = monomial_expectation(self.system, [self.indices[k] for k in S], [1] * r)
                if e:
                    total += math.prod(self.b[k] for k in S) * _f(e)
        return total

    def _grid(self, extra_degree: int) -> np.ndarray:
        deg = sum(self.system.freqs[n - 1] for n in self.indices) + extra_degree
        N = max(64, 1 << math.ceil(math.log2(2 * deg + 2)))
        return np.arange(N) / N

    def mean_with(self, a: Sequence[float]) -> float:
        """E[R * sum a_i f_{n_i}]."""
        a = np.asarray(a, dtype=float)
        if self.system.kind in TRIG_KINDS:
            x = self._grid(max((self.system.freqs[n - 1] for n in self.indices), default=0))
            P = polynomial(self.system, self.indices, a).evaluate(x)
            return float(np.mean(self.evaluate(x) * P))
        R, w, F = self.atoms()
        return float(np.sum(w * R * (F @ a)))

    def power_mean(self, p: float) -> float:
        """E R^p (R >= 0)."""
        if self.system.kind not in TRIG_KINDS:
            R, w, _ = self.atoms()
            return float(np.sum(w * np.maximum(R, 0.0) ** p))
        if float(p).is_integer():
            x = self._grid(int(p) * sum(self.system.freqs[n - 1] for n in self.indices))
            return float(np.mean(self.evaluate(x) ** int(p)))
        K = max(1, sum(self.system.freqs[n - 1] for n in self.indices))
        edges = np.linspace(0.0, 1.0, 4 * K + 1)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, _ = integrate.quad(lambda u: max(float(self.evaluate(np.array([u]))[0]), 0.0) ** p,
                                  lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)
            total += v
        return total


def riesz_product(system: SystemSpec, indices: Sequence[int], b: Sequence[float], D=None) -> RieszProduct:
    D = _f(system.bound if D is None else to_exact(D))
    b = tuple(float(x) for x in b)
    if len(b) != len(indices):
        raise ValueError("need one weight per index")
    for x in b:
        if abs(x) * D > 1 + 1e-12:
            raise WeightTooLarge(f"|b|*D = {abs(x) * D} exceeds 1")
    return RieszProduct(system, tuple(int(n) for n in indices), b)


def balanced_partition(s: int, t: int) -> list[list[int]]:
    """Positions 1..s dealt round-robin into t blocks."""
    blocks = [[] for _ in range(t)]
    for p in range(s):
        blocks[p % t].append(p + 1)
    return blocks


def block_weights(a: VectorLike, partition, D) -> np.ndarray:
    """b_i = a_i / (D |a_{A_j}|_2) on each block, so sum_{A_j} a_i b_i = |a_{A_j}|_2 / D."""
    a = as_coefficients(a).entries
    D = _f(D)
    b = np.zeros(a.size)
    for blk in partition:
        pos = [p - 1 for p in blk]
        nrm = float(np.linalg.norm(a[pos]))
        if nrm > 0:
            b[pos] = a[pos] / (D * nrm)
    return b


def _check_partition(partition, s):
    seen = sorted(p for blk in partition for p in blk)
    if seen != list(range(1, s + 1)):
        raise ValueError("partition blocks must cover positions 1..s exactly once")


@dataclass
class RieszCertificate:
    indices: list
    blocks: list
    weights: list
    I_N: float
    lower_target: float
    holds: bool
    gamma_terms: list
    D: float
    L_N: float | None = None
    dual_bound: float | None = None

    def to_json(self) -> dict:
        return dict(self.__dict__)


def riesz_lower_certificate(system: SystemSpec, indices: Sequence[int], a: VectorLike,
                            partition, D=None) -> RieszCertificate:
    a = as_coefficients(a)
    if a.n != len(indices):
        raise ValueError("one coefficient per index")
    _check_partition(partition, a.n)
    Dx = system.bound if D is None else to_exact(D)
    b = block_weights(a, partition, Dx)
    R = riesz_product(system, indices, b, Dx)
    I = float(R.mean_with(a.entries))
    target = sum(float(np.linalg.norm(a.entries[[p - 1 for p in blk]])) for blk in partition) / (3 * _f(Dx))
    gammas = []
    for k in range(a.n):
        e = np.zeros(a.n)
        e[k] = 1.0
        gammas.append(float(R.mean_with(e) - b[k]))
    holds = I >= target - 1e-12 * max(1.0, target)
    return RieszCertificate(indices=list(indices), blocks=[list(x) for x in partition],
                            weights=b.tolist(), I_N=I, lower_target=target, holds=bool(holds),
                            gamma_terms=gammas, D=_f(Dx))


@dataclass(frozen=True)
class DualNormReport:
    L_N: float
    leading: float
    perturbation: float
    analytic_bound: float
    t: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def riesz_dual_norm(system: SystemSpec, indices: Sequence[int], b: Sequence[float], t: int,
                    partition, D=None) -> DualNormReport:
    """L_N = E R^{t'} with t' = t/(t-1), and the expansion bound.

    The bound is ((t-1)/(t-2))^t + 4e sum_i 2^i sum_{J < i} |E(prod_J f f_i)|.
    The first term comes from the degree-0 part of the expansion and is at
    least 1, so the bound never falls below 1.
    """
    t = int(t)
    if t < 3:
        raise ValueError("t must be an integer >= 3")
    _check_partition(partition, len(indices))
    Dx = _f(system.bound if D is None else to_exact(D))
    for blk in partition:
        if sum(b[p - 1] ** 2 for p in blk) > Dx ** -2 * (1 + 1e-12):
            raise WeightTooLarge("block weights exceed D^-2")
    R = riesz_product(system, indices, b, Dx)
    L = R.power_mean(t / (t - 1))
    idx = list(indices)
    if len(idx) > MAX_SUBSET:
        raise TooManyIndices("expansion bound is capped at 12 indices")
    pert = 0.0
    for i in range(len(idx)):
        inner = 0.0
        for r in range(i + 1):
            for J in itertools.combinations(idx[:i], r):
                e = monomial_expectation(system, list(J) + [idx[i]], [1] * (r + 1))
                inner += abs(_f(e))
        pert += 2 ** (i + 1) * inner
    pert *= 4 * math.e
    leading = ((t - 1) / (t - 2)) ** t
    return DualNormReport(L_N=L, leading=leading, perturbation=pert,
                          analytic_bound=leading + pert, t=t)


# --------------------------------------------------------------------------
# moment band


@dataclass(frozen=True)
class MomentBand:
    c_lower: float
    c_upper: float
    beta: float
    lower_witness: tuple
    upper_witness: tuple
    ratios: np.ndarray

    def to_json(self) -> dict:
        return {"c_lower": self.c_lower, "c_upper": self.c_upper, "beta": self.beta,
                "lower_witness": list(self.lower_witness), "upper_witness": list(self.upper_witness)}


def moment_band(system: SystemSpec, indices: Sequence[int], family, t_grid) -> MomentBand:
    """Ratios |sum a_i f_{n_i}|_t / kappa(t, a) over family x grid.

    Witnesses are (family position, t).
    """
    family = [as_coefficients(a) for a in family]
    t_grid = [float(t) for t in t_grid]
    if not family or not t_grid:
        raise ValueError("family and t grid must be nonempty")
    ratios = np.empty((len(family), len(t_grid)))
    for r, a in enumerate(family):
        if a.is_zero:
            raise ZeroVector("zero coefficient vector in the family")
        if a.n != len(indices):
            raise ValueError("coefficient length must match the index count")
        P = polynomial(system, indices, a.entries)
        for c, t in enumerate(t_grid):
            ratios[r, c] = lt_norm(P, t) / kappa(a, t)
    lo = np.unravel_index(np.argmin(ratios), ratios.shape)
    hi = np.unravel_index(np.argmax(ratios), ratios.shape)
    cl, cu = float(ratios[lo]), float(ratios[hi])
    ratios.setflags(write=False)
    return MomentBand(cl, cu, max(cu, 1 / cl), (int(lo[0]), t_grid[lo[1]]),
                      (int(hi[0]), t_grid[hi[1]]), ratios)
