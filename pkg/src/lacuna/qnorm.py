"""The partition norm |a|_{Q(t)} and the sandwich against the K-functional.

|a|_{Q(t)} is the largest value of sum_j (sum_{i in A_j} a_i^2)^(1/2) over at
most ``t`` disjoint index blocks.  Merging an unused index into any block never
lowers a block norm, so the supremum is attained on full partitions of
{1..n}; that is what the solvers search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionTooLarge
from .kfunctional import VectorLike, as_coefficients, k_exact

MAX_EXACT_DIM = 14
# relative slack for treating two DP candidates as tied
TIE_TOL = 1e-12


@dataclass(frozen=True)
class PartitionResult:
    value: float
    blocks: tuple[tuple[int, ...], ...]  # 1-based index blocks, canonical order


def block_value(a: VectorLike, blocks) -> float:
    x = as_coefficients(a).entries
    return float(sum(math.sqrt(sum(x[i - 1] ** 2 for i in blk)) for blk in blocks))


@lru_cache(maxsize=None)
def _pair_tables(n: int):
    """All (mask, sub) with sub a submask of mask holding mask's lowest bit.

    Pairs are grouped by mask (ascending) so a reduceat over ``starts``
    maximizes per mask.
    """
    masks, subs, starts = [], [], []
    for mask in range(1, 1 << n):
        low = mask & -mask
        rest = mask ^ low
        group = []
        s = rest
        while True:
            group.append(low | s)
            if s == 0:
                break
            s = (s - 1) & rest
        starts.append(len(masks))
        masks.extend([mask] * len(group))
        subs.extend(group)
    return (np.array(masks, dtype=np.int64), np.array(subs, dtype=np.int64),
            np.array(starts, dtype=np.int64))


def _lex_key(mask: int):
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _subset_roots(x: np.ndarray) -> np.ndarray:
    n = x.size
    sq = np.zeros(1 << n)
    for i in range(n):
        sq[1 << i: 1 << (i + 1)] = sq[: 1 << i] + x[i] ** 2
    return np.sqrt(sq)


def q_levels(a: VectorLike, tmax: int):
    """DP tables g[k][mask] = best value splitting ``mask`` into <= k blocks."""
    x = as_coefficients(a).entries
    n = x.size
    if n > MAX_EXACT_DIM:
        raise DimensionTooLarge(f"exact Q-norm needs n <= {MAX_EXACT_DIM}, got {n}")
    roots = _subset_roots(x)
    masks, subs, starts = _pair_tables(n)
    full = (1 << n) - 1
    sub_roots = roots[subs]
    rest = masks ^ subs
    g = np.full(1 << n, -np.inf)
    g[0] = 0.0
    levels = [g]
    for _ in range(min(tmax, n)):
        cand = sub_roots + levels[-1][rest]
        nxt = np.empty(1 << n)
        nxt[0] = 0.0
        nxt[1:] = np.maximum.reduceat(cand, starts)
        nxt = np.maximum(nxt, levels[-1])
        levels.append(nxt)
    return levels, roots, full


def _backtrack(levels, roots, full, k):
    blocks = []
    mask = full
    while mask:
        # fewest blocks that still attain the value
        while k > 1 and levels[k - 1][mask] >= levels[k][mask] - TIE_TOL * max(1.0, levels[k][mask]):
            k -= 1
        target = levels[k][mask]
        low = mask & -mask
        rest = mask ^ low
        group = []
        s = rest
        while True:
            group.append(low | s)
            if s == 0:
                break
            s = (s - 1) & rest
        group.sort(key=_lex_key)
        for sub in group:
            v = roots[sub] + levels[k - 1][mask ^ sub]
            if v >= target - TIE_TOL * max(1.0, target):
                blocks.append(tuple(i + 1 for i in _lex_key(sub)))
                mask ^= sub
                k -= 1
                break
        else:  # pragma: no cover - numerical guard
            raise RuntimeError("Q-norm backtrack failed")
    return tuple(blocks)


def q_norm_exact(a: VectorLike, t: int) -> PartitionResult:
    """Exact |a|_{Q(t)} by dynamic programming over index subsets."""
    t = int(t)
    if t < 1:
        raise ValueError("t must be a positive integer")
    levels, roots, full = q_levels(a, t)
    k = len(levels) - 1
    blocks = _backtrack(levels, roots, full, k)
    return PartitionResult(value=float(levels[k][full]), blocks=blocks)


def q_norm_all(a: VectorLike) -> np.ndarray:
    """|a|_{Q(t)} for t = 1..n in one pass (index t-1)."""
    n = as_coefficients(a).n
    levels, _, full = q_levels(a, n)
    return np.array([lv[full] for lv in levels[1:]])


def q_norm_bruteforce(a: VectorLike, t: int) -> float:
    """Enumerate set partitions (restricted growth strings) with <= t blocks."""
    x = as_coefficients(a).entries
    n = x.size
    best = 0.0

    def rec(i, sums):
        nonlocal best
        if i == n:
            best = max(best, sum(math.sqrt(s) for s in sums))
            return
        sq = x[i] ** 2
        for b in range(len(sums)):
            rec(i + 1, sums[:b] + [sums[b] + sq] + sums[b + 1:])
        if len(sums) < t:
            rec(i + 1, sums + [sq])

    rec(0, [])
    return best


def q_norm_heuristic(a: VectorLike, t: int) -> PartitionResult:
    """Feasible lower bound: largest-first greedy then single-move local search."""
    t = int(t)
    if t < 1:
        raise ValueError("t must be a positive integer")
    x = as_coefficients(a).entries
    sq = x ** 2
    order = sorted(range(x.size), key=lambda i: (-sq[i], i))
    nb = min(t, x.size)
    assign = [0] * x.size
    sums = [0.0] * nb
    for i in order:
        j = min(range(nb), key=lambda b: (sums[b], b))
        assign[i] = j
        sums[j] += sq[i]

    def total(s):
        return sum(math.sqrt(v) for v in s)

    improved = True
    while improved:
        improved = False
        cur = total(sums)
        for i in range(x.size):
            src = assign[i]
            for dst in range(nb):
                if dst == src:
                    continue
                trial = list(sums)
                trial[src] -= sq[i]
                trial[dst] += sq[i]
                trial[src] = max(trial[src], 0.0)
                if total(trial) > cur * (1 + 1e-14) + 1e-300:
                    sums = trial
                    assign[i] = dst
                    cur = total(sums)
                    improved = True
                    break
    blocks = {}
    for i, j in enumerate(assign):
        blocks.setdefault(j, []).append(i + 1)
    canon = tuple(sorted(tuple(v) for v in blocks.values()))
    return PartitionResult(value=block_value(x, canon), blocks=canon)


@dataclass(frozen=True)
class SandwichReport:
    q: float
    k: float
    lower_ok: bool
    upper_ok: bool


def sandwich_check(a: VectorLike, t: float, tol: float = 1e-9) -> SandwichReport:
    """Check |a|_{Q(t^2)} <= K(t, a) <= sqrt(2) |a|_{Q(t^2)}; t^2 must be an integer."""
    t2 = round(t * t)
    if t2 < 1 or abs(t * t - t2) > 1e-9:
        raise ValueError("t**2 must be a positive integer")
    q = q_norm_exact(a, t2).value
    k = k_exact(a, t).value
    return SandwichReport(q=q, k=k, lower_ok=q <= k + tol, upper_ok=k <= math.sqrt(2) * q + tol)
