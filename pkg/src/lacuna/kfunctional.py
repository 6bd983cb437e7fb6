"""The (l1, l2) K-functional and its square-root rescaling.

``K(t, a) = inf { |b|_1 + t |r|_2 : a = b + r }`` for a finite real vector.
The minimizing ``r`` is a clamp of ``a`` at some level ``lam``, so the
n-dimensional problem reduces to a one-dimensional convex search over the
clamp level, solved in closed form on each segment between consecutive
entries of the decreasing rearrangement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np

# t**2 this close to an integer is treated as that integer
FLOOR_SNAP = 1e-12


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """A finite real coefficient sequence ``a = (a_1, ..., a_n)``."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float).reshape(-1)
        if arr.size < 1:
            raise ValueError("coefficient vector must have at least one entry")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficient entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.size

    @cached_property
    def rearranged(self) -> np.ndarray:
        r = np.sort(np.abs(self.entries))[::-1].copy()
        r.setflags(write=False)
        return r

    @property
    def l1(self) -> float:
        return float(np.sum(np.abs(self.entries)))

    @property
    def l2(self) -> float:
        return float(np.linalg.norm(self.entries))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.entries)

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.entries.tolist())

    def __eq__(self, other):
        if not isinstance(other, CoefficientVector):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"CoefficientVector({self.entries.tolist()})"


VectorLike = Union[CoefficientVector, Sequence[float], np.ndarray]


def as_coefficients(a: VectorLike) -> CoefficientVector:
    return a if isinstance(a, CoefficientVector) else CoefficientVector(np.asarray(a, dtype=float))


@dataclass(frozen=True)
class KSplit:
    """A realizing decomposition ``a = b + r`` for the K-functional at ``t``."""

    value: float
    threshold: float
    l1_part: CoefficientVector
    l2_part: CoefficientVector
    t: float


def decreasing_rearrangement(a: VectorLike) -> CoefficientVector:
    return CoefficientVector(as_coefficients(a).rearranged)


def snapped_floor(x: float) -> int:
    """Floor of ``x``, snapping values within FLOOR_SNAP of an integer."""
    r = round(x)
    if abs(x - r) <= FLOOR_SNAP:
        return int(r)
    return math.floor(x)


def holmstedt(a: VectorLike, t: float) -> float:
    """Head sum plus scaled tail l2 norm, split at ``floor(t**2)``."""
    if t <= 0:
        raise ValueError("t must be positive")
    star = as_coefficients(a).rearranged
    k = min(snapped_floor(t * t), star.size)
    head = float(np.sum(star[:k]))
    tail = float(np.sqrt(np.sum(star[k:] ** 2)))
    return head + t * tail


def _best_threshold(star: np.ndarray, t: float) -> float:
    """Minimize g(lam) = sum (a*_i - lam)_+ + t (sum min(a*_i, lam)^2)^(1/2).

    On [a*_{k+1}, a*_k] exactly k entries exceed lam and
    g = S_k - k lam + t sqrt(k lam^2 + T_k) with T_k the tail sum of squares;
    this is convex with stationary point lam = sqrt(T_k / (t^2 - k)) when t^2 > k.
    """
    if star[0] == 0.0:
        return 0.0
    cand = _threshold_candidates(star, t)
    return float(cand[int(np.argmin(_objectives(star, t, cand)))])


def _threshold_candidates(star: np.ndarray, t: float) -> np.ndarray:
    n = star.size
    sq = star ** 2
    # tail_sq[k] = sum of squares of entries k..n-1 (0-based)
    tail_sq = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    hi = np.concatenate([[star[0]], star])
    lo = np.concatenate([star, [0.0]])
    k = np.arange(n + 1)
    gap = t * t - k
    ok = (gap > 0) & (tail_sq > 0)
    stat = np.sqrt(np.divide(tail_sq, gap, out=np.zeros(n + 1), where=ok))
    stat = np.clip(stat, lo, hi)[ok]
    return np.concatenate([[0.0, star[0]], lo, hi, stat])


def _objectives(star: np.ndarray, t: float, lams: np.ndarray) -> np.ndarray:
    over = np.maximum(star[None, :] - lams[:, None], 0.0).sum(axis=1)
    under = np.sqrt((np.minimum(star[None, :], lams[:, None]) ** 2).sum(axis=1))
    return over + t * under


def k_value_sorted(star: np.ndarray, t: float) -> float:
    """K(t, a) from the decreasing rearrangement, without building the split."""
    if star.size == 0 or star[0] == 0.0:
        return 0.0
    return float(np.min(_objectives(star, t, _threshold_candidates(star, t))))


def k_exact(a: VectorLike, t: float) -> KSplit:
    """Exact K(t, a; l1, l2) with the soft-threshold split that attains it."""
    if t <= 0:
        raise ValueError("t must be positive")
    a = as_coefficients(a)
    lam = _best_threshold(a.rearranged, t)
    r = np.clip(a.entries, -lam, lam)
    b = a.entries - r
    value = float(np.sum(np.abs(b)) + t * np.linalg.norm(r))
    return KSplit(value=value, threshold=lam, l1_part=CoefficientVector(b),
                  l2_part=CoefficientVector(r), t=float(t))


def kappa(a: VectorLike, t: float) -> float:
    """kappa(t, a) = K(sqrt(t), a)."""
    if t <= 0:
        raise ValueError("t must be positive")
    return k_value_sorted(as_coefficients(a).rearranged, math.sqrt(t))


def saturation_time(a: VectorLike) -> int:
    """Smallest t with kappa(t, a) = |a|_1: the number of nonzero entries."""
    return int(np.count_nonzero(as_coefficients(a).entries))
