"""Finite-family checks of equivalence in distribution and related criteria.

Every constant reported here is the smallest one consistent with the
vectors and levels actually tested, which makes it a lower bound for the
true constant.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import UnsupportedKind, Unbounded
from .kfunctional import CoefficientVector, as_coefficients
from .selection import MomentBand, moment_band
from .systems import (
    Polynomial,
    SystemSpec,
    atoms,
    is_strongly_multiplicative,
    polynomial,
    rademacher,
    sup_norm_bracket,
    tail_bracket,
    tail_table,
)

C_MAX = 1e6
C_TOL = 1e-6


class _Tail:
    """P{|P| > z}: exact table for step kinds, cached bracket midpoint for trig."""

    def __init__(self, poly: Polynomial):
        self.poly = poly
        self.table = tail_table(poly) if poly.system.is_step else None
        self.cache: dict = {}

    def __call__(self, z: float) -> float:
        if self.table is not None:
            return float(self.table(z))
        if z not in self.cache:
            lo, hi = tail_bracket(self.poly, z)
            self.cache[z] = 0.5 * (lo + hi)
        return self.cache[z]


def _smallest_c(feasible) -> float:
    """Smallest C in [1, C_MAX] with feasible(C), for a monotone predicate."""
    if feasible(1.0):
        return 1.0
    if not feasible(C_MAX):
        return math.inf
    lo, hi = 1.0, C_MAX
    while hi - lo > C_TOL * max(1.0, lo):
        mid = math.sqrt(lo * hi) if hi > 4 * lo else 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def default_z_grid(a: CoefficientVector) -> list[float]:
    """Positive |values| of sum a_i r_i plus the midpoints between consecutive levels and 0."""
    vals = tail_table(polynomial(rademacher(a.n), range(1, a.n + 1), a.entries)).support_points()
    # drop rounding residue of exact zeros
    vals = vals[vals > 1e-12 * max(1.0, float(vals.max(initial=0.0)))]
    # midpoints include the one below the first jump
    mids = 0.5 * (vals + np.concatenate([[0.0], vals[:-1]]))
    grid = np.unique(np.concatenate([vals, mids]))
    if grid.size == 0:
        return [1.0]
    return grid.tolist()


@dataclass
class Witness:
    a: list
    z: float
    side: str
    C: float


@dataclass
class EquivalenceReport:
    C_hat: float
    witnesses: list
    family_size: int
    z_grid_size: int
    note: str = "C_hat is a lower bound for the equivalence constant over the tested family and grid"
    per_vector: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "C_hat": self.C_hat,
            "C_hat_is_lower_bound": True,
            "note": self.note,
            "family_size": self.family_size,
            "z_grid_size": self.z_grid_size,
            "witnesses": [w.__dict__ for w in self.witnesses],
            "per_vector": self.per_vector,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "z", "side", "C"])
        for wt in self.witnesses:
            w.writerow([" ".join(repr(float(x)) for x in wt.a), repr(wt.z), wt.side, repr(wt.C)])
        return buf.getvalue()


def compare_one(tf: _Tail, tg: _Tail, z: float) -> tuple[float, float]:
    """Smallest C for each side of C^-1 F(Cz) <= G(z) <= C F(z/C)."""
    g = tg(z)
    c_low = _smallest_c(lambda C: tf(C * z) / C <= g)
    c_up = _smallest_c(lambda C: g <= C * tf(z / C))
    return c_low, c_up


def distribution_compare(sysF: SystemSpec, sysG: SystemSpec, indicesF: Sequence[int],
                         indicesG: Sequence[int], family, z_grid=None) -> EquivalenceReport:
    """Smallest constant making the two-sided tail sandwich hold on family x grid.

    With ``z_grid=None`` each vector uses its own reference grid.
    Raises Unbounded (carrying the partial report) if no C <= 1e6 works.
    """
    if len(indicesF) != len(indicesG):
        raise ValueError("index lists must have equal length")
    family = [as_coefficients(a) for a in family]
    if not family:
        raise ValueError("family must be nonempty")
    if z_grid is not None and len(z_grid) == 0:
        raise ValueError("z grid must be nonempty")
    best = 1.0
    witnesses, per_vector = [], []
    grid_size = 0
    for a in family:
        tf = _Tail(polynomial(sysF, indicesF, a.entries))
        tg = _Tail(polynomial(sysG, indicesG, a.entries))
        zs = [float(z) for z in (z_grid if z_grid is not None else default_z_grid(a)) if z > 0]
        grid_size = max(grid_size, len(zs))
        top = Witness(a.entries.tolist(), zs[0] if zs else 0.0, "none", 1.0)
        for z in zs:
            cl, cu = compare_one(tf, tg, z)
            c, side = (cl, "lower") if cl >= cu else (cu, "upper")
            if c > top.C:
                top = Witness(a.entries.tolist(), z, side, c)
        per_vector.append(top.C)
        if top.C > 1.0:
            witnesses.append(top)
        best = max(best, top.C)
    witnesses.sort(key=lambda w: -w.C)
    report = EquivalenceReport(best, witnesses, len(family), grid_size, per_vector=per_vector)
    if math.isinf(best):
        raise Unbounded(f"no constant up to {C_MAX:g} satisfies the sandwich", report=report)
    return report


def moment_criterion(system: SystemSpec, indices, family, t_grid) -> MomentBand:
    """Moment ratios against kappa; ``beta`` feeds the tail envelope."""
    return moment_band(system, indices, family, t_grid)


@dataclass(frozen=True)
class StrongMultReport:
    is_strong: bool
    D_witness: float
    d_witness: float
    worst_pattern: tuple | None


def strong_mult_criterion(system: SystemSpec, indices: Sequence[int]) -> StrongMultReport:
    """Strong multiplicativity, the uniform bound D and inf E f_n^2 over the indices."""
    rep = is_strongly_multiplicative(system, indices)
    d = min(float(system.second_moment(n)) for n in indices)
    return StrongMultReport(rep.ok, float(system.bound), d, rep.worst_pattern)


def sidon_constant(system: SystemSpec, indices: Sequence[int], family) -> float:
    """max |a|_1 / |P|_inf over the family; a lower bound for the Sidon constant.

    For trigonometric kinds the upper end of the sup-norm bracket is used, so
    the ratio never overstates.
    """
    best = 0.0
    seen = False
    for a in family:
        a = as_coefficients(a)
        P = polynomial(system, indices, a.entries)
        sup = sup_norm_bracket(P)[1]
        if sup == 0:
            continue
        seen = True
        best = max(best, a.l1 / sup)
    if not seen:
        raise ValueError("every polynomial in the family vanishes")
    return best


@dataclass(frozen=True)
class WitnessSetReport:
    measure: float
    sup_norm: float
    level: float
    threshold: float | None
    threshold_holds: bool | None


def witness_set(poly: Polynomial, alpha2: float, alpha1: float | None = None) -> WitnessSetReport:
    """Measure of E = {|T| >= alpha2 |T|_inf}, compared with alpha1 2^-m when given."""
    if not poly.system.is_step:
        raise UnsupportedKind("witness sets are computed for step kinds only")
    vals, w = atoms(poly)
    absv = np.abs(vals)
    sup = float(absv.max())
    level = alpha2 * sup
    # tolerance only absorbs rounding in alpha2 * sup
    measure = float(np.sum(w[absv >= level - 1e-12 * max(1.0, sup)]))
    if alpha1 is None:
        return WitnessSetReport(measure, sup, level, None, None)
    thr = alpha1 * 2.0 ** -poly.m
    return WitnessSetReport(measure, sup, level, thr, measure > thr)


def make_family(m: int, count: int, seed: int = 0) -> list[CoefficientVector]:
    """Seeded mix of sparse, flat and geometric-decay vectors (in that rotation)."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        kind = k % 3
        if kind == 0:
            a = np.zeros(m)
            size = int(rng.integers(1, m + 1))
            pos = rng.choice(m, size=size, replace=False)
            a[pos] = rng.uniform(-1, 1, size=size)
            if not np.any(a):
                a[pos[0]] = 1.0
        elif kind == 1:
            a = rng.choice([-1.0, 1.0], size=m) * rng.uniform(0.5, 1.5)
        else:
            r = rng.uniform(0.3, 0.9)
            a = rng.choice([-1.0, 1.0], size=m) * r ** np.arange(m)
            a = a[rng.permutation(m)]
        out.append(CoefficientVector(a))
    return out
