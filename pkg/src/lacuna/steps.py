"""Piecewise-constant functions with exact rational breakpoints."""
from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import to_exact


def _num(x):
    """Keep Fractions and ints exact; floats stay floats."""
    if isinstance(x, (Fraction, float)):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


@dataclass(frozen=True)
class StepFunction:
    """A function constant on each ``[breakpoints[k], breakpoints[k+1])``."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bps = tuple(Fraction(b) for b in self.breakpoints)
        vals = tuple(_num(v) for v in self.values)
        if len(bps) < 2 or bps[0] != 0:
            raise ValueError("breakpoints must start at 0 and contain at least two points")
        if any(b1 >= b2 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(vals) != len(bps) - 1:
            raise ValueError("need exactly one value per piece")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, c, length=1) -> "StepFunction":
        return cls((0, length), (c,))

    @classmethod
    def uniform(cls, values: Sequence, length=1) -> "StepFunction":
        """Equal-length pieces on [0, length)."""
        n = len(values)
        L = Fraction(length)
        return cls(tuple(L * k / n for k in range(n + 1)), tuple(values))

    @property
    def length(self) -> Fraction:
        return self.breakpoints[-1]

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.values)

    def widths(self):
        return [b - a for a, b in zip(self.breakpoints, self.breakpoints[1:])]

    def pieces(self):
        return zip(self.breakpoints, self.breakpoints[1:], self.values)

    def __call__(self, x):
        x = Fraction(x) if not isinstance(x, float) else x
        if x < 0 or x > self.length:
            raise ValueError("point outside the domain")
        k = bisect.bisect_right(self.breakpoints, x) - 1
        return self.values[min(k, len(self.values) - 1)]

    def integral(self):
        return sum((w * v for w, v in zip(self.widths(), self.values)), Fraction(0))

    def mean(self):
        return self.integral() / self.length

    def sup_abs(self):
        return max(abs(v) for v in self.values)

    def scale(self, c) -> "StepFunction":
        c = _num(c)
        return StepFunction(self.breakpoints, tuple(c * v for v in self.values))

    def restrict(self, lo, hi) -> "StepFunction":
        """Pieces inside [lo, hi], shifted to start at 0.  lo must be a breakpoint."""
        lo, hi = Fraction(lo), Fraction(hi)
        bps = [b for b in self.breakpoints if lo <= b <= hi]
        if not bps or bps[0] != lo:
            raise ValueError("lo must be a breakpoint")
        if bps[-1] != hi:
            bps.append(hi)
        vals = [self(Fraction(a + b) / 2) for a, b in zip(bps, bps[1:])]
        return StepFunction(tuple(b - lo for b in bps), tuple(vals))

    def dilate(self, factor) -> "StepFunction":
        """x -> f(factor * x), on [0, length / factor]."""
        factor = Fraction(factor)
        return StepFunction(tuple(b / factor for b in self.breakpoints), self.values)

    def to_json(self) -> dict:
        return {
            "breakpoints": [str(b) for b in self.breakpoints],
            "values": [str(v) if isinstance(v, Fraction) else v for v in self.values],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StepFunction":
        vals = []
        for v in obj["values"]:
            if isinstance(v, str):
                vals.append(to_exact(v))
            elif isinstance(v, int):
                vals.append(Fraction(v))
            else:
                vals.append(float(v))
        return cls(tuple(Fraction(b) for b in obj["breakpoints"]), tuple(vals))


def common_refinement(funcs: Sequence[StepFunction]):
    """Merged breakpoints and, per function, its value on every merged piece."""
    if not funcs:
        raise ValueError("need at least one function")
    L = funcs[0].length
    if any(f.length != L for f in funcs):
        raise ValueError("functions live on different domains")
    merged = sorted(set().union(*(f.breakpoints for f in funcs)))
    table = []
    for f in funcs:
        row, k = [], 0
        for left in merged[:-1]:
            while f.breakpoints[k + 1] <= left:
                k += 1
            row.append(f.values[k])
        table.append(row)
    return merged, table


def product(funcs: Sequence[StepFunction], exponents: Iterable[int] | None = None) -> StepFunction:
    """Pointwise product of powers of step functions on a common domain."""
    exps = list(exponents) if exponents is not None else [1] * len(funcs)
    merged, table = common_refinement(funcs)
    vals = []
    for k in range(len(merged) - 1):
        v = Fraction(1)
        for row, e in zip(table, exps):
            if e:
                v = v * row[k] ** e
        vals.append(v)
    return StepFunction(tuple(merged), tuple(vals))


def linear_combination(funcs: Sequence[StepFunction], coefs: Sequence) -> StepFunction:
    merged, table = common_refinement(funcs)
    coefs = [_num(c) for c in coefs]
    vals = []
    for k in range(len(merged) - 1):
        v = Fraction(0)
        for row, c in zip(table, coefs):
            v = v + c * row[k]
        vals.append(v)
    return StepFunction(tuple(merged), tuple(vals))


def dump_functions(funcs: Sequence[StepFunction], **extra) -> str:
    return json.dumps({"functions": [f.to_json() for f in funcs], **extra}, indent=2, sort_keys=True)


def load_functions(text: str) -> list[StepFunction]:
    obj = json.loads(text)
    items = obj["functions"] if isinstance(obj, dict) else obj
    return [StepFunction.from_json(o) for o in items]
