"""Exact scalars: rationals and rational multiples of sqrt(2).

Normalized trigonometric systems have amplitude sqrt(2), so every monomial
expectation is either rational or a rational multiple of sqrt(2).  Keeping
the two apart lets the multiplicativity checks tell 0 from 1e-17.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union


@dataclass(frozen=True)
class Root2Multiple:
    """The number ``coef * sqrt(2)``."""

    coef: Fraction

    def __float__(self):
        return float(self.coef) * math.sqrt(2.0)

    def __bool__(self):
        return self.coef != 0

    def __neg__(self):
        return Root2Multiple(-self.coef)

    def __abs__(self):
        return Root2Multiple(abs(self.coef))

    def __mul__(self, other):
        if isinstance(other, Root2Multiple):
            return 2 * self.coef * other.coef
        if isinstance(other, (int, Fraction)):
            return Root2Multiple(self.coef * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Root2Multiple):
            return self.coef / other.coef
        if isinstance(other, (int, Fraction)):
            return Root2Multiple(self.coef / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            # q / (c sqrt2) = (q / 2c) sqrt2
            return Root2Multiple(Fraction(other) / (2 * self.coef))
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return 1 / (self ** -k)
        base = self.coef ** k * 2 ** (k // 2)
        return Root2Multiple(base) if k % 2 else Fraction(base)

    def __eq__(self, other):
        if isinstance(other, Root2Multiple):
            return self.coef == other.coef
        if isinstance(other, (int, Fraction)):
            return self.coef == 0 and other == 0
        return NotImplemented

    def __hash__(self):
        return hash(("r2", self.coef))

    def __lt__(self, other):
        if isinstance(other, Root2Multiple):
            return self.coef < other.coef
        return _cmp_mixed(self, other) < 0

    def __le__(self, other):
        if isinstance(other, Root2Multiple):
            return self.coef <= other.coef
        return _cmp_mixed(self, other) <= 0

    def __gt__(self, other):
        return not self <= other

    def __ge__(self, other):
        return not self < other

    def __sub__(self, other):
        if isinstance(other, Root2Multiple):
            return Root2Multiple(self.coef - other.coef)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Root2Multiple):
            return Root2Multiple(self.coef + other.coef)
        return NotImplemented

    def __repr__(self):
        return f"{self.coef}*sqrt(2)"


def _sign(x):
    c = x.coef if isinstance(x, Root2Multiple) else x
    return (c > 0) - (c < 0)


def _cmp_mixed(r: Root2Multiple, q) -> int:
    """Exact sign of ``r - q`` for rational ``q``."""
    q = Fraction(q)
    sr, sq = _sign(r), (q > 0) - (q < 0)
    if sr != sq:
        return (sr > sq) - (sr < sq)
    if sr == 0:
        return 0
    lhs, rhs = 2 * r.coef * r.coef, q * q
    mag = (lhs > rhs) - (lhs < rhs)
    return mag if sr > 0 else -mag


SQRT2 = Root2Multiple(Fraction(1))

Exact = Union[Fraction, Root2Multiple]


def to_exact(x) -> Exact:
    """Convert ints, floats, rational strings and ``"sqrt2"`` to an exact scalar.

    Floats convert to their exact binary value.
    """
    if isinstance(x, (Fraction, Root2Multiple)):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite scalar {x!r}")
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip().lower().replace(" ", "")
        if s in ("sqrt2", "sqrt(2)"):
            return SQRT2
        for prefix in ("sqrt2*", "sqrt(2)*"):
            if s.startswith(prefix):
                return Root2Multiple(Fraction(s[len(prefix):]))
        return Fraction(s)
    # numpy scalars and the like
    return to_exact(float(x))


def exact_abs(x: Exact) -> Exact:
    return abs(x)


def is_zero(x) -> bool:
    return not bool(x)


def exact_str(x) -> str:
    """Serialize an exact scalar: ``"p/q"`` or ``"sqrt2*p/q"``."""
    if isinstance(x, Root2Multiple):
        return f"sqrt2*{x.coef}"
    return str(Fraction(x))
