"""Two-sided tail envelopes driven by the growth of kappa(t, a).

If ``beta^-1 kappa(t,a) <= |P|_t <= beta kappa(t,a)`` for t >= 1, the tail
``P{|P| > z}`` is pinned between ``C1^-1 exp(-F(C3 z))`` and
``exp(1 - F(z / C4))``, where F and G invert kappa from either side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ZeroPolynomial, ZeroVector
from .kfunctional import CoefficientVector, VectorLike, as_coefficients, kappa, saturation_time
from .systems import Polynomial, lt_norm

INF = math.inf
T_LO = 1e-12


def paley_zygmund_lower(poly: Polynomial, t: float) -> float:
    """(1 - 2^-t)^2 |P|_t^(2t) / |P|_(2t)^(2t), a lower bound for P{|P|^t >= 2^-t |P|_t^t}."""
    if t < 1:
        raise ValueError("t must be >= 1")
    nt, n2t = lt_norm(poly, t), lt_norm(poly, 2 * t)
    if n2t == 0:
        raise ZeroPolynomial("Paley-Zygmund bound needs a nonzero polynomial")
    return (1 - 2.0 ** -t) ** 2 * (nt / n2t) ** (2 * t)


def chebyshev_upper(poly: Polynomial, z: float, t: float) -> float:
    if z <= 0:
        raise ValueError("z must be positive")
    if t < 1:
        raise ValueError("t must be >= 1")
    return min(1.0, (lt_norm(poly, t) / z) ** t)


def _nonzero(a: VectorLike) -> CoefficientVector:
    a = as_coefficients(a)
    if a.is_zero:
        raise ZeroVector("F and G are undefined for the zero vector")
    return a


def _crossing(a: CoefficientVector, s: float) -> float:
    """The t with kappa(t, a) = s, for 0 < s < |a|_1."""
    sat = saturation_time(a)
    lo, hi = T_LO, 4.0 * max(1, a.n ** 2)
    while kappa(a, lo) > s:
        lo /= 16
        if lo < 1e-300:
            return 0.0
    while kappa(a, hi) < s:  # pragma: no cover - kappa saturates at t = nnz
        hi *= 4
    hi = min(hi, float(sat))

    def f(u):
        return kappa(a, math.exp(u)) - s

    u = optimize.brentq(f, math.log(lo), math.log(hi), xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return math.exp(u)


def f_functional(a: VectorLike, s: float) -> float:
    """F(s) = sup{t > 0 : kappa(t, a) <= s}; +inf once s reaches |a|_1."""
    a = _nonzero(a)
    if s <= 0:
        raise ValueError("s must be positive")
    if s >= a.l1:
        return INF
    return _crossing(a, s)


def g_functional(a: VectorLike, s: float) -> float:
    """G(s) = inf{t > 0 : kappa(t, a) >= s}; +inf when s exceeds |a|_1."""
    a = _nonzero(a)
    if s <= 0:
        raise ValueError("s must be positive")
    if s > a.l1:
        return INF
    if s == a.l1:
        # first time kappa reaches its plateau
        return float(saturation_time(a))
    return _crossing(a, s)


def envelope_constants(beta: float) -> tuple[float, float, float, float]:
    """(C1, C2, C3, C4) for an equivalence constant beta >= 1."""
    if beta < 1:
        raise ValueError("beta must be >= 1")
    c1 = (2 * beta) ** 4
    c2 = 4 * math.log(2 * beta)
    c3 = 4 * math.sqrt(2) * c2 * beta
    c4 = 2 * beta * math.e
    return c1, c2, c3, c4


@dataclass(frozen=True)
class ChainCheck:
    z: float
    g_value: float
    kappa_side: float
    kappa_ok: bool
    f_side: float
    f_ok: bool


@dataclass(frozen=True)
class TailEnvelope:
    a: CoefficientVector
    alpha: float
    beta: float
    beta_prime: float
    C1: float
    C2: float
    C3: float
    C4: float
    C1p: float
    C2p: float
    C3p: float
    C4p: float
    A: float

    @property
    def lower_cutoff(self) -> float:
        return self.a.l1 / (4 * self.alpha * self.beta)

    @property
    def upper_cutoff(self) -> float:
        return self.beta * self.a.l1

    def lower(self, z: float) -> float:
        if z < 0:
            raise ValueError("z must be nonnegative")
        if z >= self.lower_cutoff:
            return 0.0
        if z == 0:
            return 1.0 / self.C1
        F = f_functional(self.a, self.C3 * z)
        return 0.0 if F == INF else math.exp(-F) / self.C1

    def upper(self, z: float) -> float:
        if z < 0:
            raise ValueError("z must be nonnegative")
        if z >= self.upper_cutoff:
            return 0.0
        if z == 0:
            return 1.0
        F = f_functional(self.a, z / self.C4)
        return 0.0 if F == INF else min(1.0, math.exp(1 - F))

    def chain(self, z: float) -> ChainCheck:
        """Evaluate the two inequalities that turn the G-bound into the F-bound.

        kappa(C2 G(4 beta z)) <= C3 z and C2 G(4 beta z) <= F(C3 z).
        Failures are reported, not corrected.
        """
        g = g_functional(self.a, 4 * self.beta * z)
        F = f_functional(self.a, self.C3 * z)
        if g == INF:
            return ChainCheck(z, g, INF, F == INF, F, F == INF)
        k = kappa(self.a, self.C2 * g) if g > 0 else 0.0
        lhs = self.C2 * g
        tol = 1e-9 * max(1.0, abs(self.C3 * z))
        return ChainCheck(z, g, k, k <= self.C3 * z + tol, F,
                          F == INF or lhs <= F * (1 + 1e-9) + 1e-12)

    def to_json(self) -> dict:
        keys = ("alpha", "beta", "beta_prime", "C1", "C2", "C3", "C4",
                "C1p", "C2p", "C3p", "C4p", "A")
        out = {k: getattr(self, k) for k in keys}
        out["a"] = self.a.entries.tolist()
        out["lower_cutoff"] = self.lower_cutoff
        out["upper_cutoff"] = self.upper_cutoff
        return out


def build_envelope(a: VectorLike, beta: float, alpha: float, beta_prime: float) -> TailEnvelope:
    a = _nonzero(a)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    c = envelope_constants(beta)
    cp = envelope_constants(beta_prime)
    A = max(c[0] * math.e, c[2] * cp[3], cp[0] * math.e, cp[2] * c[3], 4 * alpha * beta * beta_prime)
    return TailEnvelope(a, float(alpha), float(beta), float(beta_prime), *c, *cp, A)
