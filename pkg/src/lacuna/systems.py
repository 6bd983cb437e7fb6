"""Finite function systems on [0, 1] and exact monomial expectations.

Supported kinds:

* ``rademacher``: r_n(x) = sign sin(2^(n-1) pi x), n = 1..m
* ``walsh``: w_n = product of r_(b+1) over the set bits b of n, n = 1..N
* ``trig-sine`` / ``trig-cosine``: amplitude * sin/cos(2 pi k_n x)
* ``custom``: caller-supplied step functions

Indices are 1-based everywhere.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import PatternMismatch, SizeExceeded, UnsupportedKind
from .exact import SQRT2, Exact, Root2Multiple, exact_str, to_exact
from .steps import StepFunction, linear_combination, product

STEP_KINDS = ("rademacher", "walsh", "custom")
TRIG_KINDS = ("trig-sine", "trig-cosine")
MAX_LEVEL = 20  # 2^20 piece cap on dyadic step representations


@dataclass(frozen=True)
class SystemSpec:
    kind: str
    size: int
    freqs: tuple = ()
    amplitude: Exact = Fraction(1)
    functions: tuple = ()
    declared_bound: Exact | None = None

    def __post_init__(self):
        if self.kind not in STEP_KINDS + TRIG_KINDS:
            raise UnsupportedKind(f"unknown system kind {self.kind!r}")
        if self.kind in TRIG_KINDS:
            f = tuple(int(k) for k in self.freqs)
            if not f or f[0] < 1 or any(x >= y for x, y in zip(f, f[1:])):
                raise ValueError("frequencies must be strictly increasing positive integers")
            object.__setattr__(self, "freqs", f)
            object.__setattr__(self, "size", len(f))
            object.__setattr__(self, "amplitude", to_exact(self.amplitude))
        if self.kind == "custom":
            if not self.functions:
                raise ValueError("custom system needs functions")
            object.__setattr__(self, "size", len(self.functions))
        if self.declared_bound is not None:
            D = to_exact(self.declared_bound)
            object.__setattr__(self, "declared_bound", D)
            if self.natural_bound > D:
                raise ValueError("a member function exceeds the declared bound D")

    @property
    def is_step(self) -> bool:
        return self.kind in STEP_KINDS

    @property
    def natural_bound(self) -> Exact:
        if self.kind in TRIG_KINDS:
            return abs(self.amplitude)
        if self.kind == "custom":
            return max(Fraction(f.sup_abs()) for f in self.functions)
        return Fraction(1)

    @property
    def bound(self) -> Exact:
        """The uniform bound D."""
        return self.declared_bound if self.declared_bound is not None else self.natural_bound

    def check_index(self, n: int):
        if not 1 <= n <= self.size:
            raise IndexError(f"index {n} outside 1..{self.size}")

    def second_moment(self, n: int) -> Exact:
        """E f_n^2."""
        return monomial_expectation(self, (n,), (2,))

    def to_json(self) -> dict:
        params: dict
        if self.kind == "rademacher":
            params = {"m": self.size}
        elif self.kind == "walsh":
            params = {"count": self.size}
        elif self.kind in TRIG_KINDS:
            params = {"freqs": list(self.freqs), "amplitude": exact_str(self.amplitude)}
        else:
            params = {"functions": [f.to_json() for f in self.functions]}
        return {"kind": self.kind, "params": params, "D": exact_str(self.bound)}


def rademacher(m: int) -> SystemSpec:
    return SystemSpec("rademacher", int(m))


def walsh(count: int) -> SystemSpec:
    return SystemSpec("walsh", int(count))


def trig_sine(freqs, amplitude=1) -> SystemSpec:
    return SystemSpec("trig-sine", 0, freqs=tuple(freqs), amplitude=amplitude)


def trig_cosine(freqs, amplitude=1) -> SystemSpec:
    return SystemSpec("trig-cosine", 0, freqs=tuple(freqs), amplitude=amplitude)


def custom(functions: Sequence[StepFunction], D=None) -> SystemSpec:
    return SystemSpec("custom", 0, functions=tuple(functions), declared_bound=D)


def system_from_json(obj: dict) -> SystemSpec:
    kind = obj["kind"]
    p = obj.get("params", {})
    D = obj.get("D")
    if kind == "rademacher":
        s = SystemSpec(kind, int(p["m"]), declared_bound=D)
    elif kind == "walsh":
        s = SystemSpec(kind, int(p["count"]), declared_bound=D)
    elif kind in TRIG_KINDS:
        s = SystemSpec(kind, 0, freqs=tuple(p["freqs"]), amplitude=p.get("amplitude", 1),
                       declared_bound=D)
    elif kind == "custom":
        s = SystemSpec(kind, 0, functions=tuple(StepFunction.from_json(f) for f in p["functions"]),
                       declared_bound=D)
    else:
        raise UnsupportedKind(f"unknown system kind {kind!r}")
    return s


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def parse_system(text: str) -> SystemSpec:
    """Parse ``rademacher:8``, ``walsh:256``, ``trig-sine:1,3,9@sqrt2``, ``trig-cosine:1..128``.

    Anything ending in ``.json`` is read as a SystemSpec JSON file.
    """
    if text.endswith(".json"):
        with open(text) as fh:
            return system_from_json(json.load(fh))
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "rademacher":
        return rademacher(int(rest))
    if kind == "walsh":
        return walsh(int(rest))
    if kind in TRIG_KINDS:
        freqs, _, amp = rest.partition("@")
        return SystemSpec(kind, 0, freqs=tuple(_int_list(freqs)), amplitude=amp or 1)
    raise UnsupportedKind(f"cannot parse system {text!r}")


# --------------------------------------------------------------------------
# exponent patterns


def class_a(s: int, squares: bool = True):
    """Patterns in {0,1,2}^s with at least one 1 and at most one 2.

    With ``squares=False`` only {0,1} patterns (the primed class).
    Order is deterministic (lexicographic).
    """
    digits = (0, 1, 2) if squares else (0, 1)
    for theta in itertools.product(digits, repeat=s):
        if 1 in theta and theta.count(2) <= 1:
            yield theta


def in_class_a(theta, squares: bool = True) -> bool:
    allowed = {0, 1, 2} if squares else {0, 1}
    return set(theta) <= allowed and 1 in theta and list(theta).count(2) <= 1


# --------------------------------------------------------------------------
# monomial expectations


@lru_cache(maxsize=1 << 16)
def _laurent_constant(freqs: tuple, signed: bool) -> int:
    """Constant term of prod_j (x^k_j + s x^-k_j), s = -1 if signed else +1."""
    poly = {0: 1}
    for k in freqs:
        nxt: dict = {}
        for e, c in poly.items():
            nxt[e + k] = nxt.get(e + k, 0) + c
            nxt[e - k] = nxt.get(e - k, 0) + (-c if signed else c)
        poly = {e: c for e, c in nxt.items() if c}
    return poly.get(0, 0)


def trig_monomial(kind: str, freqs: Sequence[int]) -> Fraction:
    """E prod sin/cos(2 pi k x) over [0,1] with unit amplitude, exactly."""
    fs = tuple(sorted(freqs))
    M = len(fs)
    if kind == "trig-cosine":
        return Fraction(_laurent_constant(fs, False), 2 ** M)
    if M % 2:
        return Fraction(0)
    c = _laurent_constant(fs, True)
    return Fraction(c * (-1) ** (M // 2), 2 ** M)


def _exact_power(x: Exact, k: int) -> Exact:
    return x ** k


def monomial_expectation(system: SystemSpec, indices: Sequence[int], theta: Sequence[int]) -> Exact:
    """E prod_i f_{indices[i]}^{theta[i]} as an exact number."""
    if len(indices) != len(theta):
        raise PatternMismatch("theta and indices differ in length")
    for n in indices:
        system.check_index(n)
    if any(int(e) < 0 for e in theta):
        raise PatternMismatch("exponents must be nonnegative")
    pairs = [(int(n), int(e)) for n, e in zip(indices, theta) if e]
    if not pairs:
        return Fraction(1)
    kind = system.kind
    if kind == "rademacher":
        power: dict = {}
        for n, e in pairs:
            power[n] = power.get(n, 0) + e
        return Fraction(int(all(e % 2 == 0 for e in power.values())))
    if kind == "walsh":
        x = 0
        for n, e in pairs:
            if e % 2:
                x ^= n
        return Fraction(int(x == 0))
    if kind in TRIG_KINDS:
        freqs = [system.freqs[n - 1] for n, e in pairs for _ in range(e)]
        base = trig_monomial(kind, freqs)
        if base == 0:
            return Fraction(0)
        return base * _exact_power(system.amplitude, len(freqs))
    funcs = [system.functions[n - 1] for n, _ in pairs]
    prod = product(funcs, [e for _, e in pairs])
    return prod.mean()


@dataclass(frozen=True)
class MultiplicativityReport:
    ok: bool
    worst_pattern: tuple | None
    worst_value: Exact
    checked: int


def _scan_patterns(system, indices, squares):
    worst, worst_val, count = None, Fraction(0), 0
    for theta in class_a(len(indices), squares=squares):
        count += 1
        v = monomial_expectation(system, indices, theta)
        if v and (worst is None or abs(float(v)) > abs(float(worst_val))):
            worst, worst_val = theta, v
    return MultiplicativityReport(ok=worst is None, worst_pattern=worst,
                                  worst_value=worst_val, checked=count)


def is_strongly_multiplicative(system: SystemSpec, indices: Sequence[int]) -> MultiplicativityReport:
    if len(set(indices)) != len(indices):
        raise ValueError("indices must be distinct")
    return _scan_patterns(system, tuple(indices), squares=True)


def is_multiplicative(system: SystemSpec, indices: Sequence[int]) -> MultiplicativityReport:
    if len(set(indices)) != len(indices):
        raise ValueError("indices must be distinct")
    return _scan_patterns(system, tuple(indices), squares=False)


# --------------------------------------------------------------------------
# step representations


def _walsh_level(n: int) -> int:
    return n.bit_length()


def dyadic_values(system: SystemSpec, n: int, level: int) -> np.ndarray:
    """Values (+-1, int8) of r_n or w_n on the 2^level equal dyadic pieces."""
    system.check_index(n)
    if level > MAX_LEVEL:
        raise SizeExceeded(f"2^{level} pieces exceed the 2^{MAX_LEVEL} cap")
    j = np.arange(1 << level, dtype=np.int64)
    if system.kind == "rademacher":
        if n > level:
            raise ValueError("level too coarse for this index")
        bits = (j >> (level - n)) & 1
    elif system.kind == "walsh":
        if _walsh_level(n) > level:
            raise ValueError("level too coarse for this index")
        bits = np.zeros_like(j)
        for b in range(n.bit_length()):
            if n >> b & 1:
                bits ^= (j >> (level - b - 1)) & 1
    else:
        raise UnsupportedKind("dyadic values only exist for rademacher and walsh")
    return (1 - 2 * bits).astype(np.int8)


def _needed_level(system: SystemSpec, indices) -> int:
    if not indices:
        return 0
    if system.kind == "rademacher":
        return max(indices)
    return max(_walsh_level(n) for n in indices)


def function_step(system: SystemSpec, n: int) -> StepFunction:
    """Exact step representation of a single member function."""
    if system.kind == "custom":
        system.check_index(n)
        return system.functions[n - 1]
    if system.kind in TRIG_KINDS:
        raise UnsupportedKind("trigonometric functions have no step representation")
    level = _needed_level(system, [n])
    vals = dyadic_values(system, n, level)
    return StepFunction.uniform([Fraction(int(v)) for v in vals])


@dataclass(frozen=True)
class Polynomial:
    """P = sum_i a_i f_{indices[i]} for a finite system."""

    system: SystemSpec
    indices: tuple
    coefficients: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        idx = tuple(int(n) for n in self.indices)
        a = np.array(self.coefficients, dtype=float).reshape(-1)
        if len(idx) != a.size:
            raise ValueError("indices and coefficients differ in length")
        for n in idx:
            self.system.check_index(n)
        a.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coefficients", a)

    @property
    def m(self) -> int:
        return len(self.indices)

    @property
    def l1(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    def evaluate(self, x) -> np.ndarray:
        """Pointwise values (trigonometric kinds only)."""
        if self.system.kind not in TRIG_KINDS:
            raise UnsupportedKind("pointwise evaluation is for trigonometric kinds")
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        amp = float(self.system.amplitude)
        fn = np.sin if self.system.kind == "trig-sine" else np.cos
        for n, c in zip(self.indices, self.coefficients):
            if c:
                out += c * fn(2 * np.pi * self.system.freqs[n - 1] * x)
        return amp * out

    def lipschitz(self) -> float:
        """Bound on |P'| for trigonometric kinds."""
        amp = abs(float(self.system.amplitude))
        return 2 * np.pi * amp * float(sum(abs(c) * self.system.freqs[n - 1]
                                           for n, c in zip(self.indices, self.coefficients)))

    def max_frequency(self) -> int:
        return max((self.system.freqs[n - 1] for n in self.indices), default=0)


def polynomial(system: SystemSpec, indices: Sequence[int], a) -> Polynomial:
    return Polynomial(system, tuple(indices), np.asarray(a, dtype=float))


def polynomial_step(poly: Polynomial) -> StepFunction:
    """Exact piecewise-constant representation of a step-kind polynomial."""
    sys_ = poly.system
    if sys_.kind in TRIG_KINDS:
        raise UnsupportedKind("trigonometric polynomials are not step functions")
    if poly.m == 0:
        return StepFunction.constant(Fraction(0))
    if sys_.kind == "custom":
        return linear_combination([sys_.functions[n - 1] for n in poly.indices],
                                  poly.coefficients.tolist())
    level = _needed_level(sys_, poly.indices)
    if level > MAX_LEVEL:
        raise SizeExceeded(f"2^{level} pieces exceed the 2^{MAX_LEVEL} cap")
    vals = np.zeros(1 << level)
    for n, c in zip(poly.indices, poly.coefficients):
        vals = vals + c * dyadic_values(sys_, n, level)
    return StepFunction.uniform(vals.tolist())


@lru_cache(maxsize=32)
def sign_matrix(m: int) -> np.ndarray:
    """All 2^m sign vectors as rows, first coordinate most significant."""
    j = np.arange(1 << m)[:, None]
    shifts = np.arange(m - 1, -1, -1)[None, :]
    out = (1 - 2 * ((j >> shifts) & 1)).astype(np.int8)
    out.setflags(write=False)
    return out


def atoms(poly: Polynomial):
    """Values and probabilities of a step-kind polynomial on its atoms.

    Rademacher polynomials use the joint law of distinct r_n: uniform on
    {-1, 1}^m.  Walsh polynomials use the dyadic grid.  Custom ones use the
    pieces of the common refinement.
    """
    sys_ = poly.system
    if sys_.kind in TRIG_KINDS:
        raise UnsupportedKind("trigonometric polynomials have no atoms")
    if poly.m == 0:
        return np.zeros(1), np.ones(1)
    if sys_.kind == "rademacher":
        merged: dict = {}
        for n, c in zip(poly.indices, poly.coefficients):
            merged[n] = merged.get(n, 0.0) + c
        coefs = np.array(list(merged.values()))
        if coefs.size > 24:
            raise SizeExceeded("more than 2^24 sign patterns")
        S = sign_matrix(coefs.size)
        vals = np.zeros(S.shape[0])
        for i, c in enumerate(coefs):
            vals = vals + c * S[:, i]
        return vals, np.full(vals.size, 1.0 / vals.size)
    if sys_.kind == "walsh":
        level = _needed_level(sys_, poly.indices)
        vals = np.zeros(1 << level)
        for n, c in zip(poly.indices, poly.coefficients):
            vals = vals + c * dyadic_values(sys_, n, level)
        return vals, np.full(vals.size, 1.0 / vals.size)
    step = polynomial_step(poly)
    L = float(step.length)
    return np.array([float(v) for v in step.values]), np.array([float(w) / L for w in step.widths()])


def step_distribution(step: StepFunction):
    L = float(step.length)
    return np.array([float(v) for v in step.values]), np.array([float(w) / L for w in step.widths()])


class TailTable:
    """Exact tail function z -> P{|P| > z} for a discrete law."""

    def __init__(self, values, weights):
        order = np.argsort(np.abs(values), kind="stable")
        self.abs_sorted = np.abs(np.asarray(values, dtype=float))[order]
        w = np.asarray(weights, dtype=float)[order]
        self.suffix = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])

    def __call__(self, z):
        k = np.searchsorted(self.abs_sorted, z, side="right")
        return self.suffix[k]

    @property
    def sup(self) -> float:
        return float(self.abs_sorted[-1])

    def support_points(self) -> np.ndarray:
        return np.unique(self.abs_sorted)


def tail_table(poly: Polynomial) -> TailTable:
    return TailTable(*atoms(poly))


# --------------------------------------------------------------------------
# norms and tails


def _trig_grid_size(poly: Polynomial, degree_factor: int) -> int:
    need = degree_factor * poly.max_frequency() + 1
    return max(64, 1 << int(math.ceil(math.log2(need + 1))))


def _trig_zeros(poly: Polynomial) -> np.ndarray:
    N = 64 * max(poly.max_frequency(), 1)
    x = np.linspace(0.0, 1.0, N + 1)
    y = poly.evaluate(x)
    roots = []
    for i in np.nonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)[0]:
        roots.append(optimize.brentq(lambda u: float(poly.evaluate(np.array([u]))[0]),
                                     x[i], x[i + 1], xtol=1e-15))
    roots.extend(x[np.nonzero(y == 0)[0]].tolist())
    return np.unique(np.clip(np.array(roots + [0.0, 1.0]), 0.0, 1.0))


def lt_norm(poly: Polynomial, t: float) -> float:
    """(E |P|^t)^(1/t), t >= 1."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if poly.m == 0 or not np.any(poly.coefficients):
        return 0.0
    if poly.system.is_step:
        vals, w = atoms(poly)
        vmax = float(np.max(np.abs(vals)))
        if vmax == 0:
            return 0.0
        return vmax * float(np.sum(w * (np.abs(vals) / vmax) ** t)) ** (1.0 / t)
    if float(t).is_integer() and int(t) % 2 == 0:
        # |P|^t is a trig polynomial of degree t*K: the rectangle rule is exact
        N = _trig_grid_size(poly, int(t))
        x = np.arange(N) / N
        y = np.abs(poly.evaluate(x))
        s = float(np.max(y))
        return s * float(np.mean((y / s) ** t)) ** (1.0 / t)
    zeros = _trig_zeros(poly)
    total = 0.0
    for lo, hi in zip(zeros[:-1], zeros[1:]):
        if hi - lo <= 0:
            continue
        val, _ = integrate.quad(lambda u: abs(float(poly.evaluate(np.array([u]))[0])) ** t,
                                lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return total ** (1.0 / t)


def tail_bracket(poly: Polynomial, z: float, tol: float = 1e-6):
    """Rigorous (lower, upper) bounds on P{|P| > z} for a trigonometric polynomial.

    Cells are classified by their centre value and the derivative bound; only
    undecided cells are split, until their total measure is below ``tol``.
    """
    if poly.system.is_step:
        p = float(tail_table(poly)(z))
        return p, p
    L = poly.lipschitz()
    if L == 0:
        return 0.0, 0.0
    n0 = max(1024, 8 * poly.max_frequency())
    width = 1.0 / n0
    centers = (np.arange(n0) + 0.5) * width
    inside = 0.0
    for _ in range(60):
        v = np.abs(poly.evaluate(centers))
        slack = L * width / 2
        yes = v - slack > z
        no = v + slack <= z
        inside += width * np.count_nonzero(yes)
        undecided = centers[~(yes | no)]
        if undecided.size * width <= tol:
            return inside, inside + undecided.size * width
        width /= 2
        centers = np.concatenate([undecided - width / 2, undecided + width / 2])
    return inside, inside + centers.size * width  # pragma: no cover


def tail_probability(poly: Polynomial, z: float) -> float:
    """P{|P| > z}: exact for step kinds, bracket midpoint (width <= 1e-6) for trig."""
    if z < 0:
        raise ValueError("z must be nonnegative")
    if poly.system.is_step:
        return float(tail_table(poly)(z))
    lo, hi = tail_bracket(poly, z)
    return 0.5 * (lo + hi)


def sup_norm_bracket(poly: Polynomial, rtol: float = 1e-9):
    """(lower, upper) bounds on sup |P| by branch and bound on cells."""
    if poly.system.is_step:
        s = tail_table(poly).sup
        return s, s
    L = poly.lipschitz()
    if L == 0:
        return 0.0, 0.0
    n0 = max(1024, 16 * poly.max_frequency())
    width = 1.0 / n0
    centers = (np.arange(n0) + 0.5) * width
    best = 0.0
    for _ in range(80):
        v = np.abs(poly.evaluate(centers))
        best = max(best, float(v.max()))
        slack = L * width / 2
        upper = float((v + slack).max())
        if upper - best <= rtol * best:
            return best, upper
        keep = centers[v + slack > best * (1 + rtol)]
        width /= 2
        centers = np.concatenate([keep - width / 2, keep + width / 2])
        if keep.size == 0:
            return best, best * (1 + rtol)
    return best, upper  # pragma: no cover


def sup_norm(poly: Polynomial) -> float:
    return sup_norm_bracket(poly)[1]
