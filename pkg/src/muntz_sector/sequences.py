"""Exponent sequences, their step functions, and the sector growth condition.

An exponent sequence is a strictly increasing list of positive reals
``lambda_1 < lambda_2 < ...`` (with the implicit ``lambda_0 = 0``).  It is
either an explicit finite list or one of three generator rules:

* ``arithmetic``  -- ``a + d*n``
* ``power``       -- ``n**p``
* ``progression`` -- ``n / b``

Generator rules can be materialized to any length; explicit lists stop at
their horizon and refuse queries beyond it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special as sps

from .errors import EmptyGrid, HorizonExceeded, MuntzError, NonPositiveGap

EULER_GAMMA = 0.57721566490153286061

GENERATOR_KINDS = ("arithmetic", "power", "progression")


class Density(str, Enum):
    DENSE = "dense"
    INCOMPLETE = "incomplete"
    INCONCLUSIVE = "inconclusive"


# --------------------------------------------------------------------------
# step functions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StepAccumulator:
    """Right-continuous nondecreasing step function on ``[0, inf)``.

    ``value_at(t)`` is the sum of the jumps located at points ``<= t``.
    """

    points: np.ndarray
    sizes: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        sz = np.asarray(self.sizes, dtype=float).ravel()
        if pts.shape != sz.shape:
            raise ValueError("points and sizes differ in length")
        if pts.size and (np.any(pts <= 0) or np.any(np.diff(pts) <= 0)):
            raise ValueError("jump points must be positive and increasing")
        if np.any(sz < 0):
            raise ValueError("jump sizes must be nonnegative")
        keep = sz > 0
        pts, sz = pts[keep], sz[keep]
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "sizes", sz)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(sz)]))

    def value_at(self, t):
        idx = np.searchsorted(self.points, t, side="right")
        out = self._cum[idx]
        return float(out) if np.ndim(out) == 0 else out

    def left_limit(self, t):
        idx = np.searchsorted(self.points, t, side="left")
        out = self._cum[idx]
        return float(out) if np.ndim(out) == 0 else out

    def jump_at(self, a: float) -> float:
        return self.value_at(a) - self.left_limit(a)

    @property
    def total(self) -> float:
        return float(self._cum[-1])


class StepTable:
    """Step-constant interpolation of a sampled (decreasing) function.

    Between samples the value of the nearest sample on the left is used,
    which over-estimates a decreasing function and so keeps growth checks
    conservative.  Left of the first sample the first value is returned.
    """

    def __init__(self, xs: Sequence[float], values: Sequence[float]):
        self.xs = np.asarray(xs, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.xs.ndim != 1 or self.xs.shape != self.values.shape or self.xs.size == 0:
            raise ValueError("need matching nonempty 1-d sample arrays")
        if np.any(np.diff(self.xs) <= 0):
            raise ValueError("sample abscissae must increase")

    @classmethod
    def from_function(cls, fn: Callable[[float], float], xs: Iterable[float]) -> "StepTable":
        xs = np.asarray(list(xs), dtype=float)
        return cls(xs, [fn(x) for x in xs])

    def __call__(self, x):
        idx = np.searchsorted(self.xs, x, side="right") - 1
        idx = np.clip(idx, 0, self.xs.size - 1)
        out = self.values[idx]
        return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# exponent sequences
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentSequence:
    """Strictly increasing positive exponents, explicit or rule-generated.

    ``values`` holds the prefix materialized up to ``horizon``.  Generator
    sequences extend on demand; explicit lists do not.
    """

    kind: str
    params: tuple = ()
    horizon: float = 0.0
    values: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "list":
            vals = np.asarray(self.values if self.values is not None else self.params, dtype=float).ravel()
            if vals.size == 0:
                raise MuntzError("explicit sequence must be nonempty")
            if np.any(~np.isfinite(vals)) or vals[0] <= 0:
                raise NonPositiveGap("exponents must be finite and positive")
            if np.any(np.diff(vals) <= 0):
                raise NonPositiveGap("exponents must be strictly increasing (ties have zero gap)")
            horizon = max(float(self.horizon), float(vals[-1]))
            object.__setattr__(self, "params", tuple(float(v) for v in vals))
            object.__setattr__(self, "horizon", horizon)
            object.__setattr__(self, "values", vals)
            return
        if self.kind not in GENERATOR_KINDS:
            raise MuntzError(f"unknown sequence kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        self._validate_rule()
        horizon = float(self.horizon) if self.horizon else float(self.term(50))
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "values", self.head(self._rule_count(horizon)))

    # -- rule machinery ---------------------------------------------------

    def _validate_rule(self):
        if self.kind == "arithmetic":
            a, d = self.params
            if d <= 0 or a + d <= 0:
                raise NonPositiveGap("arithmetic rule needs d > 0 and a + d > 0")
        elif self.kind == "power":
            (p,) = self.params
            if p < 1:
                # consecutive differences (n+1)^p - n^p tend to zero
                raise NonPositiveGap("power rule needs p >= 1 for a positive gap")
        else:
            (b,) = self.params
            if b <= 0:
                raise MuntzError("progression parameter b must be positive")

    @property
    def is_generator(self) -> bool:
        return self.kind != "list"

    def term(self, n):
        """Exponent(s) with 1-based index ``n`` (generator rules only)."""
        n = np.asarray(n, dtype=float)
        if self.kind == "arithmetic":
            a, d = self.params
            out = a + d * n
        elif self.kind == "power":
            out = n ** self.params[0]
        elif self.kind == "progression":
            out = n / self.params[0]
        else:
            idx = np.asarray(n, dtype=int) - 1
            if np.any(idx >= self.values.size):
                raise HorizonExceeded("index beyond explicit list")
            out = self.values[idx]
        return float(out) if out.ndim == 0 else out

    def _rule_count(self, t: float) -> int:
        if t <= 0:
            return 0
        if self.kind == "arithmetic":
            a, d = self.params
            n = math.floor((t - a) / d)
        elif self.kind == "power":
            n = math.floor(t ** (1.0 / self.params[0]))
        else:
            n = math.floor(self.params[0] * t)
        n = max(n, 0)
        # repair roundoff against the exponents actually produced by term()
        while n > 0 and self.term(n) > t:
            n -= 1
        while self.term(n + 1) <= t:
            n += 1
        return n

    # -- basic queries ----------------------------------------------------

    def head(self, n: int) -> np.ndarray:
        """First ``n`` exponents."""
        n = int(n)
        if self.kind == "list":
            if n > self.values.size:
                raise HorizonExceeded(f"explicit list has only {self.values.size} exponents")
            return self.values[:n]
        return np.asarray(self.term(np.arange(1, n + 1)), dtype=float).reshape(-1)

    def count(self, t):
        """Counting function: number of exponents ``<= t``."""
        if np.ndim(t) == 0:
            t = float(t)
            if self.kind == "list":
                self._check_horizon(t)
                return int(np.searchsorted(self.values, t, side="right"))
            return self._rule_count(t)
        t = np.asarray(t, dtype=float)
        if self.kind == "list":
            self._check_horizon(np.max(t))
            return np.searchsorted(self.values, t, side="right")
        top = self.head(self._rule_count(float(np.max(t))))
        return np.searchsorted(top, t, side="right")

    def exponents_upto(self, t: float) -> np.ndarray:
        return self.head(self.count(t))

    def _check_horizon(self, t: float):
        if self.kind == "list" and t > self.horizon * (1 + 1e-15):
            raise HorizonExceeded(f"t={t} beyond explicit horizon {self.horizon}")

    def characteristic_logarithm(self, t):
        """Sum of ``1/lambda_n`` over ``0 < lambda_n <= t`` (exact partial sum)."""
        if np.ndim(t) == 0:
            vals = self.exponents_upto(float(t))
            return math.fsum(1.0 / vals)
        t = np.asarray(t, dtype=float)
        counts = self.count(t)
        vals = self.head(int(np.max(counts)) if counts.size else 0)
        cum = np.concatenate([[0.0], np.cumsum(1.0 / vals)])
        return cum[counts]

    def gap(self) -> float:
        """Infimum of consecutive differences, counting ``lambda_1 - 0``."""
        if self.kind == "arithmetic":
            a, d = self.params
            return min(a + d, d)
        if self.kind == "power":
            return 1.0
        if self.kind == "progression":
            return 1.0 / self.params[0]
        diffs = np.diff(np.concatenate([[0.0], self.values]))
        g = float(diffs.min())
        if g <= 0:
            raise NonPositiveGap("nonpositive gap")
        return g

    def tail_power_sum(self, n: int, j: float) -> float:
        """``sum_{m > n} lambda_m ** (-j)`` (closed form for generator rules)."""
        if self.kind == "arithmetic":
            a, d = self.params
            return float(d ** (-j) * sps.zeta(j, n + 1 + a / d))
        if self.kind == "power":
            return float(sps.zeta(self.params[0] * j, n + 1))
        if self.kind == "progression":
            return float(self.params[0] ** j * sps.zeta(j, n + 1))
        return math.fsum(self.values[n:] ** (-j))

    def with_horizon(self, horizon: float) -> "ExponentSequence":
        if self.kind == "list":
            raise HorizonExceeded("explicit lists cannot be re-materialized")
        return ExponentSequence(self.kind, self.params, horizon)

    def step_function(self, which: str = "log", upto: float | None = None) -> StepAccumulator:
        """Characteristic logarithm (``which='log'``) or counting function as a step function."""
        vals = self.exponents_upto(self.horizon if upto is None else upto)
        sizes = 1.0 / vals if which == "log" else np.ones_like(vals)
        return StepAccumulator(vals, sizes)

    def describe(self) -> str:
        if self.kind == "list":
            return "list:" + ",".join(repr(v) for v in self.params)
        return self.kind + ":" + ":".join(repr(p) for p in self.params)

    def to_config(self) -> dict:
        return {"kind": self.kind, "parameters": list(self.params), "horizon": self.horizon}


def from_values(values: Iterable[float], horizon: float | None = None) -> ExponentSequence:
    vals = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    return ExponentSequence("list", tuple(vals), horizon or (float(vals[-1]) if vals.size else 0.0), vals)


def arithmetic(a: float, d: float, horizon: float = 0.0) -> ExponentSequence:
    return ExponentSequence("arithmetic", (a, d), horizon)


def power(p: float, horizon: float = 0.0) -> ExponentSequence:
    return ExponentSequence("power", (p,), horizon)


def arithmetic_progression(b: float, horizon: float = 0.0) -> ExponentSequence:
    """The progression ``{n / b : n >= 1}``.

    Its characteristic logarithm is ``b*log t + b*log b + b*gamma + O(1/t)``.
    """
    if b <= 0:
        raise MuntzError("b must be positive")
    return ExponentSequence("progression", (b,), horizon)


def progression_log_asymptote(b: float, t):
    return b * np.log(t) + b * math.log(b) + b * EULER_GAMMA


def log_asymptote(seq: ExponentSequence) -> tuple[float, float]:
    """Constants ``(b, A2)`` with ``lambda(t) = b log t + A2 + o(1)`` for generator rules.

    ``power:p`` with ``p > 1`` converges (``b = 0``, ``A2 = zeta(p)``); ``power:1``
    is the harmonic series; ``arithmetic:a:d`` gives ``b = 1/d`` and
    ``A2 = b log b - b digamma(1 + a b)``.
    """
    if seq.kind == "power":
        (p,) = seq.params
        if p == 1:
            return 1.0, EULER_GAMMA
        return 0.0, float(sps.zeta(p))
    if seq.kind == "progression":
        (b,) = seq.params
        return b, b * math.log(b) + b * EULER_GAMMA
    if seq.kind == "arithmetic":
        a, d = seq.params
        b = 1.0 / d
        return b, b * math.log(b) - b * float(sps.digamma(1.0 + a * b))
    raise MuntzError("explicit lists carry no asymptotic law; pass b and A2 explicitly")


def parse_sequence(text: str, horizon: float = 0.0) -> ExponentSequence:
    """Parse the ``kind:params`` mini-language (``power:2``, ``list:1.5,2.7``...)."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "list":
            vals = [float(v) for v in rest.split(",") if v.strip()]
            return from_values(vals, horizon or None)
        params = tuple(float(v) for v in rest.split(":")) if rest else ()
    except ValueError as exc:
        raise MuntzError(f"cannot parse sequence {text!r}: {exc}") from None
    arity = {"arithmetic": 2, "power": 1, "progression": 1}
    if kind not in arity:
        raise MuntzError(f"unknown sequence kind {kind!r}")
    if len(params) != arity[kind]:
        raise MuntzError(f"{kind} takes {arity[kind]} parameter(s), got {len(params)}")
    return ExponentSequence(kind, params, horizon)


def sequence_from_config(doc: dict) -> ExponentSequence:
    unknown = set(doc) - {"kind", "parameters", "horizon"}
    if unknown:
        raise MuntzError(f"unknown sequence fields: {sorted(unknown)}")
    kind = doc["kind"]
    params = tuple(doc.get("parameters", ()))
    horizon = float(doc.get("horizon", 0.0))
    if kind == "list":
        return from_values(params, horizon or None)
    return ExponentSequence(kind, params, horizon)


# --------------------------------------------------------------------------
# module-level operations
# --------------------------------------------------------------------------


def characteristic_logarithm(seq: ExponentSequence, t):
    return seq.characteristic_logarithm(t)


def counting_function(seq: ExponentSequence, t):
    return seq.count(t)


def gap(seq: ExponentSequence) -> float:
    return seq.gap()


def muntz_density_test(seq: ExponentSequence) -> Density:
    """Decide divergence of ``sum 1/lambda_n`` when the rule makes it decidable."""
    if seq.kind == "list":
        return Density.INCONCLUSIVE
    if seq.kind == "power":
        return Density.INCOMPLETE if seq.params[0] > 1 else Density.DENSE
    return Density.DENSE


@dataclass(frozen=True)
class Condition3Report:
    holds: bool
    worst_margin: float
    worst_pair: tuple
    margins: np.ndarray = field(repr=False, compare=False)


def check_condition3(seq: ExponentSequence, alpha: float, eps, grid) -> Condition3Report:
    """Check ``lambda(y) - lambda(x) <= (alpha/pi) log(y/x) + eps(x)`` on grid pairs.

    ``eps`` is a callable (typically a :class:`StepTable`); ``grid`` is an
    iterable of ``(x, y)`` pairs with ``y > x >= 1``.
    """
    pairs = np.asarray(list(grid), dtype=float).reshape(-1, 2)
    if pairs.shape[0] == 0:
        raise EmptyGrid("condition check needs at least one (x, y) pair")
    x, y = pairs[:, 0], pairs[:, 1]
    if np.any(x < 1) or np.any(y <= x):
        raise ValueError("grid pairs must satisfy y > x >= 1")
    if not 0 <= alpha < math.pi:
        raise ValueError("alpha must lie in [0, pi)")
    lam = seq.characteristic_logarithm
    eps_x = np.array([eps(v) for v in x], dtype=float)
    margins = eps_x + (alpha / math.pi) * np.log(y / x) - (lam(y) - lam(x))
    i = int(np.argmin(margins))
    return Condition3Report(bool(margins[i] >= 0), float(margins[i]), (float(x[i]), float(y[i])), margins)
