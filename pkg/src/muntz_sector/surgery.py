"""Subsequence surgery on exponent sequences.

Given ``Lambda`` and a denser comparison sequence ``Lambda'`` (typically the
progression ``{n/b}``), :func:`build_lambda_star` extracts a subsequence
``Lambda*`` of ``Lambda'`` with

    |lambda(x) + lambda*(x) - lambda'(x) - A1| <= eps(x) + 1/x,

where ``lambda``, ``lambda*``, ``lambda'`` are characteristic logarithms and
``eps`` controls how much faster ``lambda`` may grow than ``lambda'``.  The
construction runs through the comparison function
``phi(x) = inf_{s >= x} (lambda'(s) - lambda(s))`` and the counting function
``[Phi(t)]`` with ``Phi(t) = int_0^t s dphi(s)``.

:func:`adjust_double_points` then moves elements of ``Lambda*`` that sit within
``h1`` of ``Lambda`` so that the union becomes uniformly separated.

Everything lives on a finite window ``[0, horizon]``; checks of "for all x"
statements use ``[x_min, 0.9 horizon]`` so that the infimum defining ``phi``
is not cut off at the edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HorizonTooSmall, MuntzError
from .sequences import ExponentSequence, StepAccumulator, StepTable, from_values

EDGE_FRACTION = 0.9
ROUNDING_SLACK = 1e-12


@dataclass(frozen=True)
class ComparisonFunction:
    """``phi(x) = base + steps.value_at(x)``: nondecreasing, constant between jumps."""

    base: float
    steps: StepAccumulator
    horizon: float

    def __call__(self, x):
        return self.base + self.steps.value_at(x)

    def jump_at(self, a: float) -> float:
        return self.steps.jump_at(a)


def _log_steps(seq: ExponentSequence, horizon: float):
    vals = seq.exponents_upto(horizon)
    return vals, 1.0 / vals


def _difference(seq: ExponentSequence, seq_prime: ExponentSequence, horizon: float):
    """Jump points of ``D = lambda' - lambda`` on ``(0, horizon]`` and ``D`` right after each."""
    lam, inv = _log_steps(seq, horizon)
    lamp, invp = _log_steps(seq_prime, horizon)
    pts = np.concatenate([lam, lamp])
    jumps = np.concatenate([-inv, invp])
    order = np.argsort(pts, kind="stable")
    pts, jumps = pts[order], jumps[order]
    uniq, start = np.unique(pts, return_index=True)
    sizes = np.add.reduceat(jumps, start) if pts.size else jumps
    return uniq, np.cumsum(sizes)


def comparison_phi(seq: ExponentSequence, seq_prime: ExponentSequence, horizon: float) -> ComparisonFunction:
    """``phi(x) = inf{lambda'(s) - lambda(s) : x <= s <= horizon}``.

    Raises :class:`HorizonTooSmall` when the difference keeps falling in the
    last tenth of the window, so that the truncated infimum is not trustworthy.
    """
    if horizon <= 0:
        raise MuntzError("horizon must be positive")
    pts, D = _difference(seq, seq_prime, horizon)
    if pts.size == 0:
        return ComparisonFunction(0.0, StepAccumulator(np.zeros(0), np.zeros(0)), horizon)
    edge = pts >= EDGE_FRACTION * horizon
    inner = (pts >= 0.5 * EDGE_FRACTION * horizon) & ~edge
    if np.any(edge) and np.any(inner) and D[edge].min() < D[inner].min() - 1e-12:
        raise HorizonTooSmall(
            f"lambda' - lambda is still decreasing near the horizon {horizon:g}; "
            "the infimum defining phi needs a longer window"
        )
    # suffix minima: values of phi on [pts_i, pts_{i+1}); before the first point D = 0
    suffix = np.minimum.accumulate(D[::-1])[::-1]
    base = min(0.0, float(suffix[0]))
    levels = np.concatenate([[base], suffix])
    inc = np.diff(levels)
    keep = inc > 0
    return ComparisonFunction(base, StepAccumulator(pts[keep], inc[keep]), horizon)


def minimal_epsilon(seq: ExponentSequence, seq_prime: ExponentSequence, horizon: float) -> StepTable:
    """Smallest decreasing ``eps`` with ``lambda(y) - lambda(x) <= lambda'(y) - lambda'(x) + eps(x)`` on the window.

    Sampled at the jump points of ``lambda' - lambda`` (and at 0) as a
    :class:`StepTable`.
    """
    pts, D = _difference(seq, seq_prime, horizon)
    E = -np.concatenate([[0.0], D])
    xs = np.concatenate([[0.0], pts])
    need = np.maximum.accumulate(E[::-1])[::-1] - E
    # decreasing envelope
    env = np.maximum.accumulate(need[::-1])[::-1]
    return StepTable(xs, env)


@dataclass
class SurgeryResult:
    """Outcome of :func:`build_lambda_star`.

    ``A1`` is the tail-average estimate used for the residuals; ``A1_integral``
    is ``-phi(0) - int_0^H (Phi - [Phi]) ds/s^2``, the constant obtained by
    integrating ``lambda*(x) = int_0^x d[Phi](s)/s`` by parts, truncated at the
    horizon (the omitted piece is at most ``1/H``).
    ``residuals`` has columns ``x, lambda(x) + lambda*(x) - lambda'(x) - A1``.
    """

    lambda_star: np.ndarray
    A1: float
    A1_integral: float
    A1_spread: float
    residuals: np.ndarray
    phi: ComparisonFunction = field(repr=False)
    Phi_jumps: np.ndarray = field(repr=False)
    horizon: float = 0.0

    @property
    def sequence(self) -> ExponentSequence | None:
        """``Lambda*`` as an explicit sequence (``None`` when empty)."""
        if self.lambda_star.size == 0:
            return None
        return from_values(self.lambda_star, self.horizon)

    def characteristic_logarithm(self, x):
        return _char_log(self.lambda_star, x)


def _char_log(values: np.ndarray, x):
    cum = np.concatenate([[0.0], np.cumsum(1.0 / values)]) if values.size else np.zeros(1)
    idx = np.searchsorted(values, x, side="right")
    out = cum[idx]
    return float(out) if np.ndim(out) == 0 else out


def _default_samples(horizon: float, x_min: float, count: int = 200) -> np.ndarray:
    return np.geomspace(x_min, EDGE_FRACTION * horizon, count)


def build_lambda_star(phi: ComparisonFunction, seq: ExponentSequence, seq_prime: ExponentSequence,
                      samples: np.ndarray | None = None, x_min: float = 1.0) -> SurgeryResult:
    """Extract ``Lambda*`` from ``[Phi(t)]`` and estimate ``A1``.

    ``Phi`` jumps by ``a * dphi(a)`` at each jump ``a`` of ``phi``; every
    increment of its integer part places one element of ``Lambda*`` at ``a``.
    """
    H = phi.horizon
    a = phi.steps.points
    dphi = phi.steps.sizes
    Phi = np.cumsum(a * dphi)
    # integer parts are read with a small slack so that exact integers are not lost to rounding
    floors = np.floor(Phi + ROUNDING_SLACK * np.maximum(1.0, np.abs(Phi)))
    counts = np.diff(np.concatenate([[0.0], floors])).astype(int)
    if np.any(counts > 1):
        raise MuntzError("Phi jumped by more than one; the comparison jumps exceed 1/a")
    star = a[counts == 1]
    xs = _default_samples(H, x_min) if samples is None else np.asarray(samples, dtype=float)
    base = seq.characteristic_logarithm(xs) + _char_log(star, xs) - seq_prime.characteristic_logarithm(xs)
    tail = xs >= 0.5 * xs.max()
    A1 = float(np.mean(base[tail]))
    spread = float(np.max(base[tail]) - np.min(base[tail]))
    # truncated integral of the fractional part of Phi against ds/s^2
    frac = Phi - floors
    right = np.concatenate([a[1:], [H]])
    A1_int = -phi.base - math.fsum(frac * (1.0 / a - 1.0 / right))
    return SurgeryResult(star, A1, A1_int, spread, np.column_stack([xs, base - A1]), phi, Phi, H)


def lambda_star_pipeline(seq: ExponentSequence, seq_prime: ExponentSequence, horizon: float,
                         samples: np.ndarray | None = None, x_min: float = 1.0) -> SurgeryResult:
    return build_lambda_star(comparison_phi(seq, seq_prime, horizon), seq, seq_prime, samples, x_min)


@dataclass
class AdjustmentResult:
    """``Lambda**`` with the separation ``h1``, the shift constant ``A3`` and its checks."""

    lambda_double_star: np.ndarray
    h1: float
    A3: float
    shifted_right: int
    shifted_left: int
    disjoint: bool
    union_gap: float

    @property
    def separated(self) -> bool:
        return self.disjoint and self.union_gap >= self.h1 * (1 - 1e-12)

    def characteristic_logarithm(self, x):
        return _char_log(self.lambda_double_star, x)


def adjust_double_points(seq: ExponentSequence, lambda_star, b: float) -> AdjustmentResult:
    """Move elements of ``Lambda*`` away from ``Lambda`` by ``h1 = min(gap(Lambda), b)/4``.

    With ``lambda_n <= x < lambda_{n+1}``: ``x`` stays when it is at least ``h1``
    from both neighbours, moves right by ``h1`` when within ``h1`` above
    ``lambda_n`` and left by ``h1`` when within ``h1`` below ``lambda_{n+1}``.

    When ``Lambda*`` lies in ``{n/b}`` with ``b < 1`` (the sector case
    ``b = alpha/pi``) the union is ``h1``-separated.  For ``b >= 1``, ``h1`` can
    exceed a quarter of the spacing ``1/b`` and a shifted point may land on its
    neighbour; ``separated`` reports this instead of raising.
    """
    if b <= 0:
        raise MuntzError("b must be positive")
    star = np.asarray(lambda_star, dtype=float)
    h1 = min(seq.gap(), b) / 4.0
    top = float(star.max()) if star.size else 0.0
    lam = seq.exponents_upto(top + 2.0 * seq.gap() + 1.0)
    if lam.size == 0 or lam[-1] <= top:
        lam = seq.head(seq.count(top) + 2)
    n = np.searchsorted(lam, star, side="right") - 1
    lower = np.where(n >= 0, lam[np.clip(n, 0, lam.size - 1)], -np.inf)
    upper = lam[np.clip(n + 1, 0, lam.size - 1)]
    right = star < lower + h1
    left = (star > upper - h1) & ~right
    new = star + h1 * right - h1 * left
    A3 = math.fsum(1.0 / star[right | left] - 1.0 / new[right | left])
    merged = np.sort(np.concatenate([seq.exponents_upto(top + 2.0 * seq.gap() + 1.0), new]))
    disjoint = not np.any(np.isin(new, lam))
    gap = float(np.min(np.diff(merged))) if merged.size > 1 else math.inf
    return AdjustmentResult(new, h1, A3, int(right.sum()), int(left.sum()), disjoint, gap)


def shift_residuals(star: np.ndarray, adjusted: AdjustmentResult, xs) -> np.ndarray:
    """``lambda*(x) - lambda**(x) - A3`` at ``xs``."""
    xs = np.asarray(xs, dtype=float)
    return _char_log(star, xs) - adjusted.characteristic_logarithm(xs) - adjusted.A3
