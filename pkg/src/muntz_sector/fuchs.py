"""The canonical product G, its sieve region, empirical growth constants, and derived kernels.

    G(z) = prod_n (lambda_n - z)/(lambda_n + z) * exp(2 z / lambda_n)

is evaluated as an exact finite product over ``n <= N`` plus an analytic
tail.  With ``w = z/lambda`` each factor has logarithm
``log((1-w)/(1+w)) + 2w = -2 (w^3/3 + w^5/5 + ...)``, so the tail over
``n > N`` is ``-2 sum_j z^j S_j / j`` with power sums ``S_j`` that are
closed-form (Hurwitz zeta) for generator rules.

All kernels (``g``, ``g0``, ``psi_k``) share one shape,

    K(z) = [z^2/(1+z)^4] * G(z) [/(z - lambda_k)] * exp(-(a + delta) z) / Gamma(1/2 + c z),

and are computed in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import special
from .errors import (
    EmptyGrid,
    KernelOverflow,
    MuntzError,
    PoleError,
    SieveViolation,
    TruncationInsufficient,
)
from .sequences import ExponentSequence, log_asymptote

# odd powers carried by the tail series
_TAIL_POWERS = np.arange(3, 122, 2)
_SERIES_CUT = 0.25
_SMALL_W_POWERS = np.arange(3, 34, 2)
LOG_MAX = 709.0
MIN_CERT_X = 1e-6


def _factor_logs(w):
    """``log((1-w)/(1+w)) + 2w`` elementwise, accurate for small ``|w|``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log((1.0 - w) / (1.0 + w)) + 2.0 * w
    small = np.abs(w) < _SERIES_CUT
    if np.any(small):
        out[small] = _small_series(w[small])
    return out


def _small_series(w):
    w2 = w * w
    acc = np.zeros(w.shape, dtype=complex)
    for j in _SMALL_W_POWERS[::-1]:
        acc = acc * w2 + 1.0 / j
    return -2.0 * acc * w2 * w


@dataclass(frozen=True)
class TruncatedProduct:
    """Evaluation state for ``G``: exact product over the first ``order`` exponents plus tail."""

    sequence: ExponentSequence
    order: int
    guard: float | None = None
    exponents: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seq = self.sequence
        n = int(self.order)
        if n < 1:
            raise MuntzError("truncation order must be positive")
        if not seq.is_generator and n > seq.values.size:
            raise TruncationInsufficient(f"explicit list has only {seq.values.size} exponents")
        object.__setattr__(self, "order", n)
        object.__setattr__(self, "exponents", seq.head(n))
        if self.guard is None:
            object.__setattr__(self, "guard", seq.gap() / 40.0)

    @classmethod
    def for_radius(cls, seq: ExponentSequence, radius: float, ratio: float = 10.0, guard=None):
        """Smallest order with ``lambda_N >= ratio * radius`` (whole list if explicit)."""
        if not seq.is_generator:
            return cls(seq, seq.values.size, guard)
        n = max(seq.count(ratio * max(radius, 1e-300)), 1)
        while seq.term(n) < ratio * radius:
            n += 1
        return cls(seq, n, guard)

    @property
    def delta0(self) -> float:
        return self.sequence.gap() / 4.0

    @cached_property
    def _next_exponent(self) -> float:
        seq = self.sequence
        if seq.is_generator:
            return float(seq.term(self.order + 1))
        if self.order < seq.values.size:
            return float(seq.values[self.order])
        return math.inf

    @cached_property
    def _tail_sums(self) -> np.ndarray:
        seq = self.sequence
        if not seq.is_generator and self.order >= seq.values.size:
            return np.zeros(_TAIL_POWERS.size)
        return np.array([seq.tail_power_sum(self.order, float(j)) for j in _TAIL_POWERS])

    @property
    def radius_limit(self) -> float:
        """Largest ``|z|`` the tail series is trusted for."""
        return 0.5 * self._next_exponent

    @property
    def accurate_radius(self) -> float:
        """Radius of the full 1e-10 relative accuracy contract."""
        return self.exponents[-1] / 10.0

    def _prepare(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(np.abs(z) > self.radius_limit):
            raise TruncationInsufficient(
                f"|z|={np.max(np.abs(z)):.4g} exceeds {self.radius_limit:.4g}, half the first "
                f"omitted exponent; raise the truncation order"
            )
        left = z.real < 0
        if np.any(left):
            zl = z[left]
            lam = self.exponents
            idx = np.clip(np.searchsorted(lam, -zl.real), 1, lam.size - 1) if lam.size > 1 else np.zeros(zl.size, int)
            near = np.abs(zl + lam[idx])
            if lam.size > 1:
                near = np.minimum(near, np.abs(zl + lam[idx - 1]))
            if np.any(near < self.guard):
                raise PoleError(f"point within {self.guard:g} of a pole of G")
        return z

    def _tail(self, z):
        s = self._tail_sums
        if not np.any(s):
            return np.zeros(z.shape, dtype=complex), np.zeros(z.shape)
        z2 = z * z
        acc = np.zeros(z.shape, dtype=complex)
        for j, sj in zip(_TAIL_POWERS[::-1], s[::-1]):
            acc = acc * z2 + sj / j
        val = -2.0 * acc * z2 * z
        # remainder of the series: sum_{n > N} sum_{j > J} (|z|/lambda_n)^j
        q = np.abs(z) / self._next_exponent
        terms = 1.0 + self._next_exponent / (self.sequence.gap() * (_TAIL_POWERS[-1] + 1))
        err = 2.0 * q ** (_TAIL_POWERS[-1] + 2) * terms / (1.0 - q * q)
        return val, err

    @lru_cache(maxsize=8)
    def _head(self, skip):
        """Exponents (minus ``skip``) and their suffix power sums ``sum_{n >= m} lambda_n^-j``."""
        lam = self.exponents if skip is None else np.delete(self.exponents, skip)
        powers = lam[None, :] ** (-_SMALL_W_POWERS[:, None].astype(float))
        suffix = np.concatenate([np.cumsum(powers[:, ::-1], axis=1)[:, ::-1],
                                 np.zeros((powers.shape[0], 1))], axis=1)
        return lam, suffix

    def _exact_sum(self, z, skip: int | None = None):
        lam, suffix = self._head(skip)
        out = np.zeros(z.shape, dtype=complex)
        order = np.argsort(np.abs(z))
        mods = np.abs(z)[order]
        i = 0
        while i < z.size:
            # chunks of similar modulus: factors with lambda > |z|/cut use pooled power sums
            step = z.size - i
            while True:
                split = int(np.searchsorted(lam, mods[i + step - 1] / _SERIES_CUT, side="right"))
                if step * split <= 2_000_000 or step <= 64:
                    break
                step = max(64, min(step // 2, 2_000_000 // max(split, 1)))
            sel = order[i:i + step]
            zc = z[sel]
            acc = np.zeros(zc.shape, dtype=complex)
            if split:
                acc = _factor_logs(zc[:, None] / lam[None, :split]).sum(axis=1)
            z2 = zc * zc
            ser = np.zeros(zc.shape, dtype=complex)
            for j in range(_SMALL_W_POWERS.size - 1, -1, -1):
                ser = ser * z2 + suffix[j, split] / _SMALL_W_POWERS[j]
            out[sel] = acc - 2.0 * ser * z2 * zc
            i += step
        return out

    def log_G(self, z, skip: int | None = None):
        """``log G(z)`` (any branch); ``skip`` drops the factor of the given 0-based index."""
        scalar = np.ndim(z) == 0
        zz = self._prepare(z)
        val = self._exact_sum(zz, skip) + self._tail(zz)[0]
        return val[0] if scalar else val

    def tail_error(self, z):
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        err = self._tail(zz)[1]
        return float(err[0]) if np.ndim(z) == 0 else err

    def log_G_derivative(self, z, skip: int | None = None):
        """``G'(z)/G(z)`` (with the skipped factor removed)."""
        scalar = np.ndim(z) == 0
        zz = self._prepare(z)
        lam = self.exponents
        if skip is not None:
            lam = np.delete(lam, skip)
        out = np.zeros(zz.shape, dtype=complex)
        chunk = max(1, 4_000_000 // max(lam.size, 1))
        for i in range(0, zz.size, chunk):
            zc = zz[i:i + chunk, None]
            out[i:i + chunk] = (-2.0 * zc * zc / (lam * (lam * lam - zc * zc))).sum(axis=1)
        s = self._tail_sums
        if np.any(s):
            z2 = zz * zz
            acc = np.zeros(zz.shape, dtype=complex)
            for sj in s[::-1]:
                acc = acc * z2 + sj
            out = out - 2.0 * acc * z2
        return out[0] if scalar else out

    def log_G_second_derivative(self, z, skip: int | None = None):
        scalar = np.ndim(z) == 0
        zz = self._prepare(z)
        lam = self.exponents
        if skip is not None:
            lam = np.delete(lam, skip)
        out = np.zeros(zz.shape, dtype=complex)
        chunk = max(1, 4_000_000 // max(lam.size, 1))
        for i in range(0, zz.size, chunk):
            zc = zz[i:i + chunk, None]
            out[i:i + chunk] = (-1.0 / (lam - zc) ** 2 + 1.0 / (lam + zc) ** 2).sum(axis=1)
        s = self._tail_sums
        if np.any(s):
            z2 = zz * zz
            acc = np.zeros(zz.shape, dtype=complex)
            for j, sj in zip(_TAIL_POWERS[::-1], s[::-1]):
                acc = acc * z2 + (j - 1) * sj
            out = out - 2.0 * acc * zz
        return out[0] if scalar else out

    def evaluate(self, z):
        return np.exp(self.log_G(z))


def evaluate_G(prod: TruncatedProduct, z):
    return prod.evaluate(z)


# --------------------------------------------------------------------------
# sieve region and empirical Fuchs constants
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SieveRegion:
    """Right half-plane minus closed-exterior disks of radius ``delta0`` around the exponents."""

    sequence: ExponentSequence
    delta0: float | None = None

    def __post_init__(self):
        if self.delta0 is None:
            object.__setattr__(self, "delta0", self.sequence.gap() / 4.0)

    def contains(self, z) -> bool | np.ndarray:
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        top = float(np.max(zz.real)) + self.delta0 if zz.size else 0.0
        lam = self.sequence.exponents_upto(min(top, self.sequence.horizon) if not self.sequence.is_generator else top)
        ok = zz.real >= 0
        if lam.size:
            idx = np.clip(np.searchsorted(lam, zz.real), 1, lam.size) - 1
            near = np.minimum(np.abs(zz - lam[idx]), np.abs(zz - lam[np.minimum(idx + 1, lam.size - 1)]))
            ok &= near >= self.delta0
        return bool(ok[0]) if np.ndim(z) == 0 else ok


def sieve_membership(region: SieveRegion, z) -> bool:
    return region.contains(z)


def grid_points(re_range, im_range, counts) -> np.ndarray:
    """Rectangular grid ``{re-range, im-range, counts}`` flattened to complex points."""
    xs = np.linspace(re_range[0], re_range[1], int(counts[0]))
    ys = np.linspace(im_range[0], im_range[1], int(counts[1]))
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def sieve_grid(seq: ExponentSequence, re_range, im_range, counts) -> np.ndarray:
    pts = grid_points(re_range, im_range, counts)
    return pts[SieveRegion(seq).contains(pts)]


@dataclass
class FuchsReport:
    a_upper: float
    a_lower: float
    passed: bool
    used: int
    excluded: int
    rows: list = field(default_factory=list, repr=False)


def certify_fuchs_bounds(prod: TruncatedProduct, grid, lower_grid=None) -> FuchsReport:
    """Empirical constants in ``exp(x lam(|z|) - A x) <= |G(z)| <= exp(x lam(|z|) + A x)``.

    ``A_upper`` is the max of ``(log|G| - x lam(|z|))/x`` over ``grid``;
    ``A_lower`` the max of ``(x lam(|z|) - log|G|)/x`` over ``lower_grid``
    (defaults to ``grid``), every point of which must lie in the sieve.
    Points with ``x < 1e-6`` are dropped: both bounds are trivial on the
    imaginary axis where ``|G| = 1``.
    """
    pts = np.atleast_1d(np.asarray(grid, dtype=complex))
    if pts.size == 0:
        raise EmptyGrid("certification grid is empty")
    if np.any(pts.real < 0):
        raise MuntzError("certification points must lie in the closed right half-plane")
    low = pts if lower_grid is None else np.atleast_1d(np.asarray(lower_grid, dtype=complex))
    region = SieveRegion(prod.sequence)
    inside = np.atleast_1d(region.contains(low))
    if not np.all(inside):
        raise SieveViolation(f"{int(np.sum(~inside))} lower-bound point(s) lie outside the sieve")

    def constants(z, sign):
        keep = z.real >= MIN_CERT_X
        z = z[keep]
        if z.size == 0:
            return -math.inf, z, np.array([]), np.array([]), int((~keep).sum())
        logmod = prod.log_G(z).real
        lam = prod.sequence.characteristic_logarithm(np.abs(z))
        vals = sign * (logmod - z.real * lam) / z.real
        return float(np.max(vals)), z, logmod, lam, int((~keep).sum())

    a_up, zu, lu, lamu, exc_u = constants(pts, 1.0)
    a_lo, _, _, _, exc_l = constants(low, -1.0)
    rows = []
    for z, lg, lam in zip(zu, lu, lamu):
        rows.append((complex(z), float(lg), float(z.real * (lam + a_up) - lg)))
    passed = math.isfinite(a_up) and math.isfinite(a_lo)
    return FuchsReport(a_up, a_lo, passed, int(zu.size), exc_u + exc_l, rows)


def suggest_A(prod: TruncatedProduct, extent: float | None = None, counts=(40, 20)) -> float:
    """Empirical upper Fuchs constant on a default grid plus the Gamma bound 10."""
    if extent is None:
        extent = min(40.0, 0.8 * prod.accurate_radius)
    pts = grid_points((0.5, extent), (-extent, extent), counts)
    pts = pts[np.abs(pts) <= prod.radius_limit]
    return certify_fuchs_bounds(prod, pts, lower_grid=pts[:1] if SieveRegion(prod.sequence).contains(pts[0]) else np.array([0.5])).a_upper + 10.0


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


def g0_shift(b: float, A2: float) -> float:
    """``a0 = 2 A2 - 2 b log(2b)``, or ``2 A2`` when ``b = 0``."""
    if b < 0:
        raise MuntzError("b must be nonnegative")
    return 2.0 * A2 if b == 0 else 2.0 * A2 - 2.0 * b * math.log(2.0 * b)


@dataclass(frozen=True)
class Kernel:
    """``K(z) = W(z) G(z) [/(z - lambda_k)] exp(-(shift + damping) z) / Gamma(1/2 + rate z)``.

    ``W(z) = z^2/(1+z)^4`` when ``weighted``; ``deflate`` is the 1-based
    index ``k`` whose zero is divided out (the ``psi_k`` kernels).
    """

    product: TruncatedProduct
    gamma_rate: float
    shift: float
    weighted: bool = True
    deflate: int | None = None
    damping: float = 0.0

    def __post_init__(self):
        if self.deflate is not None and not 1 <= self.deflate <= self.product.order:
            raise MuntzError(f"deflation index {self.deflate} outside the materialized product")

    @property
    def imaginary_growth(self) -> float:
        """Exponential rate of ``|K(iy)|`` as ``|y| -> inf``: ``pi * rate / 2``."""
        return 0.5 * math.pi * self.gamma_rate

    @property
    def pole_distance(self) -> float:
        """Distance from the origin to the nearest singularity in the left half-plane."""
        d = float(self.product.exponents[0])
        if self.weighted:
            d = min(d, 1.0)
        return d

    def with_damping(self, delta: float) -> "Kernel":
        return Kernel(self.product, self.gamma_rate, self.shift, self.weighted, self.deflate, delta)

    def with_product(self, product: TruncatedProduct) -> "Kernel":
        return Kernel(product, self.gamma_rate, self.shift, self.weighted, self.deflate, self.damping)

    def log_value(self, z):
        scalar = np.ndim(z) == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        skip = None if self.deflate is None else self.deflate - 1
        val = self.product.log_G(zz, skip=skip)
        if skip is not None:
            lk = self.product.exponents[skip]
            val = val + np.log(-1.0 / (lk + zz)) + 2.0 * zz / lk
        val = val - (self.shift + self.damping) * zz
        if self.gamma_rate:
            val = val - special.log_gamma(0.5 + self.gamma_rate * zz)
        else:
            val = val - special.log_gamma(0.5)
        if self.weighted:
            with np.errstate(divide="ignore", invalid="ignore"):
                val = val + 2.0 * np.log(zz) - 4.0 * np.log1p(zz)
        return val[0] if scalar else val

    def value(self, z):
        lv = self.log_value(z)
        with np.errstate(over="ignore"):
            return np.exp(lv)

    def log_derivative(self, z):
        scalar = np.ndim(z) == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        skip = None if self.deflate is None else self.deflate - 1
        val = self.product.log_G_derivative(zz, skip=skip)
        if skip is not None:
            lk = self.product.exponents[skip]
            val = val - 1.0 / (lk + zz) + 2.0 / lk
        val = val - (self.shift + self.damping)
        if self.gamma_rate:
            val = val - self.gamma_rate * special.digamma(0.5 + self.gamma_rate * zz)
        if self.weighted:
            # the double zero at the origin makes the logarithmic derivative infinite there
            with np.errstate(divide="ignore", invalid="ignore"):
                val = val + 2.0 / zz - 4.0 / (1.0 + zz)
        return val[0] if scalar else val

    def log_second_derivative(self, z):
        scalar = np.ndim(z) == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        skip = None if self.deflate is None else self.deflate - 1
        val = self.product.log_G_second_derivative(zz, skip=skip)
        if skip is not None:
            lk = self.product.exponents[skip]
            val = val + 1.0 / (lk + zz) ** 2
        if self.gamma_rate:
            val = val - self.gamma_rate ** 2 * special.trigamma(0.5 + self.gamma_rate * zz)
        if self.weighted:
            with np.errstate(divide="ignore", invalid="ignore"):
                val = val - 2.0 / zz ** 2 + 4.0 / (1.0 + zz) ** 2
        return val[0] if scalar else val

    def checked_value(self, z):
        lv = np.asarray(self.log_value(z))
        if np.any(lv.real > LOG_MAX):
            raise KernelOverflow(f"log-modulus {np.max(lv.real):.1f} exceeds the double range")
        out = np.exp(lv)
        return complex(out) if out.ndim == 0 else out


def g_kernel(prod: TruncatedProduct, alpha: float, A: float) -> Kernel:
    """``g(z) = z^2 G(z) e^{-Az} / (Gamma(1/2 + (2/pi) alpha z) (1+z)^4)``."""
    if not 0 <= alpha < math.pi:
        raise MuntzError("alpha must lie in [0, pi)")
    return Kernel(prod, 2.0 * alpha / math.pi, A, weighted=True)


def g0_kernel(prod: TruncatedProduct, b: float, A2: float) -> Kernel:
    """``g0(z) = G(z) e^{-a0 z} / Gamma(1/2 + 2 b z)``."""
    return Kernel(prod, 2.0 * b, g0_shift(b, A2), weighted=False)


def psi_kernel(prod: TruncatedProduct, k: int, b: float, A2: float, delta: float = 0.0) -> Kernel:
    """``psi_k(z) = z^2 g0(z) / ((1+z)^4 (z - lambda_k))`` times ``exp(-delta z)``."""
    return Kernel(prod, 2.0 * b, g0_shift(b, A2), weighted=True, deflate=k, damping=delta)


def _check_right(z):
    if np.any(np.real(z) < 0):
        raise MuntzError("kernel evaluation requires Re z >= 0")


def evaluate_g0(prod: TruncatedProduct, b: float, A2: float, z):
    _check_right(z)
    return g0_kernel(prod, b, A2).checked_value(z)


def evaluate_g(prod: TruncatedProduct, alpha: float, A: float, z):
    _check_right(z)
    return g_kernel(prod, alpha, A).checked_value(z)


def evaluate_psi_k(prod: TruncatedProduct, k: int, b: float, A2: float, z):
    """``psi_k(z)``; at ``z = lambda_k`` this is ``lambda_k^2 g0'(lambda_k)/(1+lambda_k)^4``.

    The zero of ``G`` at ``lambda_k`` is divided out factor-wise, so the
    removable point needs no differencing.
    """
    _check_right(z)
    return psi_kernel(prod, k, b, A2).checked_value(z)


def g0_derivative_at_exponent(prod: TruncatedProduct, k: int, b: float, A2: float) -> complex:
    """``g0'(lambda_k)``: derivative of the k-th factor at its zero times everything else."""
    kern = Kernel(prod, 2.0 * b, g0_shift(b, A2), weighted=False, deflate=k)
    return kern.checked_value(prod.exponents[k - 1])


@dataclass
class GrowthProfile:
    """Exponential growth rates of ``g0`` on the real axis and of ``psi_k`` at its own exponent.

    ``tail_sup[i]`` is ``max_{x >= xs[i]} log|g0(x)|/x`` over the sampled sieve
    points; ``psi_rates`` holds ``log|psi_k(lambda_k)|/lambda_k`` for ``ks``.
    """

    b: float
    A2: float
    xs: np.ndarray
    rates: np.ndarray
    tail_sup: np.ndarray
    ks: np.ndarray
    psi_rates: np.ndarray

    def final_sup(self) -> float:
        return float(np.max(np.abs(self.tail_sup[-max(1, self.tail_sup.size // 10):])))

    def worst_psi_rate(self) -> float:
        return float(np.max(np.abs(self.psi_rates)))


def growth_profile(seq: ExponentSequence, x_min: float = 10.0, x_max: float = 1e3, count: int = 2000,
                   last: int = 5, b: float | None = None, A2: float | None = None) -> GrowthProfile:
    """Sample ``log|g0(x)|/x`` on sieve points of ``[x_min, x_max]`` and ``psi_k`` at the last exponents below ``x_max``.

    ``b`` and ``A2`` default to the logarithmic asymptote of ``seq``
    (``lambda(t) = b log t + A2 + o(1)``), the setting in which both rates
    tend to zero.
    """
    if b is None or A2 is None:
        b0, a0 = log_asymptote(seq)
        b = b0 if b is None else b
        A2 = a0 if A2 is None else A2
    prod = TruncatedProduct.for_radius(seq, x_max)
    xs = np.linspace(x_min, x_max, count)
    xs = xs[np.atleast_1d(SieveRegion(seq).contains(xs + 0j))]
    if xs.size == 0:
        raise EmptyGrid("no sieve points in the sampling window")
    rates = g0_kernel(prod, b, A2).log_value(xs + 0j).real / xs
    tail_sup = np.maximum.accumulate(rates[::-1])[::-1]
    top = min(seq.count(x_max), prod.order)
    ks = np.arange(max(1, top - last + 1), top + 1)
    psi = np.array([psi_kernel(prod, int(k), b, A2).log_value(complex(prod.exponents[k - 1])).real
                    / prod.exponents[k - 1] for k in ks])
    return GrowthProfile(b, A2, xs, rates, tail_sup, ks, psi)
