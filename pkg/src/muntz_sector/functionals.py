"""Bounded functionals on the sector ``|arg z| <= alpha`` built from half-line transforms.

A functional with kernel ``K`` acts on a function ``f`` continuous on the closed
sector (and analytic inside) through its boundary values::

    T(f) = (1/2 pi) int_{-alpha}^{alpha} f(e^{i t}) h_0(e^{i t}) dt
         + (1/2 pi i) int_0^inf [f(zeta) h_1(zeta) - f(conj zeta) h_{-1}(conj zeta)] du,

with ``zeta = e^{-u - i alpha}`` on the lower edge.  It satisfies
``T(zeta^lam) = K(lam)`` for ``Re lam >= 0``.  Every kernel used here is real on
the real axis, so ``h_{-1}(conj zeta) = conj h_1(zeta)`` and only ``h_0`` and
``h_1`` are computed.

The transforms are tabulated once per kernel (:class:`OperatorTable`) at the
nodes of Gauss-Legendre rules that are refined until the Legendre coefficients
of ``h`` have decayed; beyond the last edge panel Watson's series takes over.
Applying the table to a boundary function is then a weighted sum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainViolation, IllConditioned, InsufficientSamples, MuntzError, PreconditionViolation
from .fuchs import Kernel, TruncatedProduct, g_kernel, psi_kernel, suggest_A
from .sequences import ExponentSequence, log_asymptote
from .transforms import (
    DIRECTIONS,
    FunctionalResult,
    QuadratureSpec,
    TransformEngine,
    gauss_legendre,
    panel_rule,
)

ARC_NODES = 32
EDGE_NODES = 24
TAIL_NODES = 30
MAX_SPLITS = 4
RESOLUTION_RTOL = 1e-12

BoundaryFunction = Callable[[np.ndarray], np.ndarray]


class DivergenceRiskWarning(UserWarning):
    """A Muntz series was evaluated outside the open unit disk."""


# --------------------------------------------------------------------------
# single transforms
# --------------------------------------------------------------------------


def half_line_transform(kernel: Kernel, l: int, zeta: complex, quad: QuadratureSpec | None = None) -> FunctionalResult:
    """``h_l(zeta) = int K(z) zeta^{-z} dz`` along ``t e^{i pi l / 2}``, principal ``log zeta``.

    The open domains are ``|zeta| > 1`` for ``l = 0`` and
    ``rate < -l arg zeta < pi`` for ``l = +-1``, where ``rate`` is the kernel's
    growth on the imaginary axis.
    """
    if l not in DIRECTIONS:
        raise DomainViolation("l must be -1, 0 or 1")
    zeta = complex(zeta)
    if zeta == 0:
        raise DomainViolation("zeta = 0 has no logarithm")
    eng = TransformEngine(kernel, quad)
    val, q, t = eng.transform(l, np.array([np.log(zeta)]), boundary_ok=False)
    return FunctionalResult(complex(val[0]), float(q[0]), float(t[0]))


# --------------------------------------------------------------------------
# adaptive outer rules
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _legendre_projector(n: int) -> np.ndarray:
    """Matrix taking values at ``n`` Gauss nodes to Legendre coefficients."""
    x, w = gauss_legendre(n)
    V = np.polynomial.legendre.legvander(x, n - 1)
    return (0.5 * (2 * np.arange(n) + 1))[:, None] * V.T * w[None, :]


def _adaptive_rule(evaluate, edges, n: int, max_splits: int = MAX_SPLITS, rtol: float = RESOLUTION_RTOL):
    """Gauss rule on ``edges`` refined until ``evaluate`` is resolved on every panel.

    ``evaluate(x)`` returns (values, quadrature error, truncation error) at the
    nodes ``x``.  A panel is resolved when its last Legendre coefficients fall
    below ``rtol`` times the largest value seen.  Panels still unresolved after
    ``max_splits`` bisections, or whose coefficients stop shrinking when split
    (a component oscillating far faster than any affordable panel), keep that
    coefficient size as an extra error.
    Returns nodes, weights, values, quadrature+resolution error, truncation error.
    """
    x, w = gauss_legendre(n)
    proj = _legendre_projector(n)
    pending = [(float(a), float(b), 0, math.inf) for a, b in zip(edges[:-1], edges[1:])]
    done = []
    scale = 0.0
    while pending:
        a = np.array([p[0] for p in pending])[:, None]
        b = np.array([p[1] for p in pending])[:, None]
        nodes = (0.5 * (a + b) + 0.5 * (b - a) * x).ravel()
        val, q, t = evaluate(nodes)
        V = val.reshape(len(pending), n)
        scale = max(scale, float(np.max(np.abs(val))))
        tail = np.max(np.abs(V @ proj.T)[:, -3:], axis=1)
        nxt = []
        for i, (lo, hi, depth, parent) in enumerate(pending):
            if tail[i] <= rtol * scale or depth >= max_splits or (depth >= 2 and tail[i] > 0.5 * parent):
                sl = slice(i * n, (i + 1) * n)
                res = 0.0 if tail[i] <= rtol * scale else 2.0 * tail[i]
                done.append((lo, hi, val[sl], q[sl] + res, t[sl]))
            else:
                mid = 0.5 * (lo + hi)
                nxt += [(lo, mid, depth + 1, tail[i]), (mid, hi, depth + 1, tail[i])]
        pending = nxt
    done.sort(key=lambda p: p[0])
    lo = np.array([p[0] for p in done])[:, None]
    hi = np.array([p[1] for p in done])[:, None]
    nodes = (0.5 * (lo + hi) + 0.5 * (hi - lo) * x).ravel()
    weights = (0.5 * (hi - lo) * w).ravel()
    return (nodes, weights, np.concatenate([p[2] for p in done]),
            np.concatenate([p[3] for p in done]), np.concatenate([p[4] for p in done]))


# --------------------------------------------------------------------------
# boundary data
# --------------------------------------------------------------------------


@dataclass
class BoundarySamples:
    """A boundary function given by samples on uniform grids.

    ``arc`` holds values at ``exp(i theta)`` for ``theta = linspace(-alpha, alpha, n)``;
    ``lower`` and ``upper`` hold values at ``exp(-u -+ i alpha)`` for
    ``u = linspace(0, u_max, m)``.  Values between samples come from cubic
    splines; beyond ``u_max`` the last sample is used and the difference is
    bounded by twice the sample maximum.
    """

    alpha: float
    arc: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    u_max: float

    def __post_init__(self):
        self.arc = np.asarray(self.arc, dtype=complex)
        self.lower = np.asarray(self.lower, dtype=complex)
        self.upper = np.asarray(self.upper, dtype=complex)
        if self.lower.shape != self.upper.shape:
            raise InsufficientSamples("both edges need the same sample grid")
        if self.arc.size < 4 or self.lower.size < 4:
            raise InsufficientSamples("at least four samples per boundary piece are needed")

    @classmethod
    def from_function(cls, f: BoundaryFunction, alpha: float, n_arc: int, n_edge: int, u_max: float):
        th = np.linspace(-alpha, alpha, n_arc)
        u = np.linspace(0.0, u_max, n_edge)
        return cls(alpha, f(np.exp(1j * th)), f(np.exp(-u - 1j * alpha)), f(np.exp(-u + 1j * alpha)), u_max)

    @property
    def arc_spacing(self) -> float:
        return 2.0 * self.alpha / (self.arc.size - 1)

    @property
    def edge_spacing(self) -> float:
        return self.u_max / (self.lower.size - 1)

    @property
    def sup(self) -> float:
        return float(max(np.max(np.abs(self.arc)), np.max(np.abs(self.lower)), np.max(np.abs(self.upper))))

    def _spline(self, x, vals):
        re = CubicSpline(x, vals.real)
        im = CubicSpline(x, vals.imag)
        return lambda t: re(t) + 1j * im(t)

    def arc_values(self, theta):
        th = np.linspace(-self.alpha, self.alpha, self.arc.size)
        return self._spline(th, self.arc)(theta)

    def edge_values(self, u):
        grid = np.linspace(0.0, self.u_max, self.lower.size)
        inside = u <= self.u_max
        lo = np.full(u.shape, self.lower[-1], dtype=complex)
        up = np.full(u.shape, self.upper[-1], dtype=complex)
        lo[inside] = self._spline(grid, self.lower)(u[inside])
        up[inside] = self._spline(grid, self.upper)(u[inside])
        return lo, up, ~inside


# --------------------------------------------------------------------------
# operator tables
# --------------------------------------------------------------------------


@dataclass
class OperatorTable:
    """Tabulated transforms of one kernel on the boundary of the sector of half-angle ``alpha``."""

    kernel: Kernel
    alpha: float
    theta: np.ndarray
    w_theta: np.ndarray
    h0: np.ndarray
    q0: np.ndarray
    t0: np.ndarray
    u: np.ndarray
    w_u: np.ndarray
    h1: np.ndarray
    q1: np.ndarray
    t1: np.ndarray
    u_tail: np.ndarray
    w_tail: np.ndarray
    h_tail: np.ndarray
    t_tail: np.ndarray
    quad: QuadratureSpec = field(repr=False, default=None)

    @property
    def u_max(self) -> float:
        return float(self.u[-1]) if self.u.size else 0.0

    def boundary_points(self):
        """Arc, lower-edge and upper-edge points (edges include the tail nodes)."""
        arc = np.exp(1j * self.theta)
        u = np.concatenate([self.u, self.u_tail])
        return arc, np.exp(-u - 1j * self.alpha), np.exp(-u + 1j * self.alpha)

    def _sample(self, f):
        if isinstance(f, BoundarySamples):
            need = 1.0 / self.quad.nodes_per_unit
            if abs(f.alpha - self.alpha) > 1e-12:
                raise InsufficientSamples("samples were taken on a different sector")
            if f.arc_spacing > need * 2 * self.alpha or f.edge_spacing > need:
                raise InsufficientSamples(
                    f"sampling too coarse: need arc spacing <= {need * 2 * self.alpha:.3g} "
                    f"and edge spacing <= {need:.3g} in u = -log s"
                )
            if f.u_max < min(self.u_max, 8.0):
                raise InsufficientSamples(f"edge samples must reach u = {min(self.u_max, 8.0):g}")
            fa = f.arc_values(self.theta)
            u = np.concatenate([self.u, self.u_tail])
            lo, up, outside = f.edge_values(u)
            return fa, lo, up, outside, 2.0 * f.sup
        arc, lower, upper = self.boundary_points()
        return (np.asarray(f(arc), dtype=complex), np.asarray(f(lower), dtype=complex),
                np.asarray(f(upper), dtype=complex), np.zeros(lower.shape, bool), 0.0)

    def apply(self, f) -> FunctionalResult:
        """``T(f)`` for a boundary evaluator ``f`` (vectorized over points) or :class:`BoundarySamples`."""
        fa, lo, up, outside, jump = self._sample(f)
        m = self.u.size
        arc = np.sum(self.w_theta * fa * self.h0) / (2 * math.pi)
        h = np.concatenate([self.h1, self.h_tail])
        w = np.concatenate([self.w_u, self.w_tail])
        edge = np.sum(w * (lo * h - up * np.conj(h))) / (2j * math.pi)
        qerr = (np.sum(np.abs(self.w_theta * fa) * self.q0)
                + np.sum(self.w_u * (np.abs(lo[:m]) + np.abs(up[:m])) * self.q1)) / (2 * math.pi)
        terr = (np.sum(np.abs(self.w_theta * fa) * self.t0)
                + np.sum(self.w_u * (np.abs(lo[:m]) + np.abs(up[:m])) * self.t1)
                + np.sum(self.w_tail * (np.abs(lo[m:]) + np.abs(up[m:])) * self.t_tail)) / (2 * math.pi)
        if np.any(outside):
            terr += jump * float(np.sum(w[outside] * 2.0 * np.abs(h[outside]))) / (2 * math.pi)
        # rounding in the weighted sums
        terr += 1e-16 * (np.sum(np.abs(self.w_theta * fa * self.h0)) + np.sum(w * (np.abs(lo) + np.abs(up)) * np.abs(h)))
        return FunctionalResult(complex(arc + edge), float(qerr), float(terr))

    def norm_upper(self) -> float:
        """Upper bound for the operator norm: ``int |h_0| / 2pi`` plus ``int (|h_1| + |h_-1|) du / 2pi``."""
        arc = np.sum(self.w_theta * (np.abs(self.h0) + self.q0 + self.t0))
        edge = 2.0 * np.sum(self.w_u * (np.abs(self.h1) + self.q1 + self.t1))
        tail = 2.0 * np.sum(self.w_tail * (np.abs(self.h_tail) + self.t_tail))
        return float((arc + edge + tail) / (2 * math.pi))


def _initial_edges(alpha: float, frequency: float, u_max: float, arc_panels: int | None):
    n_arc = arc_panels or max(8, math.ceil(alpha * frequency / math.pi))
    arc = np.linspace(-alpha, alpha, n_arc + 1)
    # graded panels near the corner so that zeta^lam with large lam is resolved
    first = min(1.0 / 64.0, 0.25 / max(frequency, 1.0))
    grade = [0.0]
    g = first
    while g < 1.0:
        grade.append(g)
        g *= 4.0
    edge = np.unique(np.concatenate([grade, np.arange(1.0, math.ceil(u_max) + 1.0)]))
    return arc, edge


def build_operator_table(kernel: Kernel, alpha: float, quad: QuadratureSpec | None = None,
                         frequency: float = 0.0) -> OperatorTable:
    """Tabulate ``h_0`` on the arc and ``h_1`` on the lower edge for ``kernel``.

    ``frequency`` is the largest ``|lam|`` of the functions the table will be
    applied to; it sets the initial panel density.  The sector must contain
    the kernel's growth cone: ``alpha >= rate``.
    """
    quad = quad or QuadratureSpec()
    eng = TransformEngine(kernel, quad)
    if alpha < eng.growth - 1e-12:
        raise DomainViolation(f"alpha={alpha:.6g} is below the kernel growth rate {eng.growth:.6g}")
    if not 0 < alpha < math.pi:
        raise DomainViolation("alpha must lie in (0, pi)")
    u_max = quad.u_max or eng.default_u_max()
    arc_edges, edge_edges = _initial_edges(alpha, frequency, u_max, quad.arc_panels)

    def arc_eval(th):
        return eng.transform(0, 1j * th)

    def edge_eval(u):
        return eng.transform(1, -u - 1j * alpha)

    theta, w_theta, h0, q0, t0 = _adaptive_rule(arc_eval, arc_edges, ARC_NODES)
    u, w_u, h1, q1, t1 = _adaptive_rule(edge_eval, edge_edges, EDGE_NODES)
    # u in [u_max, inf) as u = u_max / v, v in (0, 1]
    v, wv = panel_rule(np.array([0.0, 0.5, 1.0]), TAIL_NODES)
    u_tail = u_max / v
    w_tail = wv * u_max / v ** 2
    h_tail, e_tail = eng.asymptotic(u_tail + 1j * alpha)
    return OperatorTable(kernel, alpha, theta, w_theta, h0, q0, t0, u, w_u, h1, q1, t1,
                         u_tail, w_tail, h_tail, e_tail, quad)


@lru_cache(maxsize=64)
def operator_table(kernel: Kernel, alpha: float, quad: QuadratureSpec | None = None,
                   frequency: float = 0.0) -> OperatorTable:
    """Cached :func:`build_operator_table`."""
    return build_operator_table(kernel, alpha, quad, frequency)


def monomial(lam: complex) -> BoundaryFunction:
    """``zeta -> zeta^lam`` with the principal logarithm (``0^lam = 0`` for ``Re lam > 0``)."""
    lam = complex(lam)

    def f(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros(zeta.shape, dtype=complex)
        nz = zeta != 0
        out[nz] = np.exp(lam * np.log(zeta[nz]))
        if lam == 0:
            out[~nz] = 1.0
        return out

    return f


# --------------------------------------------------------------------------
# the functionals
# --------------------------------------------------------------------------


def default_g_kernel(seq: ExponentSequence, alpha: float, A: float | None = None, radius: float = 50.0) -> Kernel:
    """``g`` kernel with a product sized for ``|z| <= radius`` and ``A`` from the Fuchs certificate."""
    prod = TruncatedProduct.for_radius(seq, radius)
    if A is None:
        A = suggest_A(prod)
    return g_kernel(prod, alpha, A)


def functional_T(f, kernel: Kernel, alpha: float, quad: QuadratureSpec | None = None,
                 frequency: float = 0.0) -> FunctionalResult:
    """``T(f)`` for the functional built from ``kernel`` (typically :func:`default_g_kernel`)."""
    return operator_table(kernel, alpha, quad, float(frequency)).apply(f)


def _psi_params(product: TruncatedProduct, b, A2):
    if b is None or A2 is None:
        b0, a0 = log_asymptote(product.sequence)
        b = b0 if b is None else b
        A2 = a0 if A2 is None else A2
    return float(b), float(A2)


def functional_T_k_delta(k: int, delta: float, f, product: TruncatedProduct, alpha: float,
                         b: float | None = None, A2: float | None = None,
                         quad: QuadratureSpec | None = None, frequency: float = 0.0) -> FunctionalResult:
    """``T_{k,delta}(f)``, the functional with kernel ``psi_k(z) e^{-delta z}``.

    On monomials it gives ``T_{k,delta}(zeta^lam) = psi_k(lam) e^{-delta lam}``.
    """
    if delta <= 0:
        raise MuntzError("delta must be positive")
    b, A2 = _psi_params(product, b, A2)
    kern = psi_kernel(product, k, b, A2, delta)
    return operator_table(kern, alpha, quad, float(frequency)).apply(f)


def biorthogonal_target(product: TruncatedProduct, k: int, delta: float,
                        b: float | None = None, A2: float | None = None) -> complex:
    """``psi_k(lambda_k) e^{-delta lambda_k}``, the diagonal value of the biorthogonal system."""
    b, A2 = _psi_params(product, b, A2)
    lam = float(product.exponents[k - 1])
    return complex(psi_kernel(product, k, b, A2).checked_value(lam)) * math.exp(-delta * lam)


# --------------------------------------------------------------------------
# expansions
# --------------------------------------------------------------------------


@dataclass
class MuntzExpansion:
    """``sum_k a_k z^{lambda_k}`` with per-coefficient error estimates.

    ``radius`` is the radius of guaranteed convergence (the unit disk slit
    along the negative axis).  ``tail_factors`` holds
    ``e^{delta lambda_k} / |psi_k(lambda_k)|`` for the next exponents after the
    last recovered one and, with ``operator_bound`` (the largest computed
    ``||T_{k,delta}||``, an empirical estimate) and ``f_norm``, bounds the
    omitted terms.
    """

    exponents: np.ndarray
    coefficients: np.ndarray
    errors: np.ndarray = None
    radius: float = 1.0
    delta: float | None = None
    delta_discrepancy: np.ndarray | None = None
    delta_consistent: bool | None = None
    operator_bound: float | None = None
    f_norm: float | None = None
    tail_exponents: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tail_factors: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.exponents = np.asarray(self.exponents, dtype=float)
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.errors is None:
            self.errors = np.zeros(self.exponents.size)
        self.errors = np.asarray(self.errors, dtype=float)
        if self.exponents.shape != self.coefficients.shape:
            raise MuntzError("one coefficient per exponent")
        if np.any(np.diff(self.exponents) <= 0):
            raise MuntzError("expansion exponents must be strictly increasing")

    @property
    def terms(self):
        return list(zip(self.exponents.tolist(), self.coefficients.tolist()))

    def to_records(self) -> list[dict]:
        return [{"lambda": float(l), "re_a": float(a.real), "im_a": float(a.imag), "error": float(e)}
                for l, a, e in zip(self.exponents, self.coefficients, self.errors)]


def reconstruct(expansion: MuntzExpansion, z):
    """Partial sum ``sum a_k z^{lambda_k}`` (principal ``z^lambda``).

    Points with ``|z| >= 1`` are outside the guaranteed region and trigger a
    :class:`DivergenceRiskWarning`.
    """
    return reconstruct_with_bound(expansion, z)[0]


def reconstruct_with_bound(expansion: MuntzExpansion, z):
    """Partial sum and a bound for the omitted terms (``inf`` when no bound is available)."""
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(zz) >= expansion.radius):
        warnings.warn("Muntz series evaluated at |z| >= 1, where convergence is not guaranteed",
                      DivergenceRiskWarning, stacklevel=2)
    val = np.zeros(zz.shape, dtype=complex)
    for lam, a in zip(expansion.exponents, expansion.coefficients):
        val += a * monomial(lam)(zz)
    bound = np.full(zz.shape, np.inf)
    if expansion.tail_factors.size and expansion.operator_bound is not None and expansion.f_norm is not None:
        r = np.abs(zz)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            terms = expansion.tail_factors[None, :] * r[:, None] ** expansion.tail_exponents[None, :]
        bound = expansion.operator_bound * expansion.f_norm * np.sum(terms, axis=1)
        bound[r >= 1] = np.inf
    if scalar:
        return complex(val[0]), float(bound[0])
    return val, bound


def _recover_at(f, product, K, alpha, delta, b, A2, quad, frequency):
    coef = np.empty(K, dtype=complex)
    err = np.empty(K)
    norms = np.empty(K)
    f_norm = 0.0
    for k in range(1, K + 1):
        table = operator_table(psi_kernel(product, k, b, A2, delta), alpha, quad, frequency)
        res = table.apply(f)
        target = biorthogonal_target(product, k, delta, b, A2)
        if not abs(target) > res.error:
            raise IllConditioned(
                f"|psi_{k}(lambda_{k})| e^(-delta lambda_{k}) = {abs(target):.3g} does not exceed "
                f"the functional's error estimate {res.error:.3g}"
            )
        coef[k - 1] = res.value / target
        err[k - 1] = res.error / abs(target)
        norms[k - 1] = table.norm_upper()
        if isinstance(f, BoundarySamples):
            f_norm = f.sup
        else:
            f_norm = max(f_norm, *(float(np.max(np.abs(f(p)))) for p in table.boundary_points()))
    return coef, err, norms, f_norm


def _tail_factors(product: TruncatedProduct, K: int, count: int, delta: float, b: float, A2: float):
    """Exponents ``lambda_k`` and ``e^{delta lambda_k} / |psi_k(lambda_k)|`` for ``k = K+1 .. K+count``."""
    seq = product.sequence
    if seq.is_generator:
        lam = seq.head(K + count)[K:]
        prod = TruncatedProduct.for_radius(seq, float(lam[-1]), guard=product.guard)
    else:
        lam = product.exponents[K:K + count]
        prod = product
    if lam.size == 0:
        return lam, lam
    logs = np.array([psi_kernel(prod, k, b, A2).log_value(float(l)).real
                     for k, l in zip(range(K + 1, K + lam.size + 1), lam)])
    with np.errstate(over="ignore"):
        return lam, np.exp(delta * lam - logs)


def recover_coefficients(f, product: TruncatedProduct, K: int, alpha: float, delta: float | None = None,
                         b: float | None = None, A2: float | None = None,
                         quad: QuadratureSpec | None = None, check_delta: bool = True,
                         tail_terms: int = 40) -> MuntzExpansion:
    """Coefficients ``a_k = T_{k,delta}(f) / (psi_k(lambda_k) e^{-delta lambda_k})`` for ``k <= K``.

    ``delta`` defaults to ``1/lambda_K``.  With ``check_delta`` the recovery is
    repeated at ``delta/2`` and the discrepancy is compared with the combined
    error estimates.
    """
    if K < 1:
        raise MuntzError("K must be at least 1")
    if K > product.order:
        raise MuntzError(f"K={K} exceeds the materialized product order {product.order}")
    b, A2 = _psi_params(product, b, A2)
    lam = product.exponents[:K]
    delta = 1.0 / float(lam[-1]) if delta is None else float(delta)
    frequency = float(lam[-1])
    coef, err, norms, f_norm = _recover_at(f, product, K, alpha, delta, b, A2, quad, frequency)
    disc = consistent = None
    if check_delta:
        coef2, err2, _, _ = _recover_at(f, product, K, alpha, 0.5 * delta, b, A2, quad, frequency)
        disc = np.abs(coef - coef2)
        consistent = bool(np.all(disc <= err + err2 + 1e-12 * (1.0 + np.abs(coef))))
    t_lam, t_fac = _tail_factors(product, K, tail_terms, delta, b, A2)
    return MuntzExpansion(lam.copy(), coef, err, 1.0, delta, disc, consistent,
                          float(np.max(norms)), f_norm, t_lam, t_fac)


# --------------------------------------------------------------------------
# checks built on the functional
# --------------------------------------------------------------------------


@dataclass
class CrosscheckResult:
    z: complex
    rhs: FunctionalResult
    g: complex

    @property
    def residual(self) -> float:
        return abs(self.rhs.value - self.g)

    @property
    def estimate(self) -> float:
        return self.rhs.error


def representation_crosscheck(z, kernel: Kernel, alpha: float, quad: QuadratureSpec | None = None):
    """Compare ``T(zeta^z)`` (boundary quadrature) with the direct value ``K(z)``.

    ``z`` may be a scalar or an array; all points share one operator table.
    """
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(zs.real <= 0):
        raise DomainViolation("the representation is checked for Re z > 0")
    table = operator_table(kernel, alpha, quad, float(np.max(np.abs(zs))))
    out = [CrosscheckResult(complex(p), table.apply(monomial(p)), complex(kernel.checked_value(p))) for p in zs]
    return out[0] if np.ndim(z) == 0 else out


@dataclass
class WitnessReport:
    mu: float
    g_mu: float
    norm_upper: float
    lower_bound: float
    ls_residual: float
    fit_size: int
    slack: float

    @property
    def consistent(self) -> bool:
        return self.ls_residual >= self.lower_bound - self.slack

    def to_text(self) -> str:
        return "\n".join([
            f"mu: {self.mu:.17g}",
            f"fit_size: {self.fit_size}",
            f"abs_g_mu: {self.g_mu:.17g}",
            f"norm_upper: {self.norm_upper:.17g}",
            f"lower_bound: {self.lower_bound:.17g}",
            f"ls_residual: {self.ls_residual:.17g}",
            f"slack: {self.slack:.17g}",
            f"consistent: {str(self.consistent).lower()}",
        ])


def boundary_grid(alpha: float, n_arc: int = 401, n_edge: int = 401) -> np.ndarray:
    """Points on the sector boundary inside the closed unit disk."""
    arc = np.exp(1j * np.linspace(-alpha, alpha, n_arc))
    s = np.linspace(0.0, 1.0, n_edge)
    return np.concatenate([arc, s * np.exp(-1j * alpha), s * np.exp(1j * alpha)])


def least_squares_residual(mu: float, exponents, alpha: float, grid: np.ndarray | None = None) -> float:
    """Sup residual on ``grid`` of the least-squares fit of ``zeta^mu`` by ``zeta^{lambda_k}``."""
    pts = boundary_grid(alpha) if grid is None else np.asarray(grid, dtype=complex)
    A = np.stack([monomial(l)(pts) for l in exponents], axis=1)
    rhs = monomial(mu)(pts)
    scale = np.max(np.abs(A), axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, rhs, rcond=None)
    return float(np.max(np.abs(A / scale @ coef - rhs)))


def incompleteness_witness(mu: float, kernel: Kernel, alpha: float, K: int = 6,
                           quad: QuadratureSpec | None = None, grid: np.ndarray | None = None,
                           slack: float = 1e-8) -> WitnessReport:
    """Certified lower bound ``|g(mu)| / ||T||`` for the distance from ``zeta^mu`` to the span.

    The bound is set against the sup residual of a least-squares fit by the
    first ``K`` monomials of the sequence; a fit can never beat the distance,
    so ``consistent`` should hold.
    """
    mu = float(mu)
    if mu <= 0:
        raise PreconditionViolation("mu must be positive")
    lam = kernel.product.sequence.head(K) if K > kernel.product.order else kernel.product.exponents[:K]
    seq = kernel.product.sequence
    seq_pts = seq.exponents_upto(2.0 * mu) if seq.is_generator else seq.values
    if np.any(np.abs(seq_pts - mu) <= 1e-12 * mu):
        raise PreconditionViolation(f"mu={mu:g} belongs to the exponent sequence")
    table = operator_table(kernel, alpha, quad, mu)
    norm = table.norm_upper()
    g_mu = abs(complex(kernel.checked_value(mu)))
    return WitnessReport(mu, g_mu, norm, g_mu / norm, least_squares_residual(mu, lam, alpha, grid), K, slack)
