"""Half-line transforms ``h_l(zeta) = int_{L_l} K(z) zeta^{-z} dz`` and their quadrature.

``L_0`` is the positive real axis and ``L_{+1}``, ``L_{-1}`` the upper and
lower imaginary half-axes.  Every transform is a sum over Gauss-Legendre
panels laid along a path; panel widths follow the local phase rate and
amplitude scale of the integrand so that each panel carries at most one
full oscillation.

Three regimes are handled:

* exponential decay along the path (the generic case): integrate until the
  integrand falls below the tolerance and bound the remainder by its decay;
* the sector edge ``-l arg zeta = rate`` of a kernel whose imaginary-axis
  growth exactly cancels ``|zeta^{-z}|`` (the ``g`` kernel): the integrand
  only decays algebraically, so the path is shifted left to
  ``Re z = -c`` (damping by ``|zeta|^c``), integrated to a finite length
  and closed with an integration-by-parts series; a stationary point of the
  phase is either integrated through, replaced by its stationary-phase term,
  or (beyond the scanned range) bounded;
* ``|log zeta|`` large: Watson's lemma gives ``h(e^{-W}) ~ sum c_k k!/(-W)^{k+1}``
  with ``c_k`` the Taylor coefficients of the kernel at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import DomainViolation, NonConvergent
from .fuchs import Kernel, TruncatedProduct

DIRECTIONS = {0: 1.0 + 0j, 1: 1j, -1: -1j}


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def panel_rule(edges, n: int):
    """Gauss-Legendre nodes and weights on consecutive panels ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (0.5 * (a + b) + half * x).ravel(), (half * w).ravel()


@dataclass(frozen=True)
class QuadratureSpec:
    """Half-line and radial quadrature parameters.

    ``t_max`` caps the length of each half-line (``None``: chosen from the
    tolerance); ``nodes_per_unit`` is the Gauss order per panel, where a panel
    spans at most one unit of amplitude scale or one oscillation;
    ``u_max`` is the cutoff in ``u = -log s`` on the radial edges beyond which
    the asymptotic series takes over (``None``: from the kernel's pole distance).
    On the exact sector edge, ``edge_cap`` is how far stationary points of the
    phase are searched for and ``through_cap`` how far the path may run to pass
    one; stationary points further out are bounded rather than integrated.
    Errors are estimated by repeating every rule with doubled node counts.
    """

    t_max: float | None = None
    nodes_per_unit: int = 16
    tolerance: float = 1e-14
    u_max: float | None = None
    edge_cap: float = 2.0e4
    through_cap: float = 1500.0
    arc_panels: int | None = None

    def __post_init__(self):
        if self.nodes_per_unit < 4:
            raise ValueError("need at least 4 nodes per panel")
        if not 0 < self.tolerance < 1:
            raise ValueError("tolerance must lie in (0, 1)")


@dataclass
class FunctionalResult:
    value: complex
    quadrature_error: float
    truncation_error: float

    @property
    def error(self) -> float:
        return self.quadrature_error + self.truncation_error


# --------------------------------------------------------------------------
# kernel bookkeeping
# --------------------------------------------------------------------------


def kernel_for_radius(kernel: Kernel, radius: float) -> Kernel:
    """Same kernel with a product materialized far enough for ``|z| <= radius``."""
    prod = kernel.product
    if radius <= prod.accurate_radius or not prod.sequence.is_generator:
        return kernel
    need = TruncatedProduct.for_radius(prod.sequence, radius, guard=prod.guard)
    if kernel.deflate is not None and kernel.deflate > need.order:
        need = TruncatedProduct(prod.sequence, kernel.deflate, prod.guard)
    return kernel.with_product(need)


def taylor_coefficients(kernel: Kernel, count: int = 96):
    """Taylor coefficients of ``kernel`` at 0 by FFT on a circle inside its pole radius."""
    r = 0.7 * kernel.pole_distance
    m = 512
    z = r * np.exp(2j * np.pi * np.arange(m) / m)
    vals = kernel.value(z)
    coef = np.fft.fft(vals) / m
    k = np.arange(count)
    noise = 1e-16 * float(np.max(np.abs(vals))) / r ** k
    return coef[:count] / r ** k, noise


def asymptotic_transform(coef, noise, W):
    """``sum_k c_k k! / (-W)^(k+1)`` truncated at its smallest term; returns (value, error)."""
    W = np.atleast_1d(np.asarray(W, dtype=complex))
    k = np.arange(coef.size)
    logmw = np.log(-W)[:, None]
    fact = gammaln(k + 1.0)[None, :]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        terms = coef[None, :] * np.exp(fact - (k[None, :] + 1) * logmw)
        noise_terms = noise[None, :] * np.exp(fact - (k[None, :] + 1) * logmw.real)
    mag = np.abs(terms)
    mag[:, :2] = np.where(coef[None, :2] == 0, 0.0, mag[:, :2])
    # stop at the smallest term beyond the leading ones
    start = 3
    stop = start + np.argmin(mag[:, start:] + noise_terms[:, start:], axis=1)
    mask = k[None, :] < stop[:, None]
    val = np.sum(np.where(mask, terms, 0), axis=1)
    err = 2.0 * mag[np.arange(W.size), stop] + np.sum(np.where(mask, noise_terms, 0), axis=1)
    return val, err


def _series_inverse(a, k):
    b = np.zeros(k, dtype=complex)
    b[0] = 1.0 / a[0]
    for i in range(1, k):
        b[i] = -np.dot(a[1:i + 1], b[i - 1::-1][:i]) / a[0]
    return b


def _ibp_tail(log_f, direction, kap_coef, L, max_terms=10):
    """``int_T^inf exp(Phi)`` by repeated integration by parts.

    ``Phi'(T + s) = direction * (kappa(z(T + s)) - L)`` is given by Taylor
    coefficients; with ``h_0 = 1/Phi'`` and ``h_{k+1} = -h_k'/Phi'`` the
    integral is ``-exp(Phi(T)) * sum_k h_k(T)``, truncated at the smallest term.
    """
    p = direction * np.array(kap_coef, dtype=complex)
    p[0] -= direction * L
    k = p.size
    inv = _series_inverse(p, k)
    h = inv.copy()
    terms = [h[0]]
    for _ in range(max_terms):
        dh = h[1:] * np.arange(1, h.size)
        if dh.size == 0:
            break
        h = -np.convolve(dh, inv[: dh.size])[: dh.size]
        terms.append(h[0])
    mags = np.abs(terms)
    stop = 1 + int(np.argmin(mags[1:]))
    f = np.exp(log_f) * direction
    return complex(-f * np.sum(terms[:stop])), float(2.0 * abs(f) * mags[stop])


# --------------------------------------------------------------------------
# paths
# --------------------------------------------------------------------------


@dataclass
class PathRule:
    """Quadrature of ``t -> K(z(t)) exp(-z(t) L) z'(t)`` for a family of ``L`` values."""

    z: np.ndarray          # nodes
    wd: np.ndarray         # weight * z'(t)
    logk: np.ndarray       # log K(z); kept in log form since |K| grows like e^{rate |y|}
    edges_t: np.ndarray    # panel edges (path parameter)
    edge_index: np.ndarray  # node count before each panel edge
    direction: complex
    shift: float


def _march(t0, t_end, width_fn, first=None):
    edges = list(first) if first else [t0]
    t = edges[-1]
    while t < t_end:
        t = min(t + width_fn(t), t_end)
        edges.append(t)
    return np.array(edges)


class TransformEngine:
    """Evaluates ``h_l`` for one kernel on batches of ``zeta`` values."""

    def __init__(self, kernel: Kernel, quad: QuadratureSpec | None = None):
        self.quad = quad or QuadratureSpec()
        self.kernel = kernel
        self.rho = kernel.pole_distance
        self.growth = kernel.imaginary_growth
        self._coef = None
        self._scale = None

    # -- helpers ----------------------------------------------------------

    def _k(self, radius):
        return kernel_for_radius(self.kernel, radius)

    @property
    def scale(self) -> float:
        """Typical kernel magnitude near the origin; tolerances are relative to it."""
        if self._scale is None:
            z = np.array([0.5, 1.0 + 0j, 0.5j, 1j, 2j, 2.0 + 0j])
            vals = np.abs(self._k(4.0).value(z))
            self._scale = float(max(np.max(vals), 1e-300))
        return self._scale

    def coefficients(self):
        if self._coef is None:
            self._coef = taylor_coefficients(self._k(2.0))
        return self._coef

    def default_u_max(self) -> float:
        if self.quad.u_max is not None:
            return float(self.quad.u_max)
        return 36.0 / self.rho + 8.0

    # -- path builders ----------------------------------------------------

    def _width_fn(self, direction, shift, L, t_end, n):
        """Panel width from the phase rate of the integrand at sample points."""
        ts = np.unique(np.concatenate([np.linspace(0, min(t_end, 4.0), 9),
                                       np.geomspace(0.05, max(t_end, 0.1), 240)]))
        ts = ts[ts <= t_end * 1.0001]
        kern = self._k(abs(shift) + t_end + 1)
        # sample half a unit off the path so zeros of K on the real axis do not
        # masquerade as fast phase variation
        z = shift + direction * ts + (0.5j if direction.imag == 0 else 0.0)
        kap = kern.log_derivative(z)
        rate = np.abs(direction * (kap[:, None] - L[None, :])).max(axis=1)
        budget = 2.0 * math.pi * n / 16.0

        def width(t):
            r = float(np.interp(t, ts, rate))
            return max(1e-3, min(max(0.5, 0.25 * t), budget / max(r, 1e-9), 4.0 + 0.25 * t))

        return width

    def _path(self, direction, shift, t_end, L, n, first=None):
        width = self._width_fn(direction, shift, L, t_end, n)
        edges = _march(0.0, t_end, width, first)
        # same panels for coarse and fine rules so that prefix sums align
        return edges

    def _rule(self, direction, shift, edges, n):
        t, w = panel_rule(edges, n)
        z = shift + direction * t
        kern = self._k(abs(shift) + float(edges[-1]) + 1)
        idx = np.arange(edges.size) * n
        return PathRule(z, w * direction, kern.log_value(z), edges, idx, direction, shift)

    def _decay_end(self, direction, shift, L, t_start=1.0):
        """Path length beyond which ``|K e^{-zL}|`` stays below tolerance * scale."""
        thresh = math.log(self.quad.tolerance * self.scale) - 3.0
        cap = self.quad.t_max or 1e5
        t_hi = 64.0
        while True:
            ts = np.linspace(0.0, min(t_hi, cap), 2049)[1:]
            kern = self._k(abs(shift) + ts[-1] + 1)
            z = shift + direction * ts
            lk = kern.log_value(z).real
            logmag = lk[:, None] - (z[:, None] * L[None, :]).real
            worst = logmag.max(axis=1)
            above = np.nonzero(worst > thresh)[0]
            if above.size == 0:
                return float(ts[0]), 0.0
            last = above[-1]
            if last < ts.size - 64:
                return float(ts[min(last + 8, ts.size - 1)]), 0.0
            if ts[-1] >= cap:
                slope = np.polyfit(ts[-256:], worst[-256:], 1)[0]
                if slope >= 0:
                    raise NonConvergent(
                        f"integrand along direction {direction} does not decay (log-modulus slope {slope:.3g})"
                    )
                return float(ts[-1]), float(np.exp(worst[-1]) / -slope)
            t_hi *= 4.0

    # -- exponentially decaying transforms -------------------------------

    def _decaying(self, direction, L, n):
        """Sum over a straight ray for all ``L`` together; returns (value, trunc)."""
        t_end, trunc = self._decay_end(direction, 0.0, L)
        t_end = max(t_end, 2.0)
        edges = self._path(direction, 0.0, t_end, L, n)
        vals = []
        for m in (n, 2 * n):
            rule = self._rule(direction, 0.0, edges, m)
            vals.append(self._apply(rule, L))
        # exponential remainder bound at the end point
        kern = self._k(t_end + 1)
        zend = direction * t_end
        lk = kern.log_value(zend)
        kap = kern.log_derivative(zend)
        mag = np.exp(lk.real - (zend * L).real)
        decay = np.maximum(-(direction * (kap - L)).real, 1e-3)
        trunc = trunc + mag / decay
        return vals[1], np.abs(vals[1] - vals[0]), trunc

    @staticmethod
    def _apply(rule: PathRule, L, chunk=64):
        out = np.empty(L.size, dtype=complex)
        for i in range(0, L.size, chunk):
            Lc = L[i:i + chunk]
            out[i:i + chunk] = rule.wd @ np.exp(rule.logk[:, None] - rule.z[:, None] * Lc[None, :])
        return out

    # -- edge transforms (algebraic decay) -------------------------------

    def _edge_band(self, direction, L, n):
        """Transforms on the exact sector edge for one band of ``L`` values.

        Path: the segment ``[0, -c]`` followed by ``-c + direction * t``.  Each
        ``L`` is truncated at its own panel edge and closed with the
        integration-by-parts series.  A stationary point of the phase is
        integrated through when the path to it is affordable; otherwise the
        path stops before it and the stationary-phase term is added.  Stationary points beyond
        the scanned range are only bounded.
        """
        c = 0.8 * self.rho
        cap = float(self.quad.t_max or self.quad.edge_cap)
        tol = self.quad.tolerance * self.scale
        asym = -1.0 if direction.imag > 0 else 1.0
        ts = np.geomspace(1.0, cap, 240)
        kern = self._k(c + cap + 1)
        zs = -c + direction * ts
        lk = kern.log_value(zs)
        kap = kern.log_derivative(zs)
        kap2 = kern.log_second_derivative(zs)
        phi1 = direction * (kap[:, None] - L[None, :])
        phi2 = (direction ** 2 * kap2)[:, None]
        amp = lk.real[:, None] - (zs[:, None] * L[None, :]).real
        signs = np.sign(phi1.imag) == asym
        # a point is a safe closing point when the phase never turns back afterwards
        settled = np.flip(np.logical_and.accumulate(np.flip(signs, 0), axis=0), 0)
        closable = (np.abs(phi2 / phi1 ** 2) <= 0.02) & (np.abs(phi1) >= 0.5) & (ts[:, None] >= 20.0)
        plan_t = np.empty(L.size)
        bound = np.zeros(L.size)
        saddle = np.zeros(L.size, dtype=complex)
        taylor = {}

        def tay(T):
            if T not in taylor:
                taylor[T] = self._phase_taylor(kern, direction, -c, T)
            return taylor[T]

        def close(j, candidates):
            return self._closing_point(tay, direction, -c, L[j], candidates, tol)

        info = {}
        for j in range(L.size):
            post = np.nonzero(settled[:, j] & closable[:, j] & (ts <= self.quad.through_cap))[0]
            pre = np.nonzero(~signs[:, j] & closable[:, j])[0]
            turn = np.nonzero(~settled[:, j])[0]
            if turn.size == 0:
                plan_t[j] = close(j, ts[post]) if post.size else cap
                continue
            # stationary point near the last sign change (or beyond the scan)
            s = turn[-1]
            before = np.nonzero(signs[:s, j])[0]
            pre = pre[pre >= (before[-1] + 1 if before.size else 0)]
            if s < ts.size - 1:
                size = math.exp(amp[s, j]) * math.sqrt(2.0 * math.pi / max(abs(phi2[s, 0]), 1e-300))
            else:
                k_e = pre[-1] if pre.size else -1
                size = self._far_saddle(amp[k_e, j], phi1[k_e, j], ts[k_e])
            info[j] = (post, pre, s, size)
        wanted = [j for j, (_, _, s, size) in info.items() if s < ts.size - 1 and size > tol]
        terms = dict(zip(wanted, self._saddle_terms(kern, direction, -c, L[wanted],
                                                    ts[[info[j][2] for j in wanted]], 0.9 * cap)))
        for j, (post, pre, s, size) in info.items():
            term = terms.get(j)
            if pre.size and (size <= tol or (term is not None and term[1] <= tol) or not post.size):
                # endpoint expansion before the stationary point plus the saddle term
                plan_t[j] = close(j, ts[pre])
                if term is not None:
                    saddle[j], bound[j] = term
                else:
                    bound[j] = size
            elif post.size:
                plan_t[j] = close(j, ts[post])
            else:
                plan_t[j] = cap
                bound[j] = size
        forced = np.unique(plan_t)
        width = self._width_fn(direction, -c, L, float(forced[-1]), n)
        edges = [e for e in (0.0, 0.05, 0.1, 0.2, 0.4, 0.7, 1.0) if e < forced[0]]
        t = edges[-1]
        for stop in forced:
            while t < stop:
                t = min(t + width(t), stop)
                edges.append(t)
        edges = np.array(edges)
        where = np.searchsorted(edges, plan_t)
        seg_edges = np.array([0.0, 0.4 * c, 0.7 * c, 0.9 * c, c])
        tails = {T: tay(T) for T in forced}
        values = []
        trunc = np.zeros(L.size)
        for m in (n, 2 * n):
            seg = self._apply(self._rule(-1.0 + 0j, 0.0, seg_edges, m), L)
            line = self._rule(direction, -c, edges, m)
            vals = np.empty(L.size, dtype=complex)
            for j in range(L.size):
                k_e = line.edge_index[where[j]]
                prefix = line.wd[:k_e] @ np.exp(line.logk[:k_e] - line.z[:k_e] * L[j])
                logk_T, kap_coef = tails[plan_t[j]]
                zT = -c + direction * plan_t[j]
                tail, err = _ibp_tail(logk_T - zT * L[j], direction, kap_coef, L[j])
                vals[j] = seg[j] + prefix + tail + saddle[j]
                trunc[j] = max(trunc[j], err + bound[j])
            values.append(vals)
        return values[1], np.abs(values[1] - values[0]), trunc

    def _closing_point(self, taylor, direction, shift, L, candidates, tol):
        """First candidate at which the integration-by-parts tail meets ``tol``.

        ``taylor(T)`` supplies the phase data at a path point.
        """
        for T in candidates[::4]:
            logk_T, kap_coef = taylor(float(T))
            z_T = shift + direction * T
            if _ibp_tail(logk_T - z_T * L, direction, kap_coef, L)[1] <= tol:
                return float(T)
        return float(candidates[-1])

    def _phase_taylor(self, kern, direction, shift, T, order=14):
        """``log K`` at the path point ``T`` and Taylor coefficients of ``kappa(z(T + s))`` in ``s``."""
        r = min(0.5 * T, 8.0)
        m = 32
        s = r * np.exp(2j * np.pi * np.arange(m) / m)
        z = shift + direction * (T + s)
        coef = np.fft.fft(kern.log_derivative(z)) / m / r ** np.arange(m)
        return complex(kern.log_value(shift + direction * T)), coef[:order]

    def _saddle_terms(self, kern, direction, shift, L, t0, limit):
        """Stationary-phase terms of ``exp(Phi)`` to first order, with error sizes.

        Newton's method on ``Phi'(z) = kappa(z) - L`` starts from the path
        points ``shift + direction * t0``.  Returns one ``(value, error)`` pair
        per ``L``, or ``None`` where the iteration does not settle inside
        ``|z| < limit``.
        """
        if len(L) == 0:
            return []
        L = np.asarray(L, dtype=complex)
        z = shift + direction * np.asarray(t0, dtype=float) + 0j
        active = np.ones(L.size, bool)
        failed = np.zeros(L.size, bool)
        for _ in range(60):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            zi = z[idx]
            dz = -(kern.log_derivative(zi) - L[idx]) / kern.log_second_derivative(zi)
            step = np.abs(dz)
            reach = 0.5 * np.abs(zi - shift)
            dz = np.where(step > reach, dz * reach / np.maximum(step, 1e-300), dz)
            out = np.abs(zi + dz) >= limit
            failed[idx[out]] = True
            active[idx[out]] = False
            ok = idx[~out]
            z[ok] = z[ok] + dz[~out]
            active[ok[step[~out] <= 1e-14 * np.abs(z[ok])]] = False
        failed |= active
        result = [None] * L.size
        good = np.nonzero(~failed)[0]
        if good.size:
            zg = z[good]
            p2 = kern.log_second_derivative(zg)
            h = 1e-3 * np.abs(zg)
            lo = kern.log_second_derivative(zg - h)
            hi = kern.log_second_derivative(zg + h)
            p3 = (hi - lo) / (2 * h)
            p4 = (hi - 2 * p2 + lo) / h ** 2
            root = np.sqrt(2.0 * np.pi / -p2)
            root = np.where((root * np.conj(direction)).real < 0, -root, root)
            value = np.exp(kern.log_value(zg) - zg * L[good]) * root
            correction = p4 / (8 * p2 ** 2) - 5 * p3 ** 2 / (24 * p2 ** 3)
            # the first correction is included; the error is sized by its square
            for i, j in enumerate(good):
                result[j] = (complex(value[i] * (1 + correction[i])),
                             float(abs(value[i]) * (12 * abs(correction[i]) ** 2 + 1e-12)))
        return result

    def _far_saddle(self, log_amp, phi1, t_e):
        """Size of a stationary-phase contribution beyond the scanned range.

        Far out the phase rate behaves like ``a - rate * log t``, which places the
        stationary point at ``t_e * exp(|phase rate| / rate)``.
        """
        cp = self.kernel.gamma_rate
        if cp <= 0:
            return float("inf")
        t_star = t_e * math.exp(min(abs(phi1.imag) / cp, 600.0))
        p = max(-t_e * phi1.real, 0.0)
        log_size = log_amp - p * math.log(t_star / t_e) + 0.5 * math.log(2.0 * math.pi * t_star / cp)
        return float(math.exp(min(log_size, 700.0)))

    # -- public -----------------------------------------------------------

    def transform(self, l: int, log_zeta, n: int | None = None, boundary_ok: bool = True):
        """``h_l`` at ``zeta = exp(log_zeta)``; returns (value, quadrature error, truncation error)."""
        n = n or self.quad.nodes_per_unit
        L = np.atleast_1d(np.asarray(log_zeta, dtype=complex))
        if l not in DIRECTIONS:
            raise DomainViolation("l must be -1, 0 or 1")
        direction = DIRECTIONS[l]
        if l == 0:
            if np.any(L.real < 0) or (not boundary_ok and np.any(L.real <= 0)):
                raise DomainViolation("h_0 needs |zeta| > 1")
            return self._decaying(direction, L, n)
        margin = -l * L.imag - self.growth
        if np.any(L.imag * l > 0) or np.any(np.abs(L.imag) >= math.pi):
            raise DomainViolation("h_{+-1} needs zeta in the sector  rate < -l arg zeta < pi")
        if np.any(margin < -1e-12) or (not boundary_ok and np.any(margin <= 1e-12)):
            raise DomainViolation(
                f"-l arg zeta must exceed the kernel growth rate {self.growth:.6g}"
            )
        edge = margin <= 1e-9
        val = np.empty(L.size, dtype=complex)
        qerr = np.empty(L.size)
        terr = np.empty(L.size)
        if np.any(~edge):
            v, q, t = self._decaying(direction, L[~edge], n)
            val[~edge], qerr[~edge], terr[~edge] = v, q, t
        if np.any(edge):
            idx = np.nonzero(edge)[0]
            # bands of unit width in Re L share one path
            keys = np.floor(L[idx].real).astype(int)
            for key in np.unique(keys):
                sel = idx[keys == key]
                v, q, t = self._edge_band(direction, L[sel], n)
                val[sel], qerr[sel], terr[sel] = v, q, t
        return val, qerr, terr

    def asymptotic(self, W):
        coef, noise = self.coefficients()
        return asymptotic_transform(coef, noise, W)
