"""Complex log-Gamma, polygammas, and the two auxiliary functions of the growth estimates.

``log_gamma`` uses a Lanczos rational core (g = 7, 9 coefficients) on
``Re z >= 1/2`` and the reflection formula elsewhere, with the branch
integer chosen so that the result is the principal branch (continuous off
the negative real axis, real on the positive axis).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import PoleError

LOG_PI = math.log(math.pi)
HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)

_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])

# B_{2k} / (2k) and B_{2k} for the asymptotic polygamma series
_BERN = np.array([1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510])


def _as_complex(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _check_poles(z):
    bad = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(bad):
        raise PoleError(f"Gamma has a pole at {z[bad].ravel()[0].real:g}")


def _lanczos_loggamma(z):
    """Principal log Gamma for Re z >= 1/2."""
    w = z - 1.0
    acc = np.full(w.shape, _LANCZOS[0], dtype=complex)
    for k in range(1, _LANCZOS.size):
        acc = acc + _LANCZOS[k] / (w + k)
    t = w + _LANCZOS_G + 0.5
    return HALF_LOG_2PI + (w + 0.5) * np.log(t) - t + np.log(acc)


def log_sin_pi(z):
    """Principal ``Log sin(pi z)``, stable for large ``|Im z|``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    big = np.abs(z.imag) > 10
    small = ~big
    out[small] = np.log(np.sin(np.pi * z[small]))
    zb = z[big]
    # sign(y) * i*pi*z has real part -pi|y|, so the exponential cannot overflow
    sgn = np.sign(zb.imag)
    val = np.log(0.5j * sgn) - 1j * sgn * np.pi * zb + np.log1p(-np.exp(2j * sgn * np.pi * zb))
    # wrap onto the principal argument
    val = val.real + 1j * (np.angle(np.exp(1j * val.imag)))
    out[big] = val
    return out


def log_gamma(z):
    """Principal-branch ``log Gamma(z)`` for complex ``z`` (scalar or array).

    Raises :class:`PoleError` at nonpositive integers.
    """
    z, scalar = _as_complex(z)
    z = np.atleast_1d(z)
    _check_poles(z)
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    out[right] = _lanczos_loggamma(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        refl = LOG_PI - log_sin_pi(zl) - _lanczos_loggamma(1.0 - zl)
        branch = np.sign(zl.imag) * np.floor(0.5 * zl.real + 0.25)
        out[left] = refl + 2j * np.pi * branch
        real_axis = zl.imag == 0
        if np.any(real_axis):
            # on the cut keep the real part only (log |Gamma|), like most libraries
            tmp = out[left]
            tmp[real_axis] = tmp[real_axis].real + 0j
            out[left] = tmp
    return out[0] if scalar else out


def gamma(z):
    """``Gamma(z)``; on the negative real axis the sign dropped by ``log_gamma`` is restored."""
    z_arr = np.asarray(z, dtype=complex)
    out = np.exp(log_gamma(z_arr))
    neg = (z_arr.imag == 0) & (z_arr.real < 0)
    if np.any(neg):
        flips = np.floor(-z_arr.real) + 1
        out = np.where(neg & (flips % 2 == 1), -out, out)
    return out


def _shift_up(z, threshold=10.0):
    """Number of unit shifts bringing every Re z above ``threshold``."""
    return int(max(0.0, math.ceil(threshold - float(np.min(z.real))))) if z.size else 0


def digamma(z):
    """Complex digamma via upward recurrence and the asymptotic series."""
    z, scalar = _as_complex(z)
    z = np.atleast_1d(z)
    _check_poles(z)
    left = z.real < 0.5
    zz = np.where(left, 1.0 - z, z)
    m = _shift_up(zz)
    acc = np.zeros(zz.shape, dtype=complex)
    for k in range(m):
        acc -= 1.0 / (zz + k)
    w = zz + m
    w2 = 1.0 / (w * w)
    series = np.zeros(w.shape, dtype=complex)
    for k in range(_BERN.size - 1, -1, -1):
        series = series * w2 + _BERN[k] / (2 * (k + 1))
    val = acc + np.log(w) - 0.5 / w - series * w2
    if np.any(left):
        zl = z[left]
        val[left] = val[left] - np.pi / np.tan(np.pi * zl)
    return val[0] if scalar else val


def trigamma(z):
    z, scalar = _as_complex(z)
    z = np.atleast_1d(z)
    _check_poles(z)
    left = z.real < 0.5
    zz = np.where(left, 1.0 - z, z)
    m = _shift_up(zz)
    acc = np.zeros(zz.shape, dtype=complex)
    for k in range(m):
        acc += 1.0 / (zz + k) ** 2
    w = zz + m
    w2 = 1.0 / (w * w)
    series = np.zeros(w.shape, dtype=complex)
    for k in range(_BERN.size - 1, -1, -1):
        series = series * w2 + _BERN[k]
    val = acc + 1.0 / w + 0.5 * w2 + series * w2 / w
    if np.any(left):
        zl = z[left]
        val[left] = np.pi ** 2 * np.exp(-2.0 * log_sin_pi(zl)) - val[left]
    return val[0] if scalar else val


def gamma_asymptotic_residual(z) -> float:
    """``c1(z) = log|Gamma(1/2+z)| - x log|z+1/2| + |y arg(z+1/2)| + x`` for ``Re z >= 0``.

    The growth estimates rely on ``|c1| <= 10`` on the closed right half-plane.
    """
    z = complex(z)
    if z.real < 0:
        raise ValueError("c1 is only defined on Re z >= 0")
    w = z + 0.5
    lg = log_gamma(w).real
    return float(lg - z.real * math.log(abs(w)) + abs(z.imag * math.atan2(w.imag, w.real)) + z.real)


def malliavin_psi(s):
    """``2 + s log|(s-1)/(s+1)|``; returns ``-inf`` at ``s = 1``."""
    s_arr = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2.0 + s_arr * np.log(np.abs((s_arr - 1.0) / (s_arr + 1.0)))
    out = np.where(s_arr == 0, 2.0, out)
    out = np.where(s_arr == 1, -np.inf, out)
    return float(out) if out.ndim == 0 else out


def psi_root(tol: float = 1e-12) -> float:
    """Zero of ``malliavin_psi`` in ``(5/6, 6/7)`` by bisection."""
    lo, hi = 5.0 / 6.0, 6.0 / 7.0
    f_lo = malliavin_psi(lo)
    if not (f_lo > 0 > malliavin_psi(hi)):
        raise ArithmeticError("no sign change of psi on [5/6, 6/7]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if malliavin_psi(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def epsilon3(x):
    """``-int_0^x log|(1-t)/(1+t)| dt = (1+x)log(1+x) + (1-x)log|1-x|``."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise ValueError("epsilon3 needs x >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        one_minus = np.abs(1.0 - x_arr)
        right = np.where(one_minus > 0, (1.0 - x_arr) * np.log(np.where(one_minus > 0, one_minus, 1.0)), 0.0)
    out = (1.0 + x_arr) * np.log1p(x_arr) + right
    return float(out) if out.ndim == 0 else out
