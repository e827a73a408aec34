import math

import numpy as np
import pytest
from hypothesis import example, given
from hypothesis import strategies as st

from muntz_sector import fuchs as F
from muntz_sector import sequences as S
from muntz_sector.errors import EmptyGrid, PoleError, SieveViolation, TruncationInsufficient

NAT = S.power(1)
SQ = S.power(2)


def brute_log_G(lams, z):
    """Direct product over a long explicit prefix, independent of the tail series."""
    w = z / lams
    return np.sum(np.log1p(-w) - np.log1p(w) + 2 * w)


@pytest.fixture(scope="module")
def nat_prod():
    return F.TruncatedProduct.for_radius(NAT, 20.0)


def test_trivial_values(nat_prod):
    assert F.evaluate_G(nat_prod, 0.0) == pytest.approx(1.0)
    assert abs(F.evaluate_G(nat_prod, 1.0)) < 1e-300
    for y in (0.5, 3.0, 17.0):
        assert abs(F.evaluate_G(nat_prod, 1j * y)) == pytest.approx(1.0, abs=1e-12)
    z = 2 + 1j
    assert abs(F.evaluate_G(nat_prod, z) * F.evaluate_G(nat_prod, -z) - 1) < 1e-10


def test_against_long_direct_product(nat_prod):
    lams = np.arange(1, 4_000_001, dtype=float)
    for z in (2 + 1j, 0.5 - 3j, 7.3 + 0.2j):
        direct = brute_log_G(lams, z)
        # the omitted tail of the direct product is about 2|z|^3/(3 * 2 * N^2)
        assert abs(nat_prod.log_G(z) - direct) < 1e-10


@given(st.floats(0, 15), st.floats(-15, 15))
def test_conjugate_symmetry(x, y):
    prod = F.TruncatedProduct.for_radius(SQ, 20.0)
    z = complex(x, y)
    if np.min(np.abs(z + prod.exponents)) < prod.guard:
        return
    a, b = prod.log_G(z), prod.log_G(z.conjugate())
    assert abs(a.real - b.real) < 1e-12
    assert abs(math.remainder(a.imag + b.imag, 2 * math.pi)) < 1e-10


@given(st.floats(0, 1), st.floats(-math.pi, math.pi))
@example(0.9, 0.0)  # lands exactly on the zero 144
def test_doubling_order_within_tail_bound(r, phi):
    small = F.TruncatedProduct(SQ, 40)
    big = F.TruncatedProduct(SQ, 80)
    z = r * small.accurate_radius * complex(math.cos(phi), math.sin(phi))
    # log|G| is -inf at the zeros and the poles, where the difference is undefined
    if np.min(np.abs(np.abs(z.real) - small.exponents) + abs(z.imag)) < small.guard:
        return
    diff = big.log_G(z) - small.log_G(z)
    assert abs(diff.real) <= small.tail_error(z) + big.tail_error(z) + 1e-12 * (1 + abs(small.log_G(z)))


def test_pole_and_truncation_errors(nat_prod):
    with pytest.raises(PoleError):
        nat_prod.log_G(-1.0 + 0.001)
    with pytest.raises(TruncationInsufficient):
        nat_prod.log_G(10 * nat_prod.radius_limit)


def test_sieve_membership_examples():
    region = F.SieveRegion(NAT)
    assert region.delta0 == 0.25
    assert F.sieve_membership(region, 1.5)
    assert not F.sieve_membership(region, 1.1)
    assert not F.sieve_membership(region, -1.0)
    assert F.sieve_membership(region, 3.25)


def test_certify_examples(nat_prod):
    grid = F.sieve_grid(NAT, (0.5, 15), (-15, 15), (20, 10))
    rep = F.certify_fuchs_bounds(nat_prod, grid)
    assert rep.passed and math.isfinite(rep.a_upper) and math.isfinite(rep.a_lower)
    # imaginary-axis points are excluded from the quotient
    rep2 = F.certify_fuchs_bounds(nat_prod, np.concatenate([grid, [3j, 0j]]))
    assert rep2.excluded >= 2
    with pytest.raises(EmptyGrid):
        F.certify_fuchs_bounds(nat_prod, [])
    with pytest.raises(SieveViolation):
        F.certify_fuchs_bounds(nat_prod, [1.05 + 0j])


def test_upper_and_lower_bounds_hold_with_reported_constants(nat_prod):
    grid = F.sieve_grid(NAT, (0.5, 15), (-15, 15), (20, 10))
    rep = F.certify_fuchs_bounds(nat_prod, grid)
    x = grid.real
    lam = NAT.characteristic_logarithm(np.abs(grid))
    logs = nat_prod.log_G(grid).real
    assert np.all(logs <= x * lam + rep.a_upper * x + 1e-12)
    assert np.all(logs >= x * lam - rep.a_lower * x - 1e-12)


def test_g0_values(nat_prod):
    assert F.evaluate_g0(nat_prod, 0.0, 0.0, 0.0) == pytest.approx(1 / math.sqrt(math.pi))
    assert abs(F.evaluate_g0(nat_prod, 1.0, 0.5, 3.0)) < 1e-250
    assert F.g0_shift(0.0, 1.5) == 3.0
    assert F.g0_shift(0.5, 1.0) == pytest.approx(2.0)


def test_g_zeros(nat_prod):
    A = 5.0
    assert F.evaluate_g(nat_prod, math.pi / 4, A, 0.0) == 0
    for n in (1, 2, 5):
        assert abs(F.evaluate_g(nat_prod, math.pi / 4, A, float(n))) < 1e-250


def test_psi_k_zeros_and_diagonal(nat_prod):
    b, A2 = S.log_asymptote(NAT)
    k = 3
    for m in (1, 2, 5):
        assert abs(F.evaluate_psi_k(nat_prod, k, b, A2, float(m))) < 1e-250
    lk = 3.0
    diag = F.evaluate_psi_k(nat_prod, k, b, A2, lk)
    # independent oracle: centred difference of g0 itself
    h = 1e-5
    g0 = F.g0_kernel(nat_prod, b, A2)
    deriv = (g0.value(lk + h) - g0.value(lk - h)) / (2 * h)
    assert diag == pytest.approx(lk ** 2 * deriv / (1 + lk) ** 4, rel=1e-8)
    assert F.g0_derivative_at_exponent(nat_prod, k, b, A2) == pytest.approx(deriv, rel=1e-8)
    assert abs(diag) > 0


def test_g_decay_on_imaginary_axis(g_squares):
    """(|g| + |g'| + |g''|)(iy) (1 + y^2) e^{-alpha |y|} stays bounded."""
    alpha = math.pi / 4

    def combined(y, r=0.05, n=32):
        th = 2 * np.pi * np.arange(n) / n
        v = g_squares.value(1j * y + r * np.exp(1j * th))
        d1 = np.mean(v * np.exp(-1j * th)) / r
        d2 = 2 * np.mean(v * np.exp(-2j * th)) / r ** 2
        return abs(g_squares.value(1j * y)) + abs(d1) + abs(d2)

    ys = np.linspace(-45, 45, 91)
    ratio = np.array([combined(y) * (1 + y * y) * math.exp(-alpha * abs(y)) for y in ys])
    inner, outer = ratio[np.abs(ys) <= 20], ratio[np.abs(ys) > 20]
    assert np.all(np.isfinite(ratio))
    assert outer.max() <= 2 * inner.max()


def test_growth_profile_small_window():
    prof = F.growth_profile(S.arithmetic(0.3, 1.0), x_min=10, x_max=300, count=600)
    assert prof.b == 1.0
    assert abs(prof.final_sup()) < 0.05
    assert prof.worst_psi_rate() < 0.1
    assert prof.ks.size == 5
