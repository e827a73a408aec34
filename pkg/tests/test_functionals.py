import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muntz_sector import fuchs as F
from muntz_sector import functionals as FN
from muntz_sector import sequences as S
from muntz_sector.errors import DomainViolation, InsufficientSamples, MuntzError, PreconditionViolation
from muntz_sector.transforms import QuadratureSpec

ALPHA = math.pi / 4


@pytest.fixture(scope="module")
def table(g_squares):
    return FN.operator_table(g_squares, ALPHA, None, 25.0)


def test_h0_real_on_real_axis(g_squares):
    r = FN.half_line_transform(g_squares, 0, 2.0)
    assert abs(r.value.imag) <= r.error + 1e-20
    assert abs(r.value) > 0


def test_h1_inside_domain(g_squares):
    r = FN.half_line_transform(g_squares, 1, 0.5 * np.exp(-1j * math.pi / 2))
    assert np.isfinite(r.value) and r.error < 1e-12 * max(1.0, abs(r.value)) + 1e-15
    r2 = FN.half_line_transform(g_squares, -1, 0.5 * np.exp(1j * math.pi / 2))
    assert r2.value == pytest.approx(np.conj(r.value), rel=1e-10)


def test_domain_violations(g_squares):
    with pytest.raises(DomainViolation):
        FN.half_line_transform(g_squares, 0, 0.5)
    with pytest.raises(DomainViolation):
        FN.half_line_transform(g_squares, 1, 0.5 * np.exp(1j * math.pi / 2))
    with pytest.raises(DomainViolation):
        FN.half_line_transform(g_squares, -1, 0.5 * np.exp(-1j * math.pi / 2))


@pytest.mark.parametrize("l", [1, -1])
def test_glue_between_transforms(g_squares, l):
    phis = -l * np.linspace(ALPHA * 1.05, math.pi * 0.95, 10)
    for phi in phis:
        z = 1.5 * np.exp(1j * phi)
        a = FN.half_line_transform(g_squares, 0, z)
        b = FN.half_line_transform(g_squares, l, z)
        assert abs(a.value - b.value) <= a.error + b.error + 1e-16


def test_T_vanishes_on_the_system(table):
    for lam in (1.0, 4.0, 9.0, 25.0):
        r = table.apply(FN.monomial(lam))
        assert abs(r.value) <= 10 * r.error


def test_T_constant_function(table):
    r = table.apply(lambda z: np.ones_like(z))
    assert abs(r.value) <= 10 * r.error


def test_T_off_system_matches_kernel(table, g_squares):
    for mu in (2.5, 0.5, 1.5 + 1j):
        r = table.apply(FN.monomial(mu))
        g = complex(g_squares.checked_value(mu))
        assert abs(r.value - g) <= 10 * r.error
        if mu != 2.5:
            # g(2.5) is about 8e-13, below what this table resolves
            assert abs(g) > 10 * r.error


@settings(max_examples=15)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=6))
def test_boundedness_for_random_polynomials(table, coefs):
    def f(z):
        return sum(c * z ** j for j, c in enumerate(coefs))

    arc, lower, upper = table.boundary_points()
    sup = max(np.max(np.abs(f(arc))), np.max(np.abs(f(lower))), np.max(np.abs(f(upper))))
    r = table.apply(f)
    assert abs(r.value) <= table.norm_upper() * sup + r.error


def test_linearity(table):
    f = FN.monomial(2.5)
    a, b = table.apply(f), table.apply(lambda z: 2 * f(z))
    assert b.value == pytest.approx(2 * a.value, rel=1e-14)


def test_boundary_samples(table):
    f = FN.monomial(2.5)
    fine = FN.BoundarySamples.from_function(f, ALPHA, 801, 2001, table.u_max)
    r = table.apply(fine)
    direct = table.apply(f)
    assert abs(r.value - direct.value) <= 1e-6 * abs(direct.value) + r.error
    coarse = FN.BoundarySamples.from_function(f, ALPHA, 5, 5, table.u_max)
    with pytest.raises(InsufficientSamples):
        table.apply(coarse)


def test_domain_of_operator_table(g_squares):
    with pytest.raises(DomainViolation):
        FN.build_operator_table(g_squares, 0.1)


@pytest.fixture(scope="module")
def lam(psi_product):
    return psi_product.exponents


def test_T_k_delta_biorthogonal_rows(psi_product, lam):
    delta = 1 / 25
    for k in (1, 3):
        target = FN.biorthogonal_target(psi_product, k, delta)
        for m in (1, 2, 3, 4):
            r = FN.functional_T_k_delta(k, delta, FN.monomial(float(lam[m - 1])), psi_product, ALPHA,
                                        frequency=25.0)
            expect = target if k == m else 0
            assert abs(r.value - expect) <= 1e-6 * abs(target) + r.error
    with pytest.raises(MuntzError):
        FN.functional_T_k_delta(1, 0.0, FN.monomial(1.0), psi_product, ALPHA)


@pytest.fixture(scope="module")
def two_term(psi_product, lam):
    def f(z):
        return 3 * FN.monomial(float(lam[0]))(z) - 2 * FN.monomial(float(lam[1]))(z)

    return f, FN.recover_coefficients(f, psi_product, 5, ALPHA)


def test_recover_two_terms(two_term):
    _, exp = two_term
    np.testing.assert_allclose(exp.coefficients, [3, -2, 0, 0, 0], atol=1e-6)
    assert exp.delta == pytest.approx(1 / 25)
    assert exp.delta_consistent
    assert np.all(exp.delta_discrepancy <= 1e-6)


def test_reconstruct_outside_the_sector(two_term):
    f, exp = two_term
    z = 0.3 * np.exp(1j * math.pi / 3)
    assert abs(FN.reconstruct(exp, z) - f(np.array([z]))[0]) <= 1e-5


def test_recover_zero(psi_product):
    exp = FN.recover_coefficients(lambda z: np.zeros_like(z), psi_product, 5, ALPHA, check_delta=False)
    assert np.all(exp.coefficients == 0)


def test_reconstruct_trivial_cases():
    single = FN.MuntzExpansion(np.array([1.0]), np.array([1.0 + 0j]), np.array([0.0]))
    assert FN.reconstruct(single, 0.5) == pytest.approx(0.5)
    empty = FN.MuntzExpansion(np.zeros(0), np.zeros(0, complex), np.zeros(0))
    assert FN.reconstruct(empty, 0.5) == 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        FN.reconstruct(single, 1.2)
    assert any(issubclass(w.category, FN.DivergenceRiskWarning) for w in caught)


def test_recover_rejects_bad_K(psi_product):
    with pytest.raises(MuntzError):
        FN.recover_coefficients(lambda z: z, psi_product, 0, ALPHA)


def test_crosscheck_special_points(g_squares):
    res = FN.representation_crosscheck(np.array([1.0, 0.5]), g_squares, ALPHA,
                                       QuadratureSpec())
    assert res[0].g == 0
    assert abs(res[0].rhs.value) <= 10 * res[0].estimate
    assert res[1].residual <= 10 * res[1].estimate
    with pytest.raises(DomainViolation):
        FN.representation_crosscheck(1j, g_squares, ALPHA)


def test_witness_preconditions(g_squares):
    with pytest.raises(PreconditionViolation):
        FN.incompleteness_witness(9.0, g_squares, ALPHA)
    with pytest.raises(PreconditionViolation):
        FN.incompleteness_witness(-1.0, g_squares, ALPHA)


def test_least_squares_residual_nonincreasing(squares):
    res = [FN.least_squares_residual(2.5, squares.head(K), ALPHA) for K in (3, 6, 12)]
    assert res[0] >= res[1] - 1e-12 >= res[2] - 2e-12
