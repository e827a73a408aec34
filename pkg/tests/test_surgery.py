import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from muntz_sector import sequences as S
from muntz_sector import surgery as G
from muntz_sector.errors import HorizonTooSmall


def phi_brute(seq, prime, horizon, x):
    """inf of lambda' - lambda over s in [x, horizon], scanning every jump point."""
    pts = np.concatenate([[x], seq.exponents_upto(horizon), prime.exponents_upto(horizon)])
    pts = pts[(pts >= x) & (pts <= horizon)]
    d = prime.characteristic_logarithm(pts) - seq.characteristic_logarithm(pts)
    return float(np.min(d))


@pytest.fixture(scope="module")
def squares_case():
    seq, prime = S.power(2), S.arithmetic_progression(0.5)
    return seq, prime, G.lambda_star_pipeline(seq, prime, 500.0)


def test_identical_sequences_give_zero_phi():
    seq = S.power(1.5)
    phi = G.comparison_phi(seq, seq, 200.0)
    assert phi.base == 0 and phi.steps.points.size == 0
    res = G.build_lambda_star(phi, seq, seq)
    assert res.lambda_star.size == 0
    assert res.A1 == 0 and np.all(res.residuals[:, 1] == 0)
    assert res.sequence is None


def test_phi_matches_brute_force():
    seq, prime = S.arithmetic_progression(0.5), S.arithmetic_progression(1.0)
    phi = G.comparison_phi(seq, prime, 300.0)
    for x in np.linspace(0.3, 270, 40):
        assert phi(x) == pytest.approx(phi_brute(seq, prime, 300.0, x), abs=1e-12)


def test_phi_monotone_difference_case():
    # Lambda = {2n}, Lambda' = {n}: lambda' - lambda = H(x)/2 + (fraction) is nondecreasing, so phi equals it
    seq, prime = S.arithmetic_progression(0.5), S.arithmetic_progression(1.0)
    phi = G.comparison_phi(seq, prime, 300.0)
    xs = np.arange(1, 200) + 0.5
    d = prime.characteristic_logarithm(xs) - seq.characteristic_logarithm(xs)
    np.testing.assert_allclose(phi(xs), d, atol=1e-12)


def test_phi_jumps_bounded_by_lambda_prime_jumps(squares_case):
    seq, prime, res = squares_case
    steps = res.phi.steps
    lam_prime = set(prime.exponents_upto(500.0).tolist())
    for a, size in zip(steps.points, steps.sizes):
        assert a in lam_prime
        assert size <= 1.0 / a + 1e-15


def test_horizon_too_small():
    with pytest.raises(HorizonTooSmall):
        G.comparison_phi(S.arithmetic(0.1, 1.0), S.arithmetic_progression(0.5), 2000.0)


def test_lambda_star_is_subsequence(squares_case):
    seq, prime, res = squares_case
    assert res.lambda_star.size > 0
    assert np.all(np.isin(res.lambda_star, prime.exponents_upto(500.0)))
    # every element has the form n/2 with the progression's exact spacing
    assert np.all(res.lambda_star == np.round(res.lambda_star / 2) * 2)


def test_lambda_star_jumps(squares_case):
    _, prime, res = squares_case
    acc = S.StepAccumulator(res.lambda_star, 1.0 / res.lambda_star)
    for a in res.lambda_star:
        assert acc.jump_at(a) <= prime.step_function("log", upto=500.0).jump_at(a) + 1e-15


def test_residual_bound_on_fresh_points(squares_case):
    seq, prime, res = squares_case
    rng = np.random.default_rng(11)
    xs = np.sort(rng.uniform(1, 450, 100))
    lam = seq.characteristic_logarithm(xs)
    resid = lam + res.characteristic_logarithm(xs) - prime.characteristic_logarithm(xs) - res.A1
    eps = G.minimal_epsilon(seq, prime, 500.0)
    assert np.all(np.abs(resid) <= eps(xs) + 1 / xs)
    # the analytic bound sum_{n^2 > x} 1/n^2 <= 1/(sqrt(x) - 1) is an independent choice of eps
    analytic = 1 / np.maximum(np.sqrt(xs) - 1, 1e-9)
    assert np.all(np.abs(resid) <= analytic + 1 / xs)


def test_A1_estimates_agree(squares_case):
    _, _, res = squares_case
    assert res.A1_spread < 1e-3
    assert abs(res.A1 - res.A1_integral) <= 2.0 / res.horizon


def test_minimal_epsilon_is_decreasing_and_sufficient():
    seq, prime = S.power(2), S.arithmetic_progression(0.5)
    eps = G.minimal_epsilon(seq, prime, 500.0)
    assert np.all(np.diff(eps.values) <= 0)
    xs = np.linspace(1, 400, 60)
    for x in xs:
        ys = np.linspace(x, 450, 50)[1:]
        lhs = seq.characteristic_logarithm(ys) - seq.characteristic_logarithm(x)
        rhs = prime.characteristic_logarithm(ys) - prime.characteristic_logarithm(x) + eps(x)
        assert np.all(lhs <= rhs + 1e-12)


def test_adjustment_cases():
    seq = S.from_values(np.arange(1, 50.0) ** 2, 1e4)
    star = np.array([2.0, 4.0, 9.05, 15.9, 20.0, 36.0, 50.0])
    adj = G.adjust_double_points(seq, star, 1.0)
    assert adj.h1 == 0.25
    np.testing.assert_allclose(adj.lambda_double_star, [2.0, 4.25, 9.3, 15.65, 20.0, 36.25, 50.0])
    assert adj.shifted_right == 3 and adj.shifted_left == 1
    expected = sum(1 / a - 1 / b for a, b in [(4, 4.25), (9.05, 9.3), (15.9, 15.65), (36, 36.25)])
    assert adj.A3 == pytest.approx(expected, rel=1e-14)
    assert adj.disjoint and adj.separated
    xs = np.array([10.0, 50.0, 200.0])
    assert np.all(np.abs(G.shift_residuals(star, adj, xs)) <= 3 / xs)


def test_adjustment_noop_when_separated():
    seq = S.power(2)
    star = np.array([2.0, 6.0, 10.0])
    adj = G.adjust_double_points(seq, star, 0.5)
    np.testing.assert_array_equal(adj.lambda_double_star, star)
    assert adj.A3 == 0


@given(st.lists(st.integers(1, 400), min_size=1, max_size=40, unique=True), st.sampled_from([0.5, 1.0, 2.0]))
def test_adjustment_properties(idx, b):
    """Lambda* drawn from {n/b}; after adjustment the union is h1-separated and the shift bound holds."""
    seq = S.power(2)
    star = np.sort(np.array(idx, dtype=float) / b)
    adj = G.adjust_double_points(seq, star, b)
    assert adj.disjoint
    if b <= 1.0:
        # h1 <= 1/(4b) keeps shifted neighbours of {n/b} apart
        assert adj.separated
    xs = np.linspace(2 * adj.h1 + 1, 500, 200)
    assert np.all(np.abs(G.shift_residuals(star, adj, xs)) <= 3 / xs)


def test_large_b_can_break_separation():
    star = np.arange(1, 60) / 2.0
    adj = G.adjust_double_points(S.arithmetic(1.0, 3.0), star, 2.0)
    assert adj.h1 == 0.5
    assert adj.disjoint and not adj.separated


def test_combined_estimate(squares_case):
    seq, prime, res = squares_case
    b = 0.5
    adj = G.adjust_double_points(seq, res.lambda_star, b)
    xs = np.linspace(2 * adj.h1 + 1, 450, 300)
    eps = G.minimal_epsilon(seq, prime, 500.0)
    total = seq.characteristic_logarithm(xs) + adj.characteristic_logarithm(xs)
    asym = S.progression_log_asymptote(b, xs)
    assert np.all(np.abs(total - asym - res.A1 - adj.A3) <= 13 / xs + eps(xs))
