import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from muntz_sector import sequences as S
from muntz_sector.errors import EmptyGrid, HorizonExceeded, MuntzError, NonPositiveGap


def harmonic(n):
    return math.fsum(1.0 / k for k in range(1, n + 1))


def test_characteristic_logarithm_examples():
    sq = S.power(2)
    assert S.characteristic_logarithm(sq, 9) == pytest.approx(1 + 1 / 4 + 1 / 9, abs=1e-15)
    assert S.characteristic_logarithm(sq, 0.5) == 0
    assert S.characteristic_logarithm(S.power(1), 10) == pytest.approx(harmonic(10), abs=1e-15)
    assert harmonic(10) == pytest.approx(2.9289682, abs=1e-7)


def test_counting_examples():
    assert S.counting_function(S.power(2), 9) == 3
    assert S.counting_function(S.power(2), 0.5) == 0
    assert S.counting_function(S.arithmetic_progression(2.0), 3) == 6
    assert S.counting_function(S.arithmetic_progression(1.0), 7.5) == 7


def test_gap_examples():
    assert S.gap(S.power(2)) == 1
    assert S.gap(S.arithmetic(0.3, 1.0)) == 1
    assert S.gap(S.from_values([0.5, 0.6, 2])) == pytest.approx(0.1)
    assert S.gap(S.arithmetic_progression(2.0)) == 0.5


def test_ties_rejected():
    with pytest.raises(NonPositiveGap):
        S.from_values([1.0, 2.0, 2.0])
    with pytest.raises(NonPositiveGap):
        S.from_values([-1.0, 2.0])
    with pytest.raises(NonPositiveGap):
        S.power(0.5)


def test_explicit_horizon():
    seq = S.from_values([1.1, 2.7, 3.9])
    assert seq.characteristic_logarithm(3.9) == pytest.approx(1 / 1.1 + 1 / 2.7 + 1 / 3.9)
    with pytest.raises(HorizonExceeded):
        seq.characteristic_logarithm(5.0)
    with pytest.raises(HorizonExceeded):
        seq.count(5.0)


def test_density():
    assert S.muntz_density_test(S.power(2)) == S.Density.INCOMPLETE
    assert S.muntz_density_test(S.arithmetic(0.0, 1.0)) == S.Density.DENSE
    assert S.muntz_density_test(S.from_values([1.1, 2.7, 3.9])) == S.Density.INCONCLUSIVE
    assert S.muntz_density_test(S.arithmetic_progression(0.25)) == S.Density.DENSE


def test_progression_example_h1000():
    val = S.arithmetic_progression(1.0).characteristic_logarithm(1000)
    assert val == pytest.approx(harmonic(1000), abs=1e-12)
    assert val - (math.log(1000) + S.EULER_GAMMA) == pytest.approx(5.0e-4, abs=1e-6)


@pytest.mark.parametrize("b", [0.5, 1.0, 2.0])
def test_progression_asymptote_within_one_over_t(b):
    seq = S.arithmetic_progression(b)
    t = np.geomspace(10, 1e4, 60)
    resid = seq.characteristic_logarithm(t) - S.progression_log_asymptote(b, t)
    assert np.max(np.abs(resid) * t) <= 1.0


@pytest.mark.parametrize("text,expected", [
    ("power:2", S.log_asymptote(S.power(2))),
    ("arithmetic:0.3:1", S.log_asymptote(S.arithmetic(0.3, 1.0))),
    ("progression:0.5", S.log_asymptote(S.arithmetic_progression(0.5))),
])
def test_log_asymptote_against_partial_sums(text, expected):
    seq = S.parse_sequence(text)
    b, A2 = expected
    t = 1e6
    assert seq.characteristic_logarithm(t) - b * math.log(t) == pytest.approx(A2, abs=5e-3 if b == 0 else 2e-6)


def test_log_asymptote_rejects_lists():
    with pytest.raises(MuntzError):
        S.log_asymptote(S.from_values([1.0, 2.0]))


def test_parse_and_config_roundtrip():
    seq = S.parse_sequence("arithmetic:0.3:1", horizon=20)
    again = S.sequence_from_config(seq.to_config())
    np.testing.assert_array_equal(seq.values, again.values)
    lst = S.parse_sequence("list:1.5,2.7,4.0")
    assert lst.values.tolist() == [1.5, 2.7, 4.0]
    for bad in ("bogus:1", "power", "power:x", "arithmetic:1"):
        with pytest.raises(MuntzError):
            S.parse_sequence(bad)
    with pytest.raises(MuntzError):
        S.sequence_from_config({"kind": "power", "parameters": [2], "colour": "red"})


seqs = st.sampled_from([S.power(2), S.power(1.5), S.arithmetic(0.3, 1.0), S.arithmetic_progression(2.0),
                        S.arithmetic_progression(0.25)])
pos = st.floats(0.01, 500)


@given(seqs, pos, pos)
def test_monotone_and_shared_jumps(seq, a, b):
    t1, t2 = sorted((a, b))
    assert seq.characteristic_logarithm(t1) <= seq.characteristic_logarithm(t2)
    assert seq.count(t1) <= seq.count(t2)
    # the two step functions jump at the same points
    log = seq.step_function("log", upto=t2)
    cnt = seq.step_function("count", upto=t2)
    np.testing.assert_array_equal(log.points, cnt.points)


@given(seqs, pos, pos)
def test_counting_bound(seq, a, b):
    r, R = sorted((a, b))
    if R <= r:
        return
    lhs = seq.count(R) - seq.count(r)
    rhs = R * (seq.characteristic_logarithm(R) - seq.characteristic_logarithm(r))
    assert lhs <= rhs * (1 + 1e-12) + 1e-12


@given(seqs, pos)
def test_step_accumulator_matches_partial_sum(seq, t):
    acc = seq.step_function("log", upto=max(t, 1.0))
    assert acc.value_at(t) == pytest.approx(seq.characteristic_logarithm(t), rel=1e-12, abs=1e-15)
    for p in acc.points[:3]:
        assert acc.jump_at(p) == pytest.approx(1.0 / p)
        assert acc.left_limit(p) < acc.value_at(p)


def test_step_table_interpolation():
    tab = S.StepTable([1.0, 2.0, 4.0], [0.5, 0.25, 0.1])
    assert tab(1.5) == 0.5
    assert tab(2.0) == 0.25
    assert tab(100.0) == 0.1
    assert tab(0.5) == 0.5
    with pytest.raises(ValueError):
        S.StepTable([2.0, 1.0], [1.0, 2.0])


def test_condition3_examples():
    b = 0.25
    alpha = math.pi * b
    seq = S.arithmetic_progression(b)
    eps = S.StepTable.from_function(lambda x: 2.0 / x, np.linspace(1, 2000, 4000))
    rng = np.random.default_rng(7)
    x = rng.uniform(1, 500, 100)
    y = x * rng.uniform(1.01, 4, 100)
    assert S.check_condition3(seq, alpha, eps, zip(x, y)).holds

    xs = np.arange(1, 51, dtype=float)
    rep = S.check_condition3(S.power(1), math.pi / 2, lambda x: 0.01, zip(xs, 2 * xs))
    assert not rep.holds and rep.worst_margin < 0

    sq = S.power(2)
    rep = S.check_condition3(sq, math.pi / 4, lambda x: 0.0, [(5.0, 8.0)])
    assert rep.holds and rep.worst_margin == pytest.approx(0.25 * math.log(8 / 5))


def test_condition3_errors():
    with pytest.raises(EmptyGrid):
        S.check_condition3(S.power(2), 0.5, lambda x: 0.0, [])
    with pytest.raises(ValueError):
        S.check_condition3(S.power(2), 0.5, lambda x: 0.0, [(0.5, 2.0)])
