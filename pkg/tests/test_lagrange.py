import numpy as np
import pytest
from hypothesis import given, strategies as st

from bwk.core import BwkInstance, insert_dummy_resource
from bwk.lagrange import (LagrangeParams, game_matrix, lagrange_value, minimax, nash_gap,
                          nash_gap_bound, payoff, payoff_vector)
from bwk.learners import Hedge, LearnerSpec
from bwk.lp import benchmark_lp


def test_params():
    p = LagrangeParams(10.0, 40.0)
    assert p.ratio == 4.0 and p.payoff_range == (-3.0, 2.0)
    with pytest.raises(ValueError):
        LagrangeParams(0.0, 1.0)


def test_lagrange_value_examples():
    M = np.array([[0.5, 0.25]])
    assert lagrange_value(M, 1.0, 2.0, [1.0], [1.0]) == pytest.approx(1.0)
    M = np.array([[0.7, 0.9, 0.2], [0.0, 0.0, 0.0]])
    assert lagrange_value(M, 1.0, 2.0, [0.4, 0.6], [0.0, 0.0]) == pytest.approx(0.28)
    assert lagrange_value(M, 1.0, 2.0, [0.0, 1.0], [0.3, 0.7]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lagrange_value(M, 1.0, 2.0, [0.5, 0.5], [-0.1, 0.0])


def test_payoff_extremes():
    p = LagrangeParams(1.0, 4.0)
    assert payoff([1.0, 0.0], 0, p) == 2.0
    assert payoff([0.0, 1.0], 0, p) == -3.0
    assert payoff([0.0, 0.0, 0.0], 1, p) == 1.0  # null arm
    assert np.array_equal(payoff_vector([0.5, 0.25, 0.0], p), [0.5, 1.5])


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_game_matrix_definitional(seed, B, T):
    rng = np.random.default_rng(seed)
    M = rng.random((3, 3))
    p = LagrangeParams(B, T)
    G = game_matrix(M, p)
    lo, hi = p.payoff_range
    assert G.min() >= lo - 1e-12 and G.max() <= hi + 1e-12
    for a in range(3):
        for i in range(2):
            assert G[a, i] == pytest.approx(lagrange_value(M, B, T, np.eye(3)[a], np.eye(2)[i]), abs=1e-12)


def test_minimax_small_games():
    v, x, y = minimax([[1.0, -1.0], [-1.0, 1.0]])
    assert v == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(x, 0.5) and np.allclose(y, 0.5)
    v, x, y = minimax([[0.3]])
    assert v == pytest.approx(0.3) and x[0] == 1.0 and y[0] == 1.0
    with pytest.raises(ValueError):
        minimax(np.zeros((0, 2)))


@given(st.integers(0, 2**32 - 1), st.floats(-3.0, 3.0))
def test_minimax_affine_shift(seed, c):
    G = np.random.default_rng(seed).normal(size=(3, 4))
    v, x, _ = minimax(G)
    v2, x2, _ = minimax(G + c)
    assert v2 == pytest.approx(v + c, abs=1e-8)
    # best-response columns to the optimal row strategy are the same set
    br = lambda G, x: set(np.flatnonzero(x @ G <= (x @ G).min() + 1e-9))
    assert br(G, x) == br(G + c, x)
    assert nash_gap(x, G, v) <= 1e-8


@given(st.integers(0, 2**32 - 1))
def test_game_value_equals_lp_with_dummy(seed):
    rng = np.random.default_rng(seed)
    T, B = 100, float(rng.uniform(5, 95))
    m = rng.random((T, 4, 3))
    m[:, -1] = 0.0
    inst = insert_dummy_resource(BwkInstance(4, 2, T, B, matrices=m, null_arm=3))
    M = inst.matrices.mean(axis=0)
    v, _, _ = minimax(game_matrix(M, LagrangeParams(B, T)))
    assert v == pytest.approx(benchmark_lp(M, B, T).value, abs=1e-8)


def test_nash_gap_dominated_row():
    G = np.array([[1.0, 1.0], [0.0, 0.0]])
    assert nash_gap([0.0, 1.0], G, 1.0) == pytest.approx(1.0)
    assert nash_gap([1.0, 0.0], G, 1.0) == 0.0


def test_hedge_self_play_matching_pennies():
    G = np.array([[1.0, -1.0], [-1.0, 1.0]])
    tau = 10000
    row = Hedge(LearnerSpec(2, tau, -1.0, 1.0))
    col = Hedge(LearnerSpec(2, tau, -1.0, 1.0))
    avg = np.zeros(2)
    for _ in range(tau):
        x, y = row.propose(), col.propose()
        avg += x
        row.feed_full(G @ y)
        col.feed_full(-(x @ G))
    assert nash_gap(avg / tau, G, 0.0) <= 0.1


def test_nash_gap_bound_formula():
    b = nash_gap_bound(-1.0, 1.0, 10.0, 20.0, 100, 0.1, 50)
    assert b == pytest.approx(2 * (30 + 4 * np.sqrt(200 * np.log(1000))) / 50)
