import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bwk.algorithms import (IpsState, deviation_term, guess_update, ips_deviation_bound, ips_objective,
                            ips_update, run_highprob, run_highprob_many, run_lagrange_bwk,
                            run_lagrange_bwk_many, run_simple_adversarial, run_simple_adversarial_many)
from bwk.core import BwkInstance, check_run, insert_dummy_resource
from bwk.instances import construct_log_family, gen_dynamic_pricing
from bwk.lagrange import LagrangeParams
from bwk.learners import Hedge, draw
from bwk.lp import stopped_lp
from conftest import random_adversarial


def null_like(T=50, K=3):
    return insert_dummy_resource(BwkInstance(K, 1, T, T / 2, matrices=np.zeros((T, K, 2)), null_arm=K - 1))


# Algorithm 1

def test_lagrange_null_like_instance():
    res = run_lagrange_bwk(null_like(), LagrangeParams(25.0, 50.0))
    assert res.total_reward == 0.0 and res.stop_time == 50


def test_lagrange_runs_are_valid_and_deterministic(rng):
    inst = insert_dummy_resource(random_adversarial(rng, T=80, B=20.0))
    p = LagrangeParams(inst.B, inst.T)
    a = run_lagrange_bwk(inst, p, seed=4)
    b = run_lagrange_bwk(inst, p, seed=4)
    assert check_run(a, inst) == []
    assert np.array_equal(a.chosen_arms, b.chosen_arms) and a.total_reward == b.total_reward
    assert not np.array_equal(a.chosen_arms, run_lagrange_bwk(inst, p, seed=5).chosen_arms)


def test_lagrange_batch_matches_single(rng):
    inst = insert_dummy_resource(random_adversarial(rng, T=60, B=15.0))
    p = LagrangeParams(inst.B, inst.T)
    batch = run_lagrange_bwk_many(inst, p, seed=2, replicates=[0, 1, 2])
    solo = run_lagrange_bwk_many(inst, p, seed=2, replicates=[2])[0]
    assert np.array_equal(batch[2].chosen_arms, solo.chosen_arms)
    assert batch[2].total_reward == solo.total_reward


def test_lagrange_dual_receives_lagrange_vector(rng):
    inst = insert_dummy_resource(random_adversarial(rng, T=40, d=2, B=12.0))
    seen = []

    class Recording(Hedge):
        def feed_full(self, payoffs, mask=None):
            seen.append(np.array(payoffs, dtype=float))
            super().feed_full(payoffs, mask)

    params = LagrangeParams(12.0, 40.0)
    res = run_lagrange_bwk(inst, params, dual=lambda spec, R: Recording(spec, R))
    for t, vec in enumerate(seen[:res.stop_time], start=1):
        row = inst.matrices[t - 1, res.chosen_arms[t - 1]]
        assert np.allclose(-vec[0], row[0] + 1.0 - params.ratio * row[1:])


def test_lagrange_bad_learner_kind():
    with pytest.raises(ValueError):
        run_lagrange_bwk(null_like(), LagrangeParams(1.0, 1.0), dual="exp3p")


def test_full_feedback_primal(rng):
    inst = insert_dummy_resource(random_adversarial(rng, T=40, B=20.0))
    res = run_lagrange_bwk(inst, LagrangeParams(20.0, 40.0), primal="hedge")
    assert check_run(res, inst) == []


# Algorithm 2

def test_simple_adversarial_degenerate_range(rng):
    inst = random_adversarial(rng, T=64, B=16.0)
    res, g = run_simple_adversarial(inst, g_min=8.0, g_max=8.0)
    assert g.guess == 8.0 and res.info["T0"] == pytest.approx(8.0 / (inst.d + 1))


@given(st.integers(0, 10_000))
@settings(max_examples=20)
def test_simple_adversarial_T0_range(seed):
    inst = construct_log_family(64, 8)[3]
    res, g = run_simple_adversarial(inst, seed=seed)
    lo, hi = math.sqrt(64) / 2, 64 / 2
    assert lo - 1e-9 <= res.info["T0"] <= hi + 1e-9
    assert 0 <= g.u <= g.u_max + 1e-12
    assert check_run(res, inst) == []


def test_simple_adversarial_preconditions(rng):
    inst = random_adversarial(rng, null=False)
    with pytest.raises(ValueError):
        run_simple_adversarial(inst)
    with pytest.raises(ValueError):
        run_simple_adversarial(random_adversarial(rng), kappa=1.0)
    with pytest.raises(ValueError):
        run_simple_adversarial(insert_dummy_resource(random_adversarial(rng)))
    with pytest.raises(ValueError):
        run_simple_adversarial(random_adversarial(rng), g_min=5.0, g_max=4.0)


def test_simple_adversarial_batch_matches_single():
    inst = construct_log_family(128, 16)[2]
    batch = run_simple_adversarial_many(inst, seed=3, replicates=4)
    solo = run_simple_adversarial_many(inst, seed=3, replicates=[3])[0]
    assert batch[3].total_reward == solo.total_reward
    assert batch[3].info["T0"] == solo.info["T0"]


# IPS machinery

def test_ips_update_examples():
    st_ = IpsState(2, 1, 0.5)
    ips_update(st_, 1, [1.0, 0.0], 0, [0.3, 0.2])
    assert np.array_equal(st_.cumulative[0], [0.3, 0.2]) and np.all(st_.cumulative[1] == 0)
    st_ = IpsState(4, 1, 0.5)
    ips_update(st_, 1, [0.25, 0.25, 0.25, 0.25], 2, [0.5, 0.1])
    assert st_.cumulative[2, 0] == pytest.approx(2.0)


def test_ips_update_errors():
    st_ = IpsState(2, 1, 0.5)
    with pytest.raises(ValueError):
        ips_update(st_, 1, [0.9, 0.1], 1, [0.5, 0.5])  # below gamma / K = 0.25
    with pytest.raises(ValueError):
        ips_update(st_, 2, [0.5, 0.5], 1, [0.5, 0.5])


def test_ips_unbiased():
    rng = np.random.default_rng(3)
    M = np.array([[0.6, 0.3], [0.2, 0.9], [0.0, 0.0]])
    p = np.array([0.5, 0.3, 0.2])
    n = 100_000
    arms = draw(np.broadcast_to(p, (n, 3)), rng.random(n))
    est = np.zeros((n, 3, 2))
    est[np.arange(n), arms] = M[arms] / p[arms, None]
    mean, se = est.mean(axis=0), est.std(axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(mean - M) <= 2 * se + 1e-12)


def test_guess_zero_rewards_and_monotone():
    st_ = IpsState(2, 1, 0.5)
    for t in range(1, 6):
        ips_update(st_, t, [0.5, 0.5], t % 2, [0.0, 0.4])
        assert guess_update(st_, t, 2.0) == 0.0
    rng = np.random.default_rng(0)
    st_, prev = IpsState(2, 1, 0.5), 0.0
    for t in range(1, 200):
        a = int(rng.integers(2))
        g = guess_update(ips_update(st_, t, [0.5, 0.5], a, [rng.random(), rng.random()]), t, 20.0)
        assert g >= prev and g - prev <= st_.clip + 1e-9
        prev = g
    assert ips_objective(st_, 20.0) == st_.objs[-1]


def test_guess_requires_current_state():
    with pytest.raises(ValueError):
        guess_update(IpsState(2, 1, 0.5), 1, 1.0)


def test_deviation_term_examples():
    assert deviation_term(100, 0.1, 100, 0.01, 0.0, 2, 10**4) == 0.0
    v = deviation_term(100, 0.1, 100, 0.01, 50.0, 2, 10**4)
    assert v == pytest.approx(3 * 10 * math.sqrt(100 * math.log(1e6)))
    assert v == pytest.approx(1115, rel=1e-3)
    assert deviation_term(400, 0.1, 100, 0.01, 50.0, 2, 10**4) == pytest.approx(2 * v)


def test_ips_deviation_bound_dominates_obj_linear_part():
    R = 4 * math.sqrt(2 * 10 * math.log(2000 / 0.05))
    b = ips_deviation_bound(10, 0.5, 200, 0.05, 3.0, 2, 2000)
    assert b == pytest.approx(2 * R / 200 * (3.0 + R))


# Algorithm 3

def _pricing(T=1024, B=300):
    return gen_dynamic_pricing([0.3, 0.6, 0.9], {"dist": "uniform", "low": 0, "high": 1}, B, T)


def test_highprob_zero_rewards_single_phase():
    inst = BwkInstance(3, 1, 256, 200.0, matrices=np.zeros((256, 3, 2)), null_arm=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res, phases = run_highprob(inst)
    assert res.total_reward == 0.0 and len(phases) == 1 and phases[0].tau_end == 256


def test_highprob_structure():
    inst = _pricing()
    with pytest.warns(RuntimeWarning):
        runs = run_highprob_many(inst, seed=1, replicates=6)
    n_phase = math.ceil(math.log2(inst.T))
    B0 = inst.B / (2 * n_phase)
    for res in runs:
        phases = res.info["phases"]
        assert len(phases) <= n_phase
        assert phases[0].tau_start == 1
        for a, b in zip(phases, phases[1:]):
            assert b.tau_start == a.tau_end + 1 and b.g >= a.g
        live = sum(p.live_consumption for p in phases)
        assert np.all(live <= len(phases) * (B0 + 1) + 1e-9)
        assert np.all(res.cumulative_consumption <= inst.B + 1) and res.stop_time <= inst.T


def test_highprob_deterministic_and_preconditions(rng):
    inst = _pricing(T=256, B=100)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        a, _ = run_highprob(inst, seed=9)
        b, _ = run_highprob(inst, seed=9)
        assert np.array_equal(a.chosen_arms, b.chosen_arms)
        with pytest.raises(ValueError):
            run_highprob(inst, kappa=0.5)
        with pytest.raises(ValueError):
            run_highprob(random_adversarial(rng, null=False))


def test_algorithm2_on_log_family_bounded_by_stopped_lp():
    fam = construct_log_family(256, 32)
    for inst in fam:
        bound = stopped_lp(inst.matrices, inst.B, inst.null_arm).value
        runs = run_simple_adversarial_many(inst, seed=0, replicates=10)
        assert np.mean([r.total_reward for r in runs]) <= bound + 1e-9
