import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bwk.core import (BwkInstance, RngSeed, RunResult, as_prob_vector, average_outcome, check_run,
                      exceeds_budget, insert_dummy_resource, insert_null_arm, instance_from_dict,
                      instance_to_dict, load_instance, materialize, save_instance, stream_key,
                      validate_instance)
from bwk.instances import construct_log_family, gen_stochastic
from bwk.lp import benchmark_lp, stopped_lp
from conftest import random_adversarial


def one_arm(T=4, K=1, d=1, B=2.0, fill=0.5):
    return BwkInstance(K, d, T, B, matrices=np.full((T, K, d + 1), fill))


# validate_instance

def test_validate_names_out_of_range_entry():
    m = np.full((4, 2, 2), 0.5)
    m[2, 1, 0] = 1.5
    report = validate_instance(BwkInstance(2, 1, 4, 2.0, matrices=m))
    assert len(report) == 1
    v = report[0]
    assert (v.round, v.arm, v.field) == (3, 1, "reward")


def test_validate_log_member_clean():
    fam = construct_log_family(100, 10)
    assert all(validate_instance(inst) == [] for inst in fam)


def test_validate_null_arm_contract():
    m = np.zeros((5, 2, 2))
    m[:, 0] = 0.3
    m[1, 1, 1] = 1.0
    report = validate_instance(BwkInstance(2, 1, 5, 2.0, matrices=m, null_arm=1))
    assert [v.field for v in report] == ["null arm"]
    assert report[0].round == 2


def test_validate_budget_range_and_dummy():
    assert validate_instance(one_arm(B=0.5))[0].field == "B"
    inst = insert_dummy_resource(one_arm())
    assert validate_instance(inst) == []
    m = np.array(inst.matrices)
    m[0, 0, 2] = 0.1
    bad = BwkInstance(1, 2, 4, 2.0, matrices=m, dummy_resource=1)
    assert [v.field for v in validate_instance(bad)] == ["dummy resource"]


def test_validate_stochastic_samples():
    inst = gen_stochastic([[{"dist": "uniform", "low": 0, "high": 1}, 0.2]], 100, 10)
    assert validate_instance(inst, n_samples=50) == []


# average_outcome

def test_average_identical():
    m = np.broadcast_to(np.array([[0.2, 0.4]]), (6, 1, 2))
    assert np.array_equal(average_outcome(m, 2, 5), m[0])


def test_average_midpoint():
    m = np.zeros((2, 1, 2))
    m[1, 0, 0] = 1.0
    assert average_outcome(m, 1, 2)[0, 0] == 0.5


def test_average_log_member():
    # phases of 10 rounds with rewards 0.1, 0.2, 0.3 in I_3 (T=100, B=10)
    inst = construct_log_family(100, 10)[2]
    assert average_outcome(inst.matrices, 1, 30)[1, 0] == pytest.approx(0.2, abs=1e-12)


@pytest.mark.parametrize("rng_", [(0, 3), (3, 2), (1, 11)])
def test_average_bad_range(rng_):
    with pytest.raises(ValueError):
        average_outcome(np.zeros((10, 1, 2)), *rng_)


@given(st.integers(1, 29), st.integers(0, 2**32 - 1))
def test_average_linearity(b, seed):
    m = np.random.default_rng(seed).random((30, 2, 3))
    a, c = 1, 30
    left, right = average_outcome(m, a, b), average_outcome(m, b + 1, c) if b < c else 0
    whole = average_outcome(m, a, c)
    mix = (left * (b - a + 1) + right * (c - b)) / (c - a + 1)
    assert np.allclose(whole, mix, rtol=0, atol=1e-12)


# augmentation

def test_dummy_resource_rate():
    inst = insert_dummy_resource(BwkInstance(2, 1, 100, 50.0, matrices=np.zeros((100, 2, 2))))
    assert inst.d == 2 and inst.dummy_resource == 1
    assert np.all(inst.matrices[:, :, 2] == 0.5)
    with pytest.raises(ValueError):
        insert_dummy_resource(inst)


def test_dummy_resource_never_raises_stopped_lp(rng):
    inst = random_adversarial(rng, T=40, K=3, d=2, B=15.0, null=True)
    before = stopped_lp(inst.matrices, inst.B).value
    aug = insert_dummy_resource(inst)
    assert stopped_lp(aug.matrices, aug.B).value <= before + 1e-9


def test_null_arm_inserted():
    inst = insert_null_arm(one_arm(K=1))
    assert inst.K == 2 and inst.null_arm == 1
    assert np.all(inst.matrices[:, 1] == 0)
    with pytest.raises(ValueError):
        insert_null_arm(inst)


def test_null_arm_keeps_dummy_rate():
    inst = insert_null_arm(insert_dummy_resource(one_arm(K=2)))
    assert np.all(inst.matrices[:, 2, 2] == 0.5)
    assert validate_instance(inst) == []


def test_null_arm_leaves_slack_optimum_unchanged():
    # the best arm consumes 0.1 < B/T = 0.5, so the optimum is interior
    M = np.array([[0.9, 0.1], [0.3, 0.8]])
    inst = BwkInstance(2, 1, 10, 5.0, matrices=np.broadcast_to(M, (10, 2, 2)).copy())
    before = benchmark_lp(M, 5.0, 10).value
    aug = insert_null_arm(inst)
    assert benchmark_lp(aug.matrices[0], 5.0, 10).value == pytest.approx(before, abs=1e-12)


def test_stochastic_augmentation():
    inst = insert_null_arm(insert_dummy_resource(gen_stochastic([[0.5, 0.5]], 20, 10)))
    m = inst.outcomes(1, 20, 3)
    assert m.shape == (20, 2, 3)
    assert np.all(m[:, :, 2] == 0.5) and np.all(m[:, 1, :2] == 0)


# randomness

def test_rng_seed_determinism():
    a = RngSeed(7, "x").generator(3).random(5)
    b = RngSeed(7, "x").generator(3).random(5)
    c = RngSeed(7, "y").generator(3).random(5)
    d = RngSeed(7, "x").generator(4).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)
    assert stream_key(1, "a", 0) == stream_key(1, "a", 0) != stream_key(1, "a", 1)


@given(st.integers(1, 600), st.integers(0, 300), st.integers(0, 2**40))
def test_sampler_pure_in_round_and_stream(start, length, stream):
    inst = gen_stochastic([[{"dist": "uniform", "low": 0, "high": 1}, {"dist": "bernoulli", "p": 0.3}]], 1000, 10)
    stop = min(start + length, 1000)
    whole = inst.outcomes(1, stop, stream)
    assert np.array_equal(inst.outcomes(start, stop, stream), whole[start - 1:])


def test_materialize_matches_outcomes():
    inst = gen_stochastic([[{"dist": "beta", "a": 2, "b": 3}, 0.1]], 300, 10)
    fixed = materialize(inst, 9)
    assert fixed.mode == "adversarial"
    assert np.array_equal(fixed.matrices, inst.outcomes(1, 300, 9))


# serialization

def test_adversarial_roundtrip_bit_exact(tmp_path, rng):
    inst = random_adversarial(rng, T=20)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert np.array_equal(back.matrices, inst.matrices)
    assert (back.K, back.d, back.T, back.B, back.null_arm) == (inst.K, inst.d, inst.T, inst.B, inst.null_arm)
    assert json.loads(path.read_text())["mode"] == "adversarial"


def test_stochastic_roundtrip():
    inst = insert_dummy_resource(gen_stochastic([[{"dist": "bernoulli", "p": 0.4}, 0.3]], 50, 10))
    back = instance_from_dict(json.loads(json.dumps(instance_to_dict(inst))))
    assert np.array_equal(back.outcomes(1, 50, 5), inst.outcomes(1, 50, 5))
    assert back.dummy_resource == 1


def test_instances_are_read_only(rng):
    inst = random_adversarial(rng)
    with pytest.raises(ValueError):
        inst.matrices[0, 0, 0] = 1.0


# runs

def _run(inst, arms):
    rows = inst.matrices[np.arange(len(arms)), arms]
    cum = np.cumsum(rows[:, 1:], axis=0)
    over = np.flatnonzero(exceeds_budget(cum, inst.B).any(axis=1))
    tau = int(over[0]) + 1 if len(over) else len(arms)
    rew = rows[:tau, 0].copy()
    if len(over):
        rew[-1] = 0.0
    return RunResult(np.asarray(arms[:tau]), rew, cum[tau - 1], tau, float(rew.sum()))


def test_check_run_accepts_correct_and_flags_wrong():
    inst = one_arm(T=10, B=2.0, fill=0.5)
    res = _run(inst, np.zeros(10, dtype=int))
    assert res.stop_time == 5 and check_run(res, inst) == []
    bad = RunResult(res.chosen_arms, res.rewards, res.cumulative_consumption, res.stop_time, 99.0)
    assert check_run(bad, inst)


def test_exceeds_budget_tolerance():
    assert not exceeds_budget(np.array([2.0 + 1e-12]), 2.0).any()
    assert exceeds_budget(np.array([2.001]), 2.0).all()


def test_prob_vector():
    assert np.array_equal(as_prob_vector([0.25, 0.75]), [0.25, 0.75])
    for bad in ([0.5, 0.6], [-0.1, 1.1], []):
        with pytest.raises(ValueError):
            as_prob_vector(bad)
