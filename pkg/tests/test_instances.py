import math

import numpy as np
import pytest

from bwk.core import validate_instance
from bwk.instances import (construct_dp_family, construct_fa_family, construct_family, construct_log_family,
                           construct_simple, gen_dynamic_pricing, gen_stochastic, load_family,
                           reduce_to_single_resource, save_family)
from bwk.lp import benchmark_lp, stopped_lp
from conftest import random_adversarial


def test_family_sizes_and_validity():
    assert len(construct_simple(100)) == 2
    assert len(construct_log_family(120, 12)) == 10
    assert len(construct_dp_family(400, 10)) == 40
    assert len(construct_fa_family(300, 30, 4)) == 3  # j in [K - 1]; arm K is the null arm
    for fam in (construct_simple(20), construct_log_family(40, 8), construct_dp_family(40, 8),
                construct_fa_family(30, 5, 3)):
        for inst in fam:
            assert validate_instance(inst) == []


def test_family_preconditions():
    with pytest.raises(ValueError):
        construct_simple(7)
    with pytest.raises(ValueError):
        construct_log_family(100, 7)
    with pytest.raises(ValueError):
        construct_fa_family(100, 10, 3)
    with pytest.raises(ValueError):
        construct_fa_family(100, 10, 2)
    with pytest.raises(ValueError):
        construct_family("nope", 10)


@pytest.mark.parametrize("T", [100, 1000])
def test_simple_family(T):
    I1, I2 = construct_simple(T)
    assert np.array_equal(I1.matrices[: T // 2], I2.matrices[: T // 2])
    assert stopped_lp(I1.matrices, I1.B).value == pytest.approx(T / 4, abs=1e-9)
    assert stopped_lp(I2.matrices, I2.B).value == pytest.approx(3 * T / 8, abs=1e-9)


def test_log_family_prefixes_and_closed_form():
    T, B = 256, 16
    fam = construct_log_family(T, B)
    for tau, (a, b) in enumerate(zip(fam, fam.members[1:]), start=1):
        assert np.array_equal(a.matrices[: B * tau], b.matrices[: B * tau])
    for tau, inst in enumerate(fam, start=1):
        res = stopped_lp(inst.matrices, B)
        assert res.value == pytest.approx(B / T * B * (tau + 1) / 2, abs=1e-9)
        assert res.argmax_time == B * tau


def test_dp_family_differs_in_two_phases():
    T, B = 60, 10
    fam = construct_dp_family(T, B)
    phase = np.arange(T) // B + 1
    diff = np.any(fam[1].matrices != fam[4].matrices, axis=(1, 2))
    assert set(phase[diff]) == {2, 5}


def test_fa_family_values_and_prefixes():
    T, B, K = 300, 30, 3
    fam = construct_fa_family(T, B, K)
    L = T // K
    for j, inst in enumerate(fam, start=1):
        r = inst.matrices[:, :, 0]
        assert r[r > 0].min() > 0 and r.max() <= 1.0
        assert r[(j - 1) * L, j - 1] == K ** -(K - j)
    for j in range(2, len(fam) + 1):
        assert np.array_equal(fam[j - 2].matrices[: (j - 1) * L], fam[j - 1].matrices[: (j - 1) * L])


def test_stochastic_point_masses_constant():
    inst = gen_stochastic([[0.4, 0.2], [0.0, 0.0]], 30, 5)
    m = inst.outcomes(1, 30, 0)
    assert np.all(m == m[0]) and np.array_equal(m[0], [[0.4, 0.2], [0.0, 0.0]])


def test_bernoulli_chernoff():
    mu, T = 0.3, 100_000
    inst = gen_stochastic([[{"dist": "bernoulli", "p": mu}, 0.0]], T, 1)
    mean = inst.outcomes(1, T, 4)[:, 0, 0].mean()
    assert abs(mean - mu) <= 3 * math.sqrt(mu * (1 - mu) / T)


def test_single_binding_constraint_closed_form():
    inst = gen_stochastic([[{"dist": "bernoulli", "p": 0.8}, {"dist": "bernoulli", "p": 0.5}], [0.0, 0.0]], 100, 20)
    r, c = 0.8, 0.5
    assert benchmark_lp(inst.expected_matrix(), 20, 100).value == pytest.approx(r * min(1, 0.2 / c))


def test_stochastic_rejects_bad_distributions():
    for bad in ([[{"dist": "uniform", "low": 0.5, "high": 1.5}, 0.0]], [[{"dist": "gauss"}, 0.0]], [[0.5]]):
        with pytest.raises(ValueError):
            gen_stochastic(bad, 10, 1)


def test_pricing_examples():
    inst = gen_dynamic_pricing([0.5, 1.0], {"dist": "fixed", "value": 1.0}, 10, 100)
    assert inst.expected_matrix()[1, 0] == 1.0 and inst.null_arm == 2
    uni = gen_dynamic_pricing([0.3], {"dist": "uniform", "low": 0, "high": 1}, 10, 100)
    assert np.allclose(uni.expected_matrix()[0], [0.3 * 0.7, 0.7])
    grid = gen_dynamic_pricing(np.arange(1, 10) / 10, {"dist": "uniform", "low": 0, "high": 1}, 25, 100)
    sol = benchmark_lp(grid.expected_matrix(), 25, 100)
    assert sol.distribution @ grid.expected_matrix()[:, 1] == pytest.approx(0.25, abs=1e-9)
    with pytest.raises(ValueError):
        gen_dynamic_pricing([1.5], {"dist": "fixed", "value": 1.0}, 1, 1)


def test_pricing_draws_match_means():
    inst = gen_dynamic_pricing([0.2, 0.7], {"dist": "beta", "a": 2, "b": 2}, 50, 20_000)
    m = inst.outcomes(1, 20_000, 1).mean(axis=0)
    assert np.allclose(m, inst.expected_matrix(), atol=0.02)


def test_reduce_to_single_resource(rng):
    inst = random_adversarial(rng, T=30, d=2, B=8.0)
    red = reduce_to_single_resource(inst)
    assert red.d == 1
    assert np.array_equal(red.matrices[:, :, 1], inst.matrices[:, :, 1:].max(axis=2))
    assert np.array_equal(red.matrices[:, :, 0], inst.matrices[:, :, 0])
    assert stopped_lp(red.matrices, 8.0).value <= stopped_lp(inst.matrices, 8.0).value + 1e-9
    one = construct_log_family(20, 4)[0]
    assert reduce_to_single_resource(one) is one


def test_save_load_family(tmp_path):
    fam = construct_fa_family(30, 5, 3)
    back = load_family(save_family(fam, tmp_path / "fa"))
    assert (back.kind, back.T, back.B, back.K, len(back)) == ("fa", 30, 5, 3, 2)
    for a, b in zip(fam, back):
        assert np.array_equal(a.matrices, b.matrices) and a.null_arm == b.null_arm
