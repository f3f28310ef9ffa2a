"""Verification suites: each check measures one quantitative property and
compares it with a threshold.

`verify(name)` runs a registered suite and returns a list of Check records.
Every check is deterministic given its seed.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ..algorithms import (IpsState, deviation_term, guess_update, ips_deviation_bound, ips_update, run_highprob_many,
                          run_lagrange_bwk_many, run_simple_adversarial_many)
from ..benchmarks import (EULER_GAMMA, fa_family_ratios, fa_rewards, harmonic, lb_recurrence_alphas,
                          log_family_ratios, opt_fa, opt_fd_mc)
from ..core import BwkInstance, insert_dummy_resource
from ..instances import (construct_dp_family, construct_fa_family, construct_log_family, construct_simple,
                         gen_stochastic)
from ..lagrange import LagrangeParams, game_matrix, minimax
from ..learners import Exp3P, Hedge, LearnerSpec, draw, regret_bound
from ..lp import LpInfeasible, benchmark_lp, rescale_budget_value, stopped_lp


@dataclass
class Check:
    criterion: int
    name: str
    measured: str
    threshold: str
    passed: bool
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"[{verdict}] criterion {self.criterion:2d} {self.name}: measured {self.measured}; "
                f"threshold {self.threshold} ({self.seconds:.1f} s)")

    def to_dict(self) -> dict:
        return asdict(self)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        chk = fn(*args, **kwargs)
        chk.seconds = time.perf_counter() - t0
        return chk

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _mean_rew(results) -> float:
    return float(np.mean([r.total_reward for r in results]))


# ---------------------------------------------------------------------------
# 1-5: benchmark values and closed forms
# ---------------------------------------------------------------------------

@_timed
def check_lp_game(seed: int = 0, n: int = 100) -> Check:
    """Minimax value of the Lagrange game equals the benchmark LP value."""
    rng = np.random.default_rng(seed)
    T = 100
    worst, done, start = 0.0, 0, time.perf_counter()
    while done < n:
        K = int(rng.integers(2, 7))
        d = int(rng.integers(1, 4))
        B = float(rng.uniform(5, 95))
        # K - 1 random arms plus the null arm (zero except for the dummy resource)
        M = np.concatenate([rng.random((K - 1, d + 1)), np.zeros((1, d + 1))])
        M = np.concatenate([M, np.full((K, 1), B / T)], axis=1)
        try:
            lp = benchmark_lp(M, B, T).value
        except LpInfeasible:
            continue
        v, _, _ = minimax(game_matrix(M, LagrangeParams(B, T)))
        worst = max(worst, abs(v - lp))
        done += 1
    elapsed = time.perf_counter() - start
    return Check(1, "lp-game equivalence", f"max |minimax - LP| = {worst:.3g} in {elapsed:.2f} s",
                 "<= 1e-08 and < 10 s", worst <= 1e-8 and elapsed < 10, details={"max_error": worst})


@_timed
def check_stopped_log(Ts=(256, 512, 1024, 2048), Bs=(16, 32, 64)) -> Check:
    """Stopped-LP value and argmax time on every log-family member."""
    worst, bad_argmax, count = 0.0, 0, 0
    start = time.perf_counter()
    for T in Ts:
        for B in Bs:
            fam = construct_log_family(T, B)
            eps = B / T
            for tau, inst in enumerate(fam, start=1):
                res = stopped_lp(inst.matrices, B, inst.null_arm)
                worst = max(worst, abs(res.value - eps * B * (tau + 1) / 2))
                bad_argmax += res.argmax_time != B * tau
                count += 1
    elapsed = time.perf_counter() - start
    return Check(2, "log-family stopped LP", f"{count} members, max error {worst:.3g}, "
                 f"{bad_argmax} argmax mismatches, {elapsed:.1f} s", "error <= 1e-09, 0 mismatches, < 30 s",
                 worst <= 1e-9 and bad_argmax == 0 and elapsed < 30,
                 details={"max_error": worst, "argmax_mismatches": bad_argmax})


@_timed
def check_simple_values(Ts=(100, 1000)) -> Check:
    """Stopped-LP values T/4 and 3T/8 of the two-instance example."""
    errs = []
    for T in Ts:
        fam = construct_simple(T)
        v1 = stopped_lp(fam[0].matrices, fam.B, fam[0].null_arm).value
        v2 = stopped_lp(fam[1].matrices, fam.B, fam[1].null_arm).value
        errs += [abs(v1 - T / 4), abs(v2 - 3 * T / 8)]
    worst = max(errs)
    return Check(3, "simple example values", f"max error {worst:.3g}", "<= 1e-09", worst <= 1e-9)


def log_minmax_oracle(n: int, B: float = 1.0) -> float:
    """min over play counts (sum <= B) of the worst log-family ratio, by LP.

    max t s.t. sum_{sigma <= tau} sigma alpha_sigma >= (tau + 1) t for all
    tau, sum alpha <= B, alpha >= 0; the min-max ratio is B / (2 t).
    """
    from scipy.optimize import linprog

    # variables (alpha_1..alpha_n, t); minimize -t
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A, b = [], []
    for tau in range(1, n + 1):
        row = np.zeros(n + 1)
        row[:tau] = -np.arange(1, tau + 1)
        row[-1] = tau + 1
        A.append(row)
        b.append(0.0)
    A.append(np.concatenate([np.ones(n), [0.0]]))
    b.append(B)
    res = linprog(c, A_ub=np.array(A), b_ub=b, bounds=[(0, None)] * (n + 1), method="highs")
    return B / (2 * res.x[-1])


def fa_grid_minmax(K: int = 3, B: float = 1.0, points: int = 200_001) -> float:
    """Grid search over (alpha_1, B - alpha_1) of the worst fa-family ratio (K = 3)."""
    if K != 3:
        raise ValueError("grid oracle is two-dimensional: K = 3 only")
    a1 = np.linspace(0, B, points)[1:]
    alphas = np.stack([a1, B - a1], axis=1)
    r = fa_rewards(K)
    ratios = r * B / np.cumsum(r * alphas, axis=1)
    return float(ratios.max(axis=1).min())


@_timed
def check_recurrences(B: float = 64.0) -> Check:
    """Lower-bound recurrences: equal ratios, numerical min-max agreement, fa target."""
    log_err, log_oracle_err = 0.0, 0.0
    for n in range(1, 11):
        a = lb_recurrence_alphas("log", n, B)
        shape_err = max(abs(a[j - 1] - a[0] / (2 * j)) for j in range(2, n + 1)) if n > 1 else 0.0
        ratios = log_family_ratios(a, B)
        log_err = max(log_err, shape_err, float(np.ptp(ratios)), abs(a.sum() - B))
        if n <= 6:
            log_oracle_err = max(log_oracle_err, abs(log_minmax_oracle(n, B) - ratios[0]))
    fa_vals, fa_err, fa_target_err = {}, 0.0, 0.0
    for K in (3, 4, 5):
        a = lb_recurrence_alphas("fa", K - 1, B, K)
        ratios = fa_family_ratios(a, B, K)
        fa_err = max(fa_err, float(np.ptp(ratios)))
        fa_vals[K] = float(ratios[0])
        fa_target_err = max(fa_target_err, abs(ratios[0] - (K - 1 / K)))
    grid = fa_grid_minmax(3, B)
    grid_err = abs(grid - (3 - 1 / 3))
    log_ok = bool(log_err <= 1e-9 and log_oracle_err <= 1e-4)
    fa_ok = bool(fa_err <= 1e-9 and fa_target_err <= 1e-9 and grid_err <= 1e-3)
    measured = (f"log: recurrence error {log_err:.2g}, LP oracle gap {log_oracle_err:.2g}; "
                f"fa: minimized ratio {', '.join(f'K={k}: {v:.6f}' for k, v in fa_vals.items())} "
                f"(grid K=3: {grid:.6f}), gap to K - 1/K {fa_target_err:.4f}")
    return Check(4, "recurrence oracles", measured,
                 "log <= 1e-09 / 1e-04; fa ratio = K - 1/K within 1e-09, grid within 1e-03", log_ok and fa_ok,
                 details={"log_ok": log_ok, "fa_ok": fa_ok, "fa_ratios": fa_vals, "fa_grid_K3": grid})


@_timed
def check_rescaling(seed: int = 0, n: int = 500) -> Check:
    """OPT_LP at budget psi * B is at least psi times OPT_LP at B."""
    rng = np.random.default_rng(seed)
    T = 100
    worst = -np.inf
    for _ in range(n):
        K = int(rng.integers(2, 6))
        d = int(rng.integers(1, 4))
        M = np.concatenate([rng.random((K, d + 1)), np.zeros((1, d + 1))])  # last arm null
        B = float(rng.uniform(1, T))
        psi = float(rng.uniform(0.01, 1.0))
        v_psi, v = rescale_budget_value(M, B, T, psi)
        worst = max(worst, psi * v - v_psi)
    return Check(5, "budget rescaling", f"max (psi*v(B) - v(psi*B)) = {worst:.3g} over {n} pairs",
                 "<= 1e-09", worst <= 1e-9)


def random_small_instance(rng: np.random.Generator, T: int = 200, d: int = 2) -> BwkInstance:
    """Two arms with a level shift halfway plus a null arm (last)."""
    m = np.zeros((T, 3, d + 1))
    for a in range(2):
        for h in range(2):
            rows = slice(h * T // 2, (h + 1) * T // 2)
            level = rng.uniform(0.1, 1.0, d + 1)
            m[rows, a] = level * rng.random((T // 2, d + 1))
    B = float(rng.uniform(10, 60))
    return BwkInstance(3, d, T, B, matrices=m, null_arm=2)


@_timed
def check_opt_fd(seed: int = 0, n: int = 20, replicates: int = 200) -> Check:
    """Monte-Carlo best fixed distribution stays under the stopped LP."""
    rng = np.random.default_rng(seed)
    worst_z, worst_gap = -np.inf, -np.inf
    for i in range(n):
        inst = random_small_instance(rng)
        sl = stopped_lp(inst.matrices, inst.B, inst.null_arm).value
        est = opt_fd_mc(inst, replicates=replicates, seed=seed + i)
        # differences below 1e-9 are rounding (deterministic runs have a zero stderr)
        gap = est.estimate - sl
        z = gap / est.stderr if gap > 1e-9 and est.stderr > 1e-9 else (math.inf if gap > 1e-9 else -math.inf)
        worst_z, worst_gap = max(worst_z, z), max(worst_gap, gap)
    z_txt = f"{worst_z:.2f}" if np.isfinite(worst_z) else ("inf" if worst_z > 0 else "none above rounding")
    return Check(6, "stopped LP bounds OPT_FD", f"max (OPT_FD estimate - stopped LP) = {worst_gap:.3f}, "
                 f"max in standard errors {z_txt}", "<= 2 stderr", worst_z <= 2.0,
                 details={"max_gap": worst_gap, "max_z": worst_z})


# ---------------------------------------------------------------------------
# 7-8: stochastic regret and bandit recovery
# ---------------------------------------------------------------------------

def stochastic_instance(T: int) -> BwkInstance:
    arms = [[{"dist": "bernoulli", "p": 0.8}, {"dist": "bernoulli", "p": 0.8}],
            [{"dist": "bernoulli", "p": 0.4}, {"dist": "bernoulli", "p": 0.2}],
            [{"dist": "bernoulli", "p": 0.1}, {"dist": "bernoulli", "p": 0.05}]]
    return insert_dummy_resource(gen_stochastic(arms, T, T / 2, name=f"bernoulli-T{T}"))


@_timed
def check_stochastic_regret(seed: int = 0, Ts=(2000, 8000, 32000), seeds: int = 50) -> Check:
    """Regret / sqrt(T K log T) roughly constant and regret / T decreasing."""
    norm, per_round = [], []
    for T in Ts:
        inst = stochastic_instance(T)
        opt = T * benchmark_lp(inst.expected_matrix(), inst.B, T).value
        rew = _mean_rew(run_lagrange_bwk_many(inst, LagrangeParams(inst.B, T), seed=seed, replicates=seeds))
        reg = opt - rew
        norm.append(reg / math.sqrt(T * inst.K * math.log(T)))
        per_round.append(reg / T)
    factor = max(norm) / min(norm) if min(norm) > 0 else math.inf
    decreasing = all(b < a for a, b in zip(per_round, per_round[1:]))
    return Check(7, "stochastic regret scaling",
                 f"normalized regret {', '.join(f'{x:.3f}' for x in norm)} (factor {factor:.2f}); "
                 f"regret/T {', '.join(f'{x:.4f}' for x in per_round)}",
                 "factor < 2.5 and regret/T strictly decreasing", factor < 2.5 and decreasing,
                 details={"normalized": norm, "regret_per_round": per_round})


def zero_consumption_instance(T: int, seed: int = 0) -> BwkInstance:
    rng = np.random.default_rng(seed)
    m = np.zeros((T, 3, 2))
    m[:, :, 0] = (rng.random((T, 3)) < np.array([0.7, 0.5, 0.3])).astype(float)
    return BwkInstance(3, 1, T, float(T), matrices=m, name=f"zero-consumption-T{T}")


@_timed
def check_bandit_recovery(seed: int = 0, Ts=(10_000, 40_000), seeds: int = 30) -> Check:
    """With no consumption, LagrangeBwK behaves like EXP3.P against the best arm."""
    regs, bounds = [], []
    for T in Ts:
        inst = zero_consumption_instance(T, seed)
        best = inst.matrices[:, :, 0].sum(axis=0).max()
        rew = _mean_rew(run_lagrange_bwk_many(inst, LagrangeParams(inst.B, T), seed=seed, replicates=seeds))
        regs.append(best - rew)
        bounds.append(10 * math.sqrt(inst.K * T * math.log(T)))
    within = all(r <= b for r, b in zip(regs, bounds))
    decreasing = all(regs[i + 1] / Ts[i + 1] < regs[i] / Ts[i] for i in range(len(Ts) - 1))
    return Check(8, "bandit recovery", f"regret {', '.join(f'{r:.1f}' for r in regs)} vs bounds "
                 f"{', '.join(f'{b:.0f}' for b in bounds)}; regret/T "
                 f"{', '.join(f'{r / T:.4f}' for r, T in zip(regs, Ts))}",
                 "regret <= 10 sqrt(KT log T) and regret/T decreasing", within and decreasing)


# ---------------------------------------------------------------------------
# 9-11: lower-bound families
# ---------------------------------------------------------------------------

def _family_ratios(family, runner, benchmark, seed, seeds):
    ratios, rews = [], []
    for j, inst in enumerate(family):
        res = runner(inst, seed, seeds)
        rew = [r.total_reward for r in res]
        rews.append(rew)
        m = float(np.mean(rew))
        ratios.append(benchmark(j, inst) / m if m > 0 else math.inf)
    return np.array(ratios), rews


def _alg2(inst, seed, seeds):
    return run_simple_adversarial_many(inst, seed=seed, replicates=seeds)


def _alg1(inst, seed, seeds):
    return run_lagrange_bwk_many(inst, LagrangeParams(inst.B, inst.T), seed=seed, replicates=seeds)


@_timed
def check_lb_main(seed: int = 0, T: int = 4096, B: int = 64, seeds: int = 200) -> Check:
    """Algorithm 2's worst-member ratio on the log family sits between the floor and the upper bound."""
    fam = construct_log_family(T, B)
    sl = [stopped_lp(inst.matrices, B, inst.null_arm).value for inst in fam]
    upper = 3 * 2 * math.log(T)
    floor = 0.5 * math.log(T / B) + EULER_GAMMA - 0.5
    worst = {}
    for name, runner in (("algorithm 2", _alg2), ("algorithm 1 (B0=B, T0=T)", _alg1)):
        ratios, _ = _family_ratios(fam, runner, lambda j, inst: sl[j], seed, seeds)
        worst[name] = float(ratios.max())
    passed = worst["algorithm 2"] <= upper and all(w >= floor for w in worst.values())
    return Check(9, "log-family competitive ratio",
                 "worst-member ratio " + ", ".join(f"{k}: {v:.2f}" for k, v in worst.items()),
                 f"algorithm 2 <= {upper:.2f}; every configuration >= {floor:.3f}", passed, details=worst)


@_timed
def check_dp_gap(seed: int = 0, T: int = 400, B: int = 10, seeds: int = 100) -> Check:
    """Mean reward on a uniformly random dp-family member is at most B^3/T plus slack."""
    fam = construct_dp_family(T, B)
    target = B ** 3 / T
    out, ok = {}, True
    for name, runner in (("algorithm 2", _alg2), ("algorithm 1 (B0=B, T0=T)", _alg1)):
        rews = np.concatenate([[r.total_reward for r in runner(inst, seed, seeds)] for inst in fam])
        mean = float(rews.mean())
        se = float(rews.std(ddof=1) / math.sqrt(len(rews)))
        out[name] = (mean, se)
        ok &= mean <= target + 2 * se
    return Check(10, "dp-family gap", ", ".join(f"{k}: mean REW {m:.3f} (se {s:.3f})" for k, (m, s) in out.items()),
                 f"<= {target:g} + 2 se", ok, details={k: list(v) for k, v in out.items()})


@_timed
def check_fa_gap(seed: int = 0, T: int = 300, K: int = 3, B: float = 30.0, seeds: int = 200) -> Check:
    """Best-fixed-arm values on the fa family and the simulated worst-member ratio."""
    fam = construct_fa_family(T, B, K)
    fa = [opt_fa(inst)[0] for inst in fam]
    exact = [B * float(K) ** -(K - j) for j in range(1, len(fam) + 1)]
    err = max(abs(a - b) for a, b in zip(fa, exact))
    target = (K - 1 / K) * 0.75
    worst = {}
    for name, runner in (("algorithm 2", _alg2), ("algorithm 1 (B0=B, T0=T)", _alg1)):
        ratios, _ = _family_ratios(fam, runner, lambda j, inst: fa[j], seed, seeds)
        worst[name] = float(ratios.max())
    passed = err <= 1e-9 and all(w >= target for w in worst.values())
    return Check(11, "fa-family gap", f"OPT_FA error {err:.2g}; worst-member ratio "
                 + ", ".join(f"{k}: {v:.3f}" for k, v in worst.items()),
                 f"error <= 1e-09; ratio >= {target:.3f}", passed, details=worst)


# ---------------------------------------------------------------------------
# 12-13: importance weighting and the phased algorithm
# ---------------------------------------------------------------------------

def ips_instance(T: int = 2000, B: float = 200.0, seed: int = 0) -> BwkInstance:
    """One real arm with drifting reward and consumption, plus a null arm."""
    rng = np.random.default_rng(seed)
    m = np.zeros((T, 2, 2))
    drift = np.linspace(0.2, 0.9, T)
    m[:, 0, 0] = np.clip(drift + 0.1 * rng.standard_normal(T), 0, 1)
    m[:, 0, 1] = rng.random(T) * 0.6
    return BwkInstance(2, 1, T, B, matrices=m, null_arm=1, name="ips-check")


@_timed
def check_ips(seed: int = 0, seeds: int = 100, gamma: float = 0.5, delta: float = 0.05, C0: float = 3.0) -> Check:
    """IPS objective stays within DEV of the true objective; guess increments are bounded."""
    inst = ips_instance(seed=seed)
    K, T, B = inst.K, inst.T, inst.B
    obj = stopped_lp(inst.matrices, B, inst.null_arm).values
    tau = np.arange(1, T + 1)
    dev = np.array([deviation_term(int(t), gamma, B, delta, float(o), K, T, C0) for t, o in zip(tau, obj)])
    full = np.array([ips_deviation_bound(int(t), gamma, B, delta, float(o), K, T) for t, o in zip(tau, obj)])
    p = np.full(K, 1.0 / K)
    covered, covered_full, first_miss, max_jump = 0, 0, [], 0.0
    for s in range(seeds):
        arms = draw(np.broadcast_to(p, (T, K)), np.random.default_rng([seed, s]).random(T))
        st = IpsState(K, inst.d, gamma)
        prev = 0.0
        for t in range(1, T + 1):
            ips_update(st, t, p, int(arms[t - 1]), inst.matrices[t - 1, arms[t - 1]])
            g = guess_update(st, t, B)
            max_jump = max(max_jump, g - prev)
            prev = g
        err = np.abs(np.array(st.objs) - obj)
        miss = np.flatnonzero(err > dev)
        covered += len(miss) == 0
        if len(miss):
            first_miss.append(int(miss[-1]) + 1)
        covered_full += bool(np.all(err <= full))
    bound = K / gamma
    passed = covered >= 95 and max_jump <= bound + 1e-9
    late = max(first_miss) if first_miss else 0
    return Check(12, "IPS deviation", f"{covered}/{seeds} seeds within DEV (misses only at tau <= {late}); "
                 f"{covered_full}/{seeds} within the unabbreviated bound; max guess increment {max_jump:.3f}",
                 f">= 95 seeds; increment <= K/gamma = {bound:g}", passed,
                 details={"covered": covered, "covered_unabbreviated": covered_full, "last_miss_round": late,
                          "max_jump": max_jump})


def highprob_instances(T: int = 4096, B: float = 600.0, seed: int = 0) -> list[BwkInstance]:
    rng = np.random.default_rng(seed)
    insts = []
    m = np.zeros((T, 3, 2))
    m[:, :2, 0] = rng.random((T, 2))
    m[:, :2, 1] = rng.random((T, 2)) * 0.6
    insts.append(BwkInstance(3, 1, T, B, matrices=m, null_arm=2, name="uniform"))
    m = np.zeros((T, 3, 3))
    late = (np.arange(T) >= T // 2)[:, None]
    m[:, 0, 0] = np.where(late[:, 0], 0.9, 0.1)
    m[:, 1, 0] = 0.4
    m[:, :2, 1:] = rng.random((T, 2, 2)) * np.array([0.3, 0.5])
    insts.append(BwkInstance(3, 2, T, B, matrices=m, null_arm=2, name="late-reward"))
    return insts


@_timed
def check_highprob(seed: int = 0, seeds: int = 200, delta: float = 0.05) -> Check:
    """Phase count, total consumption and depleted-mode exploration of the phased algorithm."""
    import warnings

    max_phases, max_cons_excess, explore_ok, total = 0, -np.inf, 0, 0
    bound = None
    for inst in highprob_instances():
        T, B = inst.T, inst.B
        gamma0 = T ** -0.25
        bound = gamma0 * T + 3 * math.sqrt(gamma0 * T * math.log(1 / delta))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = run_highprob_many(inst, delta=delta, seed=seed, replicates=seeds)
        for r in res:
            max_phases = max(max_phases, len(r.info["phases"]))
            max_cons_excess = max(max_cons_excess, float(np.max(r.cumulative_consumption - B)))
            explore_ok += r.info["exploration_rounds"] <= bound
            total += 1
    limit = math.ceil(math.log2(4096))
    frac = explore_ok / total
    passed = max_phases <= limit and max_cons_excess <= 0 and frac >= 0.95
    return Check(13, "phased algorithm structure",
                 f"max phases {max_phases}; max consumption - B = {max_cons_excess:.1f}; "
                 f"exploration within bound in {frac:.1%} of runs",
                 f"phases <= {limit}; consumption <= B; >= 95% within {bound:.1f}", passed)


# ---------------------------------------------------------------------------
# 14: learners
# ---------------------------------------------------------------------------

def adversarial_payoffs(T: int, seed: int = 0) -> np.ndarray:
    """Fixed payoff sequence in [0, 1] for three actions whose leader changes."""
    rng = np.random.default_rng(seed)
    g = np.empty((T, 3))
    g[:, 0] = 0.5
    g[:, 1] = np.where(np.arange(T) < T // 2, 0.9, 0.1)
    g[:, 2] = (rng.random(T) < 0.55).astype(float)
    return g


def _run_learner(kind, g, seeds, delta, seed):
    """Realized regret after every round and the proposals, per replicate."""
    T, K = g.shape
    if kind == "exp3p":
        learner = Exp3P(LearnerSpec(K, T, delta=delta, feedback="bandit"), n_parallel=seeds)
    else:
        learner = Hedge(LearnerSpec(K, T, delta=delta), n_parallel=seeds)
    u = np.stack([np.random.default_rng([seed, s]).random(T) for s in range(seeds)])
    got = np.zeros((T, seeds))
    props = np.zeros((T, seeds, K))
    for t in range(T):
        P = learner.propose()
        props[t] = P
        a = draw(P, u[:, t])
        got[t] = g[t, a]
        if kind == "exp3p":
            learner.feed_bandit(a, g[t, a])
        else:
            learner.feed_full(np.broadcast_to(g[t], (seeds, K)))
    regret = np.cumsum(g, axis=0).max(axis=1)[:, None] - np.cumsum(got, axis=0)
    return regret, props, learner


@_timed
def check_learners(seed: int = 0, seeds: int = 100, T: int = 10_000, delta: float = 0.05) -> Check:
    """Uniform init, symmetry, floor, zeroing-out and empirical regret of both learners."""
    fails = []
    for cls, fb in ((Hedge, "full"), (Exp3P, "bandit")):
        p = cls(LearnerSpec(4, 10, feedback=fb)).propose()
        if not np.allclose(p, 0.25, atol=1e-15):
            fails.append(f"{cls.__name__} init")
    # symmetry: equal payoffs leave Hedge unchanged; EXP3.P is permutation equivariant
    h = Hedge(LearnerSpec(3, 50))
    p0 = h.propose()
    h.feed_full([0.3, 0.3, 0.3])
    if not np.allclose(h.propose(), p0, atol=1e-15):
        fails.append("hedge symmetry")
    rng = np.random.default_rng(seed)
    perm = np.array([2, 0, 1])
    e1, e2 = (Exp3P(LearnerSpec(3, 200, feedback="bandit")) for _ in range(2))
    for _ in range(199):
        p1, p2 = e1.propose(), e2.propose()
        if not np.allclose(p2[perm], p1, atol=1e-12):
            fails.append("exp3p symmetry")
            break
        a = int(rng.integers(3))
        x = float(rng.random())
        e1.feed_bandit(a, x)
        e2.feed_bandit(int(perm[a]), x)
    # empirical high-probability regret, and the EXP3.P floor along the way
    g = adversarial_payoffs(T, seed)
    reg_b, props_b, exp3 = _run_learner("exp3p", g, seeds, delta, seed)
    min_p = float(props_b.min())
    if min_p < exp3.gamma / 3 - 1e-15:
        fails.append("exp3p floor")
    reg_h, props_h, _ = _run_learner("hedge", g, seeds, delta, seed)
    reg_b, reg_h = reg_b[-1], reg_h[-1]
    slack = math.ceil(seeds * delta) + math.floor(3 * math.sqrt(seeds * delta * (1 - delta)))
    over_b = int((reg_b > regret_bound(LearnerSpec(3, T, delta=delta, feedback="bandit"), "exp3p", 10)).sum())
    over_h = int((reg_h > regret_bound(LearnerSpec(3, T, delta=delta), "hedge", 10)).sum())
    if over_b > slack or over_h > slack:
        fails.append("regret")
    # zeroing-out: range-minimum payoffs after tau leave the trajectory through tau
    # and the realized regret at tau unchanged
    tau = T // 4
    gz = g.copy()
    gz[tau:] = 0.0
    for kind, props in (("exp3p", props_b), ("hedge", props_h)):
        reg_z, props_z, _ = _run_learner(kind, gz, seeds, delta, seed)
        same_path = np.array_equal(props_z[:tau + 1], props[:tau + 1])
        if not (same_path and np.allclose(reg_z[-1], reg_z[tau - 1], rtol=0, atol=1e-9)):
            fails.append(f"{kind} zeroing-out")
    gam = exp3.gamma
    measured = (f"exp3p worst regret {reg_b.max():.0f}, {over_b} over bound; hedge worst {reg_h.max():.0f}, "
                f"{over_h} over; min exp3p probability {min_p:.4f} (floor {gam / 3:.4f})"
                + (f"; failed: {', '.join(fails)}" if fails else ""))
    return Check(14, "learner sanity", measured, f"all checks; at most {slack} replicates over 10x bound",
                 not fails)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

CRITERIA: dict[int, Callable[..., Check]] = {
    1: check_lp_game, 2: check_stopped_log, 3: check_simple_values, 4: check_recurrences,
    5: check_rescaling, 6: check_opt_fd, 7: check_stochastic_regret, 8: check_bandit_recovery,
    9: check_lb_main, 10: check_dp_gap, 11: check_fa_gap, 12: check_ips, 13: check_highprob,
    14: check_learners,
}

SUITES: dict[str, tuple[int, ...]] = {
    "lp-game": (1,), "stopped-lp": (2,), "simple-lb": (3,), "recurrences": (4,), "rescaling": (5,),
    "opt-fd": (6,), "stochastic-regret": (7,), "adv-recovery": (8,), "lb-main": (2, 4, 9), "dp-gap": (10,),
    "fa-gap": (11,), "ips": (12,), "highprob": (13,), "learners": (14,),
    "all": tuple(range(1, 15)),
}


def verify(suite: str, on_check: Callable[[Check], None] = None) -> list[Check]:
    """Run a named suite; `on_check` sees each Check as it finishes.

    Raises:
        KeyError: for an unknown suite, listing the registered names.
    """
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; available: {', '.join(SUITES)}")
    out = []
    for c in SUITES[suite]:
        chk = CRITERIA[c]()
        if on_check is not None:
            on_check(chk)
        out.append(chk)
    return out
