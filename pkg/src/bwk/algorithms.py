"""LagrangeBwK and its two adversarial wrappers.

* `run_lagrange_bwk`: a primal learner over arms plays against a dual learner
  over resources on the Lagrange payoffs r + 1 - (T0/B0) c_i.
* `run_simple_adversarial`: draws a guess g = g_min * kappa**u with u uniform
  and runs LagrangeBwK with B0 = B, T0 = g / (d + 1).
* `run_highprob`: phases of fresh LagrangeBwK copies with a reduced budget,
  restarted whenever an importance-weighted estimate of the stopped-LP value
  grows by a factor kappa.

Every runner has a `*_many` form that simulates several seeded replicates in
one vectorized loop. Replicate r of a given seed draws all its randomness from
streams labeled by (component, r), so its trajectory does not depend on how
many replicates run alongside it. `run_x(...)` equals `run_x_many(...)[0]`.

A run stops in the first round whose consumption takes some resource above
B. That round's arm and consumption are recorded, its reward is forfeited.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import BwkInstance, RngSeed, RunResult, exceeds_budget, stream_key
from .lagrange import LagrangeParams
from .learners import LearnerSpec, draw, learner_init
from .lp import FEAS_TOL, PIVOT_TOL, _OPTIMAL, _benchmark_kernel

LearnerKind = Union[str, Callable]

CHUNK = 512


# ---------------------------------------------------------------------------
# Plumbing
# ---------------------------------------------------------------------------

def _uniforms(seed: int, label: str, replicates: Sequence[int], n: int) -> np.ndarray:
    rs = RngSeed(seed, label)
    return np.stack([rs.generator(r).random(n) for r in replicates])


class _Outcomes:
    """Outcome matrices per round for a batch of replicates, fetched in chunks."""

    def __init__(self, instance: BwkInstance, seed: int, replicates: Sequence[int]):
        self.inst = instance
        self.R = len(replicates)
        self.streams = [stream_key(seed, "environment", r) for r in replicates]
        self._lo, self._hi, self._buf = 1, 0, None

    def at(self, t: int) -> np.ndarray:
        """Array broadcastable to (R, K, d + 1) for round t."""
        if self.inst.matrices is not None:
            return self.inst.matrices[t - 1][None]
        if t > self._hi:
            self._lo, self._hi = t, min(t + CHUNK - 1, self.inst.T)
            self._buf = np.stack([self.inst.outcomes(self._lo, self._hi, s) for s in self.streams])
        return self._buf[:, t - self._lo]


def _make_learner(kind: LearnerKind, spec: LearnerSpec, R: int, **kwargs):
    if callable(kind):
        return kind(spec, R, **kwargs)
    return learner_init(spec, kind, R, **kwargs)


class _LagrangeEngine:
    """R parallel LagrangeBwK copies with per-copy ratio T0/B0."""

    def __init__(self, K: int, d: int, T: int, ratio: np.ndarray, primal: LearnerKind, dual: LearnerKind,
                 delta: float, floor: float = 0.0):
        ratio = np.asarray(ratio, dtype=float)
        R = len(ratio)
        self.R, self.K, self.d = R, K, d
        self.ratio = ratio.copy()
        lo = float(1.0 - ratio.max())
        kw = {"floor": floor} if floor > 0 else {}
        fb = {"exp3p": "bandit", "hedge": "full"}.get(primal) if isinstance(primal, str) \
            else getattr(primal, "feedback", "bandit")
        self.primal = _make_learner(primal, LearnerSpec(K, T, lo, 2.0, delta, fb), R, **kw)
        self.full_primal = self.primal.feedback == "full"
        # the dual minimizes the Lagrange payoff, i.e. maximizes its negative
        self.dual = _make_learner(dual, LearnerSpec(d, T, -2.0, -lo, delta, "full"), R)
        self.set_ratio(np.arange(R), ratio)

    def set_ratio(self, rows, ratio):
        self.ratio[rows] = ratio
        self.primal.reset(rows, r_min=1.0 - self.ratio[rows], r_max=2.0)
        self.dual.reset(rows, r_min=-2.0, r_max=self.ratio[rows] - 1.0)

    def choose(self, u_arm, u_res):
        P = self.primal.propose()
        Q = self.dual.propose()
        return P, draw(P, u_arm), draw(Q, u_res)

    def observe(self, M, rows, arms, res, mask):
        # rows[r] = M[r, arms[r]]: outcome row of the chosen arm
        lag = rows[:, :1] + 1.0 - self.ratio[:, None] * rows[:, 1:]
        idx = np.arange(self.R)
        if self.full_primal:
            Mb = np.broadcast_to(M, (self.R,) + M.shape[1:])
            full = Mb[:, :, 0] + 1.0 - self.ratio[:, None] * Mb[idx, :, 1 + res]
            self.primal.feed_full(full, mask)
        else:
            self.primal.feed_bandit(arms, lag[idx, res], mask)
        self.dual.feed_full(-lag, mask)
        return lag


@dataclass
class _Trace:
    """Per-replicate trajectory buffers and the stopping rule."""

    R: int
    T: int
    d: int
    B: float
    record: bool = False
    K: int = 0

    def __post_init__(self):
        self.arms = np.zeros((self.R, self.T), dtype=np.int64)
        self.rewards = np.zeros((self.R, self.T))
        self.cum = np.zeros((self.R, self.d))
        self.alive = np.ones(self.R, dtype=bool)
        self.stop = np.full(self.R, self.T, dtype=np.int64)
        self.dists = np.zeros((self.R, self.T, self.K)) if self.record else None

    def step(self, t, arms, rows, P=None):
        """Apply round t; returns mask of copies that continue after it."""
        new = self.cum + rows[:, 1:]
        over = self.alive & exceeds_budget(new, self.B).any(axis=1)
        live = self.alive
        self.arms[live, t - 1] = arms[live]
        self.rewards[live & ~over, t - 1] = rows[live & ~over, 0]
        self.cum[live] = new[live]
        if self.record and P is not None:
            self.dists[live, t - 1] = P[live]
        self.stop[over] = t
        self.alive = live & ~over
        return self.alive

    def results(self) -> list[RunResult]:
        out = []
        for r in range(self.R):
            tau = int(self.stop[r])
            rew = self.rewards[r, :tau].copy()
            out.append(RunResult(self.arms[r, :tau].copy(), rew, self.cum[r].copy(), tau, float(rew.sum()),
                                 self.dists[r, :tau].copy() if self.record else None))
        return out


def _replicates(replicates) -> list[int]:
    if isinstance(replicates, (int, np.integer)):
        return list(range(int(replicates)))
    return [int(r) for r in replicates]


# ---------------------------------------------------------------------------
# Algorithm 1
# ---------------------------------------------------------------------------

def _simulate_lagrange(instance: BwkInstance, ratio: np.ndarray, primal, dual, delta, seed, reps,
                       record=False) -> list[RunResult]:
    inst = instance
    R, T = len(reps), inst.T
    eng = _LagrangeEngine(inst.K, inst.d, T, ratio, primal, dual, delta)
    u_arm = _uniforms(seed, "primal-draw", reps, T)
    u_res = _uniforms(seed, "dual-draw", reps, T)
    env = _Outcomes(inst, seed, reps)
    tr = _Trace(R, T, inst.d, inst.B, record, inst.K)
    idx = np.arange(R)
    for t in range(1, T + 1):
        P, arms, res = eng.choose(u_arm[:, t - 1], u_res[:, t - 1])
        M = env.at(t)
        rows = np.broadcast_to(M, (R,) + M.shape[1:])[idx, arms]
        alive = tr.step(t, arms, rows, P)
        if not alive.any():
            break
        eng.observe(M, rows, arms, res, alive)
    return tr.results()


def _check_kinds(primal, dual):
    if isinstance(primal, str) and primal not in ("exp3p", "hedge"):
        raise ValueError(f"unknown primal learner {primal!r}")
    if isinstance(dual, str) and dual != "hedge":
        raise ValueError("the dual learner needs full feedback (hedge)")


def run_lagrange_bwk_many(instance: BwkInstance, params: LagrangeParams, primal: LearnerKind = "exp3p",
                          dual: LearnerKind = "hedge", delta: float = 0.05, seed: int = 0,
                          replicates=1, record: bool = False) -> list[RunResult]:
    """Run LagrangeBwK for each replicate index; see `run_lagrange_bwk`."""
    _check_kinds(primal, dual)
    reps = _replicates(replicates)
    ratio = np.full(len(reps), params.ratio)
    out = _simulate_lagrange(instance, ratio, primal, dual, delta, seed, reps, record)
    for res in out:
        res.info.update(B0=params.B0, T0=params.T0)
    return out


def run_lagrange_bwk(instance: BwkInstance, params: LagrangeParams, primal: LearnerKind = "exp3p",
                     dual: LearnerKind = "hedge", delta: float = 0.05, seed: int = 0,
                     record: bool = False) -> RunResult:
    """LagrangeBwK: primal learner over arms vs. dual learner over resources.

    Each round the primal draws an arm, the dual draws a resource, and the
    chosen arm's outcome row is revealed. The primal is paid the Lagrange
    payoff of (arm, resource); the dual is charged the payoff vector over all
    resources.

    Args:
        instance: the problem.
        params: (B0, T0) scaling of the Lagrange payoffs.
        primal: "exp3p" (bandit feedback) or "hedge" (full feedback), or a
            factory `f(spec, n_parallel)` returning a learner.
        dual: "hedge" or a factory.
        delta: confidence parameter passed to the learners.
        seed: root seed.
        record: keep the primal's per-round distributions.
    """
    return run_lagrange_bwk_many(instance, params, primal, dual, delta, seed, [0], record)[0]


# ---------------------------------------------------------------------------
# Algorithm 2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GuessConfig:
    kappa: float
    g_min: float
    g_max: float
    u: float

    @property
    def guess(self) -> float:
        return min(max(self.g_min * self.kappa ** self.u, self.g_min), self.g_max)

    @property
    def u_max(self) -> float:
        return math.log(self.g_max / self.g_min, self.kappa) if self.g_max > self.g_min else 0.0


def _check_guess_args(instance, kappa, g_min, g_max):
    if kappa <= 1:
        raise ValueError("kappa must exceed 1")
    if g_min <= 0 or g_min > g_max:
        raise ValueError("need 0 < g_min <= g_max")
    if instance.null_arm is None:
        raise ValueError("needs a null arm")
    if instance.dummy_resource is not None:
        raise ValueError("expects an instance without a dummy resource")


def run_simple_adversarial_many(instance: BwkInstance, kappa: float = 2.0, g_min: Optional[float] = None,
                                g_max: Optional[float] = None, delta: float = 0.05, seed: int = 0,
                                replicates=1, primal: LearnerKind = "exp3p",
                                dual: LearnerKind = "hedge") -> list[RunResult]:
    """Guess-based wrapper for each replicate; the guess sits in `info['guess']`."""
    T = instance.T
    g_min = math.sqrt(T) if g_min is None else float(g_min)
    g_max = float(T) if g_max is None else float(g_max)
    _check_guess_args(instance, kappa, g_min, g_max)
    _check_kinds(primal, dual)
    reps = _replicates(replicates)
    u_max = math.log(g_max / g_min, kappa) if g_max > g_min else 0.0
    us = _uniforms(seed, "guess", reps, 1)[:, 0] * u_max
    configs = [GuessConfig(kappa, g_min, g_max, float(u)) for u in us]
    T0 = np.array([c.guess for c in configs]) / (instance.d + 1)
    ratio = T0 / instance.B
    out = _simulate_lagrange(instance, ratio, primal, dual, delta, seed, reps)
    for res, cfg, t0 in zip(out, configs, T0):
        res.info.update(guess=cfg, B0=instance.B, T0=float(t0))
    return out


def run_simple_adversarial(instance: BwkInstance, kappa: float = 2.0, g_min: Optional[float] = None,
                           g_max: Optional[float] = None, delta: float = 0.05, seed: int = 0,
                           primal: LearnerKind = "exp3p", dual: LearnerKind = "hedge"):
    """Guess the stopped-LP value, then run LagrangeBwK tuned to the guess.

    u is uniform on [0, log_kappa(g_max / g_min)] and g = g_min * kappa**u;
    LagrangeBwK runs with B0 = B and T0 = g / (d + 1). The guess range
    defaults to [sqrt(T), T].

    Returns:
        (RunResult, GuessConfig)
    """
    res = run_simple_adversarial_many(instance, kappa, g_min, g_max, delta, seed, [0], primal, dual)[0]
    return res, res.info["guess"]


# ---------------------------------------------------------------------------
# Importance-weighted estimates
# ---------------------------------------------------------------------------

@dataclass
class IpsState:
    """Running inverse-propensity estimates of the outcome matrices."""

    K: int
    d: int
    gamma: float
    cumulative: np.ndarray = None
    guess: float = 0.0
    objs: list = field(default_factory=list)
    t: int = 0

    def __post_init__(self):
        if self.cumulative is None:
            self.cumulative = np.zeros((self.K, self.d + 1))

    @property
    def clip(self) -> float:
        return self.K / self.gamma


def ips_update(state: IpsState, t: int, proposed, arm: int, row) -> IpsState:
    """Add the round-t estimate: row / p(arm) on the chosen arm, zero elsewhere."""
    if t != state.t + 1:
        raise ValueError(f"expected round {state.t + 1}, got {t}")
    p = float(proposed[arm])
    if p < state.gamma / state.K - 1e-12:
        raise ValueError(f"probability {p} of arm {arm} below the floor gamma/K = {state.gamma / state.K}")
    state.cumulative[arm] += np.minimum(np.asarray(row, dtype=float) / p, state.clip)
    state.t = t
    return state


def ips_objective(state: IpsState, B: float) -> float:
    """t * OPT_LP(mean IPS matrix through round t, B, t); 0 if infeasible."""
    t = state.t
    mean = state.cumulative / t
    status, _, v = _benchmark_kernel(np.ascontiguousarray(mean[:, 0]), np.ascontiguousarray(mean[:, 1:]),
                                     B / t, PIVOT_TOL, FEAS_TOL)
    return t * v if status == _OPTIMAL else 0.0


def guess_update(state: IpsState, t: int, B: float) -> float:
    """Prefix maximum of the IPS interval objective through round t."""
    if t != state.t:
        raise ValueError("update the IPS state through round t first")
    obj = ips_objective(state, B)
    state.objs.append(obj)
    state.guess = max(state.guess, obj)
    return state.guess


def deviation_term(tau: int, gamma: float, B: float, delta: float, obj: float, K: int, T: int,
                   C0: float = 3.0) -> float:
    """C0 * (K * obj / (gamma * B)) * sqrt(tau * ln(T / delta))."""
    return C0 * (K * obj / (gamma * B)) * math.sqrt(tau * math.log(T / delta))


def ips_deviation_bound(tau: int, gamma: float, B: float, delta: float, obj: float, K: int, T: int) -> float:
    """(2 R / B) * (obj + R) with R = (K / gamma) sqrt(2 tau ln(T / delta)).

    The unabbreviated deviation: `deviation_term` keeps only the obj-linear
    part, which is the smaller one while obj < R (early rounds).
    """
    R = (K / gamma) * math.sqrt(2.0 * tau * math.log(T / delta))
    return 2.0 * R / B * (obj + R)


# ---------------------------------------------------------------------------
# Algorithm 3
# ---------------------------------------------------------------------------

@dataclass
class PhaseRecord:
    phase: int
    tau_start: int
    tau_end: int
    g: float
    B0: float
    T0: float
    full: bool
    depleted_at: Optional[int]
    live_consumption: np.ndarray


def run_highprob_many(instance: BwkInstance, kappa: float = 2.0, gamma0: Optional[float] = None,
                      delta: float = 0.05, seed: int = 0, replicates=1, primal: LearnerKind = "exp3p",
                      dual: LearnerKind = "hedge") -> list[RunResult]:
    """Phased algorithm for each replicate; phase log in `info['phases']`."""
    inst = instance
    K, d, T, B = inst.K, inst.d, inst.T, float(inst.B)
    if kappa <= 1:
        raise ValueError("kappa must exceed 1")
    if inst.null_arm is None:
        raise ValueError("needs a null arm")
    if inst.dummy_resource is not None:
        raise ValueError("expects an instance without a dummy resource")
    if B <= 4 * T ** 0.75:
        warnings.warn(f"budget B={B} is at most 4 T^(3/4) = {4 * T ** 0.75:.1f}; guarantees do not apply",
                      RuntimeWarning, stacklevel=2)
    gamma0 = T ** -0.25 if gamma0 is None else float(gamma0)
    mix = max(gamma0, T ** -0.25)
    n_phase = max(1, math.ceil(math.log(T, kappa) - 1e-12))
    B0 = B / (2 * n_phase)
    T0_of = lambda g: g / (3 * d * n_phase)  # noqa: E731

    reps = _replicates(replicates)
    R = len(reps)
    idx = np.arange(R)
    g_phase = np.ones(R)
    _check_kinds(primal, dual)
    eng = _LagrangeEngine(K, d, T, T0_of(g_phase) / B0, primal, dual, delta, floor=mix)
    u_arm = _uniforms(seed, "primal-draw", reps, T)
    u_res = _uniforms(seed, "dual-draw", reps, T)
    u_coin = _uniforms(seed, "depleted-coin", reps, T)
    u_unif = _uniforms(seed, "depleted-arm", reps, T)
    env = _Outcomes(inst, seed, reps)
    tr = _Trace(R, T, d, B)
    # the IPS floor is the smaller of the two exploration rates in play
    ips = [IpsState(K, d, gamma0) for _ in range(R)]
    ghat = np.ones(R)
    phase_cons = np.zeros((R, d))
    live_cons = np.zeros((R, d))
    depleted = np.zeros(R, dtype=bool)
    depleted_at = [None] * R
    start = np.ones(R, dtype=np.int64)
    logs: list[list[PhaseRecord]] = [[] for _ in range(R)]
    explore = np.zeros(R, dtype=np.int64)
    null = inst.null_arm
    p_dep = np.full(K, gamma0 / K)
    p_dep[null] += 1.0 - gamma0

    def close(r, t, full):
        logs[r].append(PhaseRecord(len(logs[r]) + 1, int(start[r]), t, float(g_phase[r]), B0,
                                   float(T0_of(g_phase[r])), full, depleted_at[r], live_cons[r].copy()))

    for t in range(1, T + 1):
        P, arms_live, res = eng.choose(u_arm[:, t - 1], u_res[:, t - 1])
        coin = u_coin[:, t - 1] < gamma0
        arms_dep = np.where(coin, np.minimum((u_unif[:, t - 1] * K).astype(np.int64), K - 1), null)
        arms = np.where(depleted, arms_dep, arms_live)
        used = np.where(depleted[:, None], p_dep[None], P)
        M = env.at(t)
        rows = np.broadcast_to(M, (R,) + M.shape[1:])[idx, arms]
        was_alive = tr.alive.copy()
        alive = tr.step(t, arms, rows)
        explore += was_alive & depleted & coin
        live = alive & ~depleted
        live_cons[live] += rows[live, 1:]
        phase_cons[alive] += rows[alive, 1:]
        if live.any():
            eng.observe(M, rows, arms, res, live)
        newly = alive & ~depleted & exceeds_budget(phase_cons, B0).any(axis=1)
        for r in np.flatnonzero(newly):
            depleted_at[r] = t
        depleted |= newly
        if not alive.any():
            break
        for r in np.flatnonzero(alive):
            st = ips[r]
            ips_update(st, t, used[r], int(arms[r]), rows[r])
            ghat[r] = max(ghat[r], guess_update(st, t, B))
        restart = alive & (ghat > kappa * g_phase)
        if t < T and restart.any():
            for r in np.flatnonzero(restart):
                close(r, t, True)
            g_phase[restart] = ghat[restart]
            start[restart] = t + 1
            phase_cons[restart] = 0.0
            live_cons[restart] = 0.0
            depleted[restart] = False
            for r in np.flatnonzero(restart):
                depleted_at[r] = None
            eng.set_ratio(np.flatnonzero(restart), T0_of(g_phase[restart]) / B0)

    out = tr.results()
    for r, res in enumerate(out):
        close(r, int(tr.stop[r]), False)
        res.info.update(phases=logs[r], exploration_rounds=int(explore[r]), guess=float(ghat[r]),
                        ips_objs=np.array(ips[r].objs))
    return out


def run_highprob(instance: BwkInstance, kappa: float = 2.0, gamma0: Optional[float] = None,
                 delta: float = 0.05, seed: int = 0, primal: LearnerKind = "exp3p", dual: LearnerKind = "hedge"):
    """Phased LagrangeBwK with importance-weighted guess updates.

    The guess g starts at 1. Each phase runs a fresh LagrangeBwK with
    B0 = B / (2 n) and T0 = g / (3 d n), where n = ceil(log_kappa T) and g is
    the guess when the phase starts. The primal's distribution is mixed with
    uniform at rate max(gamma0, T^(-1/4)). After each round the IPS estimate
    and the guess (a running maximum of the IPS stopped-LP objective) are
    updated, and a new phase starts from the next round once the guess
    exceeds kappa times the phase's starting guess. When a phase's own
    consumption exceeds B0 on some resource, the phase plays the null arm
    with probability 1 - gamma0 and a uniform arm otherwise until it ends.

    Returns:
        (RunResult, list of PhaseRecord)
    """
    res = run_highprob_many(instance, kappa, gamma0, delta, seed, [0], primal, dual)[0]
    return res, res.info["phases"]
