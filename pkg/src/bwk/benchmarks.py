"""Benchmark values, brute-force oracles and lower-bound closed forms."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import BwkInstance, RngSeed, exceeds_budget, stream_key
from .lp import stopped_lp

EULER_GAMMA = 0.5772156649015329


@dataclass
class BenchmarkValues:
    opt_stopped_lp: float
    opt_fd_lower: float
    opt_fd_mc: Optional[float] = None
    opt_fd_mc_stderr: Optional[float] = None
    opt_dp: Optional[float] = None
    opt_fa: Optional[float] = None


def _need_fixed(instance: BwkInstance):
    if instance.mode != "adversarial":
        raise ValueError("needs a fixed (adversarial) outcome sequence")


def _total_before_stop(rewards, cons, B):
    # rewards (..., T), cons (..., T, d): reward of rounds before the first overdraft
    cum = np.cumsum(cons, axis=-2)
    ok = ~exceeds_budget(cum, B).any(axis=-1)
    alive = np.logical_and.accumulate(ok, axis=-1)
    return (rewards * alive).sum(axis=-1)


def opt_fd_lower(instance: BwkInstance, C: float = 1.0) -> float:
    """Heuristic lower reference for OPT_FD: stopped-LP * (1 - C sqrt(ln(dT) / B))."""
    _need_fixed(instance)
    v = stopped_lp(instance.matrices, instance.B, instance.null_arm).value
    return v * (1.0 - C * math.sqrt(math.log(instance.d * instance.T) / instance.B))


def simplex_grid(K: int, resolution: int) -> np.ndarray:
    """All distributions over K arms with coordinates in multiples of 1/(resolution - 1)."""
    n = resolution - 1
    pts = []
    for bars in itertools.combinations(range(n + K - 1), K - 1):
        prev, counts = -1, []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(n + K - 1 - prev - 1)
        pts.append(counts)
    return np.array(pts, dtype=float) / n


class FdEstimate(NamedTuple):
    estimate: float
    stderr: float
    argmax: np.ndarray


def opt_fd_mc(instance: BwkInstance, resolution: Optional[int] = None, replicates: int = 200,
              seed: int = 0, max_points: int = 100_000) -> FdEstimate:
    """Best fixed distribution by grid search with Monte-Carlo evaluation.

    Every grid distribution is evaluated on the same uniforms (and, for
    stochastic instances, the same outcome draws), then the best mean is kept.

    Raises:
        ValueError: if the grid has more than `max_points` points.
    """
    inst = instance
    K, T = inst.K, inst.T
    if resolution is None:
        resolution = 21 if K <= 3 else 11 if K <= 5 else 5
    size = math.comb(resolution - 1 + K - 1, K - 1)
    if size > max_points:
        raise ValueError(f"grid with resolution {resolution} over {K} arms has {size} points (limit {max_points})")
    grid = simplex_grid(K, resolution)
    U = RngSeed(seed, "opt-fd").generator(0).random((replicates, T))
    if inst.mode == "adversarial":
        M = np.broadcast_to(inst.matrices, (replicates,) + inst.matrices.shape)
    else:
        M = np.stack([inst.outcomes(1, T, stream_key(seed, "opt-fd-environment", r)) for r in range(replicates)])
    ri, ti = np.arange(replicates)[:, None], np.arange(T)[None, :]
    best = (-np.inf, 0.0, grid[0])
    for p in grid:
        cdf = np.cumsum(p)
        arms = np.minimum(np.searchsorted(cdf, U, side="right"), K - 1)
        rows = M[ri, ti, arms]
        tot = _total_before_stop(rows[..., 0], rows[..., 1:], inst.B)
        mean = float(tot.mean())
        if mean > best[0] + 1e-12:
            se = float(tot.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
            best = (mean, se, p)
    return FdEstimate(*best)


def opt_dp_analytic(family, index: int) -> Optional[float]:
    """Best dynamic policy value where it is known in closed form (dp family: B)."""
    if family.kind == "dp":
        if not 0 <= index < len(family.members):
            raise IndexError(index)
        return float(family.B)
    return None


def opt_fa(instance: BwkInstance) -> tuple[float, int]:
    """Best fixed arm: total reward of always playing it, with the stopping rule."""
    _need_fixed(instance)
    m = instance.matrices
    totals = _total_before_stop(np.moveaxis(m[:, :, 0], 0, 1), np.moveaxis(m[:, :, 1:], 0, 1), instance.B)
    arm = int(np.argmax(totals))  # first maximum
    return float(totals[arm]), arm


def lb_recurrence_alphas(kind: str, n: int, B: float, K: Optional[int] = None) -> np.ndarray:
    """Expected play counts that equalize the members' competitive ratios.

    kind "log": alpha_j = alpha_1 / (2 j) for j >= 2, summing to B.
    kind "fa": alpha_k = (1 - r_{k-1} / r_k) alpha_1 with r_j = K**-(K - j),
    for k = 2..n, summing to B.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    j = np.arange(1, n + 1)
    if kind == "log":
        shape = np.where(j == 1, 1.0, 1.0 / (2.0 * j))
    elif kind == "fa":
        if K is None:
            raise ValueError("the fa recurrence needs K")
        r = fa_rewards(K, n)
        shape = np.ones(n)
        shape[1:] = 1.0 - r[:-1] / r[1:]
    else:
        raise ValueError(f"unknown recurrence {kind!r}")
    return B * shape / shape.sum()


def fa_rewards(K: int, n: Optional[int] = None) -> np.ndarray:
    n = K - 1 if n is None else n
    return float(K) ** -(K - np.arange(1, n + 1, dtype=float))


def log_family_ratios(alphas, B: float) -> np.ndarray:
    """OPT/E[REW] on each log-family member when phase sigma gets alpha_sigma plays.

    Member tau has stopped-LP value (B/T) B (tau + 1) / 2 and the plays earn
    (B/T) sum_{sigma <= tau} sigma alpha_sigma.
    """
    a = np.asarray(alphas, dtype=float)
    tau = np.arange(1, len(a) + 1)
    return B * (tau + 1) / (2.0 * np.cumsum(tau * a))


def fa_family_ratios(alphas, B: float, K: int) -> np.ndarray:
    """OPT_FA/E[REW] on fa-family members k = 1..n: r_k B / sum_{j <= k} r_j alpha_j."""
    a = np.asarray(alphas, dtype=float)
    r = fa_rewards(K, len(a))
    return r * B / np.cumsum(r * a)


def harmonic(n: int) -> float:
    return float(np.sum(1.0 / np.arange(1, n + 1)))


def lb_competitive_value(T: int, B: float) -> float:
    """Main term of the log-family lower bound: ln(floor(T/B)) / 2 + Euler's constant."""
    if not 0 < B <= T:
        raise ValueError("need 0 < B <= T")
    return 0.5 * math.log(math.floor(T / B)) + EULER_GAMMA


def lb_error_term(T: int, B: float) -> float:
    """Scale of the lower bound's correction term, ln(T)^1.5 / sqrt(B)."""
    return math.log(T) ** 1.5 / math.sqrt(B)


class Metrics(NamedTuple):
    regret_vs_stopped_lp: float
    competitive_ratio: float
    normalized_reward: float


def competitive_ratio(benchmark: float, reward: float) -> float:
    if reward > 0:
        return benchmark / reward
    return 1.0 if benchmark <= 0 else math.inf


def metrics(total_reward: float, bench: BenchmarkValues, T: Optional[int] = None) -> Metrics:
    """Regret and competitive ratio against the stopped-LP value.

    `normalized_reward` is REW / T when T is given, otherwise REW / benchmark.
    """
    b = bench.opt_stopped_lp
    norm = total_reward / T if T else (total_reward / b if b > 0 else 0.0)
    return Metrics(b - total_reward, competitive_ratio(b, total_reward), norm)


def compute_benchmarks(instance: BwkInstance, family=None, index: Optional[int] = None,
                       mc: bool = False, mc_replicates: int = 200, seed: int = 0) -> BenchmarkValues:
    """All benchmarks that apply to a fixed instance (Monte-Carlo OPT_FD on request)."""
    if instance.mode == "adversarial":
        sl = stopped_lp(instance.matrices, instance.B, instance.null_arm).value
        fa = opt_fa(instance)[0]
    else:
        from .lp import benchmark_lp

        sl = instance.T * benchmark_lp(instance.expected_matrix(), instance.B, instance.T,
                                       instance.null_arm).value
        fa = None
    lower = sl * (1.0 - math.sqrt(math.log(instance.d * instance.T) / instance.B))
    bv = BenchmarkValues(sl, lower, opt_fa=fa)
    if family is not None and index is not None:
        bv.opt_dp = opt_dp_analytic(family, index)
    if mc:
        est = opt_fd_mc(instance, replicates=mc_replicates, seed=seed)
        bv.opt_fd_mc, bv.opt_fd_mc_stderr = est.estimate, est.stderr
    return bv
