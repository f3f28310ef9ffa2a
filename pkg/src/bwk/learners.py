"""Adversarial online learners: Hedge (full feedback) and EXP3.P (bandit).

Learners maximize payoffs in a declared range [r_min, r_max] and map them
affinely to [0, 1] internally. Weights live in log space and are shifted so
the largest weight is 1 after every update.

Every learner can run several independent copies side by side
(`n_parallel=R`): arrays then carry a leading axis of length R and updates
take an optional boolean mask selecting which copies move. With
`n_parallel=None` the same methods take and return one-dimensional arrays.

EXP3.P constants follow Auer, Cesa-Bianchi, Freund and Schapire (2002):

    gamma = min(3/5, 2 sqrt(3/5 * K ln K / T))   uniform exploration
    alpha = 2 sqrt(ln(K T / delta))
    eta   = gamma / (3K)                          learning rate
    beta  = alpha / sqrt(K T)                     confidence bonus (times 1/p)

and each round adds eta * (x_hat(a) + beta / p(a)) to the log-weight of every
action a, where x_hat is the importance-weighted normalized payoff.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

RANGE_TOL = 1e-12


@dataclass(frozen=True)
class LearnerSpec:
    action_count: int
    horizon: int
    r_min: float = 0.0
    r_max: float = 1.0
    delta: float = 0.05
    feedback: str = "full"  # "full" or "bandit"

    def __post_init__(self):
        if self.action_count < 1 or self.horizon < 1:
            raise ValueError("need at least one action and one round")
        if not self.r_min < self.r_max:
            raise ValueError("need r_min < r_max")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.feedback not in ("full", "bandit"):
            raise ValueError(f"unknown feedback type {self.feedback!r}")


class ProtocolError(RuntimeError):
    pass


def explore_mix(dist, gamma: float) -> np.ndarray:
    """(1 - gamma) * dist + gamma * uniform along the last axis."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    dist = np.asarray(dist, dtype=float)
    return (1.0 - gamma) * dist + gamma / dist.shape[-1]


def _softmax(log_w):
    w = np.exp(log_w - log_w.max(axis=1, keepdims=True))
    return w / w.sum(axis=1, keepdims=True)


class _Learner:
    feedback = "full"

    def __init__(self, spec: LearnerSpec, n_parallel: Optional[int] = None):
        self.spec = spec
        self.batched = n_parallel is not None
        R = 1 if n_parallel is None else int(n_parallel)
        self.n_actions = spec.action_count
        self.horizon = spec.horizon
        self.log_w = np.zeros((R, self.n_actions))
        self.t = np.zeros(R, dtype=np.int64)
        self.r_min = np.full(R, float(spec.r_min))
        self.r_max = np.full(R, float(spec.r_max))
        self.last: Optional[np.ndarray] = None

    @property
    def n_parallel(self) -> int:
        return len(self.t)

    @property
    def weights(self) -> np.ndarray:
        w = np.exp(self.log_w)
        return w if self.batched else w[0]

    def reset(self, rows=None, r_min=None, r_max=None):
        """Restart the selected copies from uniform weights, optionally with a new range."""
        rows = slice(None) if rows is None else rows
        self.log_w[rows] = 0.0
        self.t[rows] = 0
        if r_min is not None:
            self.r_min[rows] = r_min
        if r_max is not None:
            self.r_max[rows] = r_max
        if np.any(self.r_max[rows] <= self.r_min[rows]):
            raise ValueError("need r_min < r_max")

    def _mask(self, mask):
        if mask is None:
            return np.ones(self.n_parallel, dtype=bool)
        return np.asarray(mask, dtype=bool).reshape(self.n_parallel)

    def _normalize(self, g, mask, rmin, rmax):
        lo, hi = rmin - RANGE_TOL, rmax + RANGE_TOL
        bad = mask.reshape(mask.shape + (1,) * (g.ndim - 1)) & ((g < lo) | (g > hi) | ~np.isfinite(g))
        if bad.any():
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise ValueError(f"payoff {g[idx]!r} at entry {idx if self.batched else idx[1:]} "
                             f"outside the declared range")
        return np.clip((g - rmin) / (rmax - rmin), 0.0, 1.0)

    def _check_horizon(self):
        if (self.t >= self.horizon).any():
            raise ProtocolError("learner horizon exhausted")

    def _out(self, p):
        self.last = p
        return p if self.batched else p[0]

    def _renormalize(self, mask):
        self.log_w[mask] -= self.log_w[mask].max(axis=1, keepdims=True)


class Hedge(_Learner):
    """Multiplicative weights with fixed-horizon rate eta = sqrt(8 ln A / T)."""

    feedback = "full"

    def __init__(self, spec: LearnerSpec, n_parallel: Optional[int] = None, eta: Optional[float] = None,
                 floor: float = 0.0):
        super().__init__(spec, n_parallel)
        A, T = self.n_actions, self.horizon
        self.eta = math.sqrt(8.0 * math.log(A) / T) if eta is None else float(eta)
        self.floor = float(floor)

    def propose(self) -> np.ndarray:
        self._check_horizon()
        p = _softmax(self.log_w)
        if self.floor > 0:
            p = explore_mix(p, self.floor)
        return self._out(p)

    def feed_full(self, payoffs, mask=None):
        """Update on the full payoff vector (shape (A,) or (R, A))."""
        g = np.asarray(payoffs, dtype=float).reshape(self.n_parallel, self.n_actions)
        mask = self._mask(mask)
        x = self._normalize(g, mask, self.r_min[:, None], self.r_max[:, None])
        self.log_w[mask] += self.eta * x[mask]
        self._renormalize(mask)
        self.t[mask] += 1


class Exp3P(_Learner):
    """EXP3.P with the exploration, bonus and learning-rate choices above.

    Args:
        spec: learner specification with bandit feedback.
        n_parallel: number of independent copies, or None for a single one.
        floor: extra uniform mixing applied after the EXP3.P distribution,
            so every probability is at least max(gamma, floor) / K.
        gamma, eta, beta: overrides for the tuned constants.
    """

    feedback = "bandit"

    def __init__(self, spec: LearnerSpec, n_parallel: Optional[int] = None, floor: float = 0.0,
                 gamma: Optional[float] = None, eta: Optional[float] = None, beta: Optional[float] = None):
        super().__init__(spec, n_parallel)
        K, T, delta = self.n_actions, self.horizon, spec.delta
        g = min(0.6, 2.0 * math.sqrt(0.6 * K * math.log(K) / T)) if K > 1 else 0.0
        self.gamma = g if gamma is None else float(gamma)
        self.eta = self.gamma / (3.0 * K) if eta is None else float(eta)
        alpha = 2.0 * math.sqrt(math.log(K * T / delta))
        self.beta = alpha / math.sqrt(K * T) if beta is None else float(beta)
        self.floor = float(floor)

    def propose(self) -> np.ndarray:
        self._check_horizon()
        p = explore_mix(_softmax(self.log_w), self.gamma)
        if self.floor > 0:
            p = explore_mix(p, self.floor)
        return self._out(p)

    def feed_bandit(self, chosen, payoff, mask=None):
        """Update on the payoff of the chosen action under the last proposal."""
        if self.last is None:
            raise ProtocolError("feed_bandit called before propose")
        R = self.n_parallel
        chosen = np.asarray(chosen, dtype=np.int64).reshape(R)
        g = np.asarray(payoff, dtype=float).reshape(R)
        mask = self._mask(mask)
        x = self._normalize(g, mask, self.r_min, self.r_max)
        p = self.last
        rows = np.arange(R)
        est = np.zeros_like(p)
        est[rows, chosen] = x / p[rows, chosen]
        step = self.eta * (est + self.beta / p)
        self.log_w[mask] += step[mask]
        self._renormalize(mask)
        self.t[mask] += 1


KINDS = {"hedge": Hedge, "exp3p": Exp3P}


def learner_init(spec: LearnerSpec, kind: str, n_parallel: Optional[int] = None, **kwargs):
    """Build a learner of the given kind ("hedge" or "exp3p")."""
    if kind not in KINDS:
        raise ValueError(f"unknown learner kind {kind!r}")
    cls = KINDS[kind]
    if spec.feedback != cls.feedback:
        raise ValueError(f"{kind} needs {cls.feedback} feedback, spec says {spec.feedback}")
    return cls(spec, n_parallel, **kwargs)


def regret_bound(spec: LearnerSpec, kind: str, constant: float = 1.0) -> float:
    """High-probability regret bound scaled to the payoff range.

    EXP3.P: constant * sqrt(A T ln(T / delta)); Hedge: constant * sqrt(T ln(A / delta)).
    """
    A, T, delta = spec.action_count, spec.horizon, spec.delta
    if kind == "exp3p":
        base = math.sqrt(A * T * math.log(T / delta))
    elif kind == "hedge":
        base = math.sqrt(T * math.log(A / delta))
    else:
        raise ValueError(f"unknown learner kind {kind!r}")
    return constant * base * (spec.r_max - spec.r_min)


def draw(probs, u) -> np.ndarray:
    """Inverse-CDF draws: one action per row of `probs` from uniforms `u`."""
    probs = np.atleast_2d(probs)
    cdf = np.cumsum(probs, axis=1)
    a = (cdf < np.asarray(u, dtype=float).reshape(-1, 1)).sum(axis=1)
    return np.minimum(a, probs.shape[1] - 1)
