"""Instance generators: stochastic environments, dynamic pricing, and the
lower-bound families.

Lower-bound families use one resource, arm 0 as the null arm where the
construction has one, and rounds grouped into equal phases.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import BwkInstance, Sampler, register_sampler, save_instance, load_instance

# ---------------------------------------------------------------------------
# Distributions on [0, 1]
# ---------------------------------------------------------------------------


def _check_dist(spec: dict) -> dict:
    kind = spec.get("dist")
    if kind == "fixed":
        ok = 0.0 <= spec["value"] <= 1.0
    elif kind == "bernoulli":
        ok = 0.0 <= spec["p"] <= 1.0
    elif kind == "uniform":
        ok = 0.0 <= spec["low"] <= spec["high"] <= 1.0
    elif kind == "beta":
        ok = spec["a"] > 0 and spec["b"] > 0
    else:
        raise ValueError(f"unsupported distribution {kind!r}")
    if not ok:
        raise ValueError(f"distribution {spec} is not supported on [0, 1]")
    return dict(spec)


def _dist_mean(spec: dict) -> float:
    kind = spec["dist"]
    if kind == "fixed":
        return float(spec["value"])
    if kind == "bernoulli":
        return float(spec["p"])
    if kind == "uniform":
        return 0.5 * (spec["low"] + spec["high"])
    return spec["a"] / (spec["a"] + spec["b"])


def _dist_draw(spec: dict, rng: np.random.Generator, n: int) -> np.ndarray:
    kind = spec["dist"]
    if kind == "fixed":
        return np.full(n, float(spec["value"]))
    if kind == "bernoulli":
        return (rng.random(n) < spec["p"]).astype(float)
    if kind == "uniform":
        return rng.uniform(spec["low"], spec["high"], n)
    return rng.beta(spec["a"], spec["b"], n)


def _as_dist(x) -> dict:
    # bare numbers are point masses
    if isinstance(x, (int, float)):
        return {"dist": "fixed", "value": float(x)}
    return x


@register_sampler("entrywise")
class EntrywiseSampler(Sampler):
    """Independent distribution for every (arm, reward/consumption) entry.

    `arms[a][0]` describes arm a's reward and `arms[a][1 + i]` its
    consumption of resource i.
    """

    def __init__(self, arms: Sequence[Sequence[dict]]):
        self.arms = [[_check_dist(_as_dist(e)) for e in row] for row in arms]
        widths = {len(row) for row in self.arms}
        if len(widths) != 1 or widths.pop() < 2:
            raise ValueError("every arm needs a reward and the same number (>= 1) of consumptions")
        self.n_arms = len(self.arms)
        self.n_resources = len(self.arms[0]) - 1

    def mean(self):
        return np.array([[_dist_mean(e) for e in row] for row in self.arms])

    def _draw(self, rng, n):
        out = np.empty((n, self.n_arms, self.n_resources + 1))
        for a, row in enumerate(self.arms):
            for j, e in enumerate(row):
                out[:, a, j] = _dist_draw(e, rng, n)
        return out

    def to_dict(self):
        return {"kind": self.kind, "arms": self.arms}

    @classmethod
    def from_dict(cls, data):
        return cls(data["arms"])


@register_sampler("pricing")
class PricingSampler(Sampler):
    """One buyer per round with a random valuation; arms are posted prices.

    Posting price p sells iff valuation >= p: reward p, one unit of inventory.
    The last arm is the null arm (no offer).
    """

    def __init__(self, prices: Sequence[float], valuation: dict):
        self.prices = [float(p) for p in prices]
        if any(not 0.0 <= p <= 1.0 for p in self.prices):
            raise ValueError("prices must lie in [0, 1]")
        self.valuation = _check_dist(_as_dist(valuation))
        self.n_arms = len(self.prices) + 1
        self.n_resources = 1

    def sale_prob(self, p: float) -> float:
        v = self.valuation
        kind = v["dist"]
        if kind == "fixed":
            return float(v["value"] >= p)
        if kind == "bernoulli":
            return v["p"] if p > 0 else 1.0
        if kind == "uniform":
            lo, hi = v["low"], v["high"]
            if hi == lo:
                return float(lo >= p)
            return float(np.clip((hi - p) / (hi - lo), 0.0, 1.0))
        from scipy.stats import beta  # only for Beta valuations

        return float(beta.sf(p, v["a"], v["b"])) if p > 0 else 1.0

    def mean(self):
        m = np.zeros((self.n_arms, 2))
        for a, p in enumerate(self.prices):
            s = self.sale_prob(p)
            m[a] = (p * s, s)
        return m

    def _draw(self, rng, n):
        v = _dist_draw(self.valuation, rng, n)
        out = np.zeros((n, self.n_arms, 2))
        for a, p in enumerate(self.prices):
            sold = (v >= p).astype(float)
            out[:, a, 0] = p * sold
            out[:, a, 1] = sold
        return out

    def to_dict(self):
        return {"kind": self.kind, "prices": self.prices, "valuation": self.valuation}

    @classmethod
    def from_dict(cls, data):
        return cls(data["prices"], data["valuation"])


def gen_stochastic(arms: Sequence[Sequence], T: int, B: float, name: str = "") -> BwkInstance:
    """Stochastic instance with independent entry distributions.

    Args:
        arms: per arm, a list [reward, consumption_1, ..., consumption_d] of
            distribution dicts such as {"dist": "bernoulli", "p": 0.3}, or bare
            numbers for point masses.
        T: horizon.
        B: budget.
    """
    s = EntrywiseSampler(arms)
    return BwkInstance(s.n_arms, s.n_resources, T, B, sampler=s, name=name)


def gen_dynamic_pricing(prices: Sequence[float], valuation: dict, B: float, T: int,
                        name: str = "pricing") -> BwkInstance:
    """Posted-price selling of B units to T buyers; null arm appended last."""
    s = PricingSampler(prices, valuation)
    return BwkInstance(s.n_arms, 1, T, B, sampler=s, null_arm=s.n_arms - 1, name=name)


# ---------------------------------------------------------------------------
# Lower-bound families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstructionFamily:
    kind: str  # "simple", "log", "dp" or "fa"
    T: int
    B: float
    K: Optional[int]
    members: tuple

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i) -> BwkInstance:
        return self.members[i]

    def __iter__(self):
        return iter(self.members)


def _two_arm(T: int, B: float, reward: np.ndarray, cons: np.ndarray, name: str) -> BwkInstance:
    # arm 0 null, arm 1 with the given per-round reward and consumption
    m = np.zeros((T, 2, 2))
    m[:, 1, 0] = reward
    m[:, 1, 1] = cons
    return BwkInstance(2, 1, T, B, matrices=m, null_arm=0, name=name)


def construct_simple(T: int) -> ConstructionFamily:
    """Two instances with B = T/2 that agree on the first half.

    Arm 1 consumes one unit per round and earns 1/2 in the first half; in the
    second half it earns 0 (first instance) or 1 (second instance).
    """
    if T < 2 or T % 2:
        raise ValueError("T must be even")
    h = T // 2
    members = []
    for j, late in enumerate((0.0, 1.0), start=1):
        r = np.concatenate([np.full(h, 0.5), np.full(h, late)])
        members.append(_two_arm(T, h, r, np.ones(T), f"simple-T{T}-I{j}"))
    return ConstructionFamily("simple", T, h, None, tuple(members))


def _phases(T: int, B: int):
    if B < 1 or T % B:
        raise ValueError(f"B={B} must divide T={T}")
    return T // B


def construct_log_family(T: int, B: int) -> ConstructionFamily:
    """T/B instances; in instance tau, arm 1 earns sigma*B/T per round in phase
    sigma <= tau and nothing afterward. Phases have length B."""
    n = _phases(T, B)
    sigma = np.arange(T) // B + 1
    members = []
    for tau in range(1, n + 1):
        r = np.where(sigma <= tau, sigma * B / T, 0.0)
        members.append(_two_arm(T, B, r, np.ones(T), f"log-T{T}-B{B}-I{tau}"))
    return ConstructionFamily("log", T, B, None, tuple(members))


def construct_dp_family(T: int, B: int) -> ConstructionFamily:
    """T/B instances; in instance tau, arm 1 earns 1 per round in phase tau only."""
    n = _phases(T, B)
    sigma = np.arange(T) // B + 1
    members = []
    for tau in range(1, n + 1):
        r = (sigma == tau).astype(float)
        members.append(_two_arm(T, B, r, np.ones(T), f"dp-T{T}-B{B}-I{tau}"))
    return ConstructionFamily("dp", T, B, None, tuple(members))


def construct_fa_family(T: int, B: float, K: int) -> ConstructionFamily:
    """K - 1 instances over K arms and K phases of length T/K.

    In instance j (1-based), arm j' <= j (arm index j' - 1) earns K**-(K - j')
    and consumes one unit in every round of phase j' and is zero elsewhere;
    arms above j are zero throughout. The last arm is the null arm.
    """
    if K < 3:
        raise ValueError("need K >= 3")
    if T % K:
        raise ValueError(f"K={K} must divide T={T}")
    L = T // K
    members = []
    for j in range(1, K):
        m = np.zeros((T, K, 2))
        for jp in range(1, j + 1):
            rows = slice((jp - 1) * L, jp * L)
            m[rows, jp - 1, 0] = float(K) ** -(K - jp)
            m[rows, jp - 1, 1] = 1.0
        members.append(BwkInstance(K, 1, T, B, matrices=m, null_arm=K - 1, name=f"fa-T{T}-B{B:g}-K{K}-I{j}"))
    return ConstructionFamily("fa", T, B, K, tuple(members))


def construct_family(kind: str, T: int, B=None, K: Optional[int] = None) -> ConstructionFamily:
    if kind == "simple":
        return construct_simple(T)
    if kind == "log":
        return construct_log_family(T, int(B))
    if kind == "dp":
        return construct_dp_family(T, int(B))
    if kind == "fa":
        if K is None:
            raise ValueError("the fa family needs K")
        return construct_fa_family(T, B, int(K))
    raise ValueError(f"unknown family {kind!r}; choose simple, log, dp or fa")


def reduce_to_single_resource(instance: BwkInstance) -> BwkInstance:
    """Replace all resources by one whose consumption is their maximum."""
    inst = instance
    if inst.mode != "adversarial":
        raise ValueError("reduction is implemented for fixed outcome sequences")
    if inst.d == 1:
        return inst
    m = inst.matrices
    red = np.concatenate([m[:, :, :1], m[:, :, 1:].max(axis=2, keepdims=True)], axis=2)
    return BwkInstance(inst.K, 1, inst.T, inst.B, matrices=red, null_arm=inst.null_arm, name=inst.name)


def save_family(family: ConstructionFamily, directory) -> str:
    """Write each member as an instance file plus a manifest.json; returns the manifest path."""
    os.makedirs(directory, exist_ok=True)
    files = []
    for i, inst in enumerate(family.members, start=1):
        fn = f"member_{i:04d}.json"
        save_instance(inst, os.path.join(directory, fn))
        files.append(fn)
    manifest = {"kind": family.kind, "T": family.T, "B": family.B, "K": family.K, "members": files}
    path = os.path.join(directory, "manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=1)
        f.write("\n")
    return path


def load_family(manifest_path) -> ConstructionFamily:
    with open(manifest_path, encoding="utf-8") as f:
        man = json.load(f)
    root = os.path.dirname(manifest_path)
    members = tuple(load_instance(os.path.join(root, fn)) for fn in man["members"])
    return ConstructionFamily(man["kind"], man["T"], man["B"], man.get("K"), members)
