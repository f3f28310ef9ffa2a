"""Problem representation for bandits with knapsacks.

An instance has K arms, d resources, a horizon T and a per-resource budget B.
Each round's outcome matrix has shape (K, d + 1): column 0 holds rewards and
columns 1..d hold resource consumption, all in [0, 1].

Rounds are numbered 1..T in every public function. Arms and resources are
0-based indices.
"""
from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional, Sequence

import numpy as np

# Tolerance used when deciding that cumulative consumption exceeds a budget.
# Summing B/T for T rounds can land a few ulps above B.
BUDGET_RTOL = 1e-12
BUDGET_ATOL = 1e-9

SAMPLER_BLOCK = 256


def exceeds_budget(consumption, budget) -> np.ndarray:
    """Elementwise test `consumption > budget` with a tiny float allowance."""
    return np.asarray(consumption) > budget * (1.0 + BUDGET_RTOL) + BUDGET_ATOL


# ---------------------------------------------------------------------------
# Seeded streams
# ---------------------------------------------------------------------------

def _label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


@dataclass(frozen=True)
class RngSeed:
    """A root seed plus a label naming the component that consumes it.

    Each (seed, label, replicate) triple maps to an independent stream, so a
    replicate's draws do not depend on how many other replicates run or on
    which other components draw randomness.
    """

    seed: int
    label: str = "root"

    def sequence(self, replicate: int = 0) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            int(self.seed), spawn_key=(_label_key(self.label), int(replicate))
        )

    def generator(self, replicate: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.sequence(replicate)))

    def child(self, label: str) -> "RngSeed":
        return RngSeed(self.seed, f"{self.label}/{label}")


def stream_key(seed: int, label: str, replicate: int = 0) -> int:
    """Collapse a labeled stream into one 64-bit integer key."""
    return int(RngSeed(seed, label).sequence(replicate).generate_state(2, np.uint64)[0])


# ---------------------------------------------------------------------------
# Outcome samplers (stochastic mode)
# ---------------------------------------------------------------------------

SAMPLERS: dict[str, type] = {}


def register_sampler(name: str):
    def wrap(cls):
        cls.kind = name
        SAMPLERS[name] = cls
        return cls

    return wrap


class Sampler:
    """Distribution over outcome matrices, drawn i.i.d. each round.

    Subclasses provide `mean()`, `_draw(rng, n)` and `to_dict()`. Draws are a
    pure function of (round, stream): rounds are grouped into fixed blocks and
    each block gets its own generator keyed by (stream, block index).
    """

    kind = "abstract"
    n_arms: int
    n_resources: int

    def mean(self) -> np.ndarray:
        raise NotImplementedError

    def _draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def sample(self, start: int, stop: int, stream: int) -> np.ndarray:
        """Outcome matrices for rounds start..stop (1-based, inclusive)."""
        if stop < start:
            return np.zeros((0, self.n_arms, self.n_resources + 1))
        first, last = (start - 1) // SAMPLER_BLOCK, (stop - 1) // SAMPLER_BLOCK
        blocks = []
        for b in range(first, last + 1):
            seq = np.random.SeedSequence(int(stream), spawn_key=(int(b),))
            blocks.append(self._draw(np.random.Generator(np.random.PCG64(seq)), SAMPLER_BLOCK))
        out = np.concatenate(blocks, axis=0)
        offset = first * SAMPLER_BLOCK
        return out[start - 1 - offset: stop - offset]


def sampler_from_dict(data: dict) -> Sampler:
    # concrete distributions live in bwk.instances
    from . import instances  # noqa: F401

    kind = data["kind"]
    if kind not in SAMPLERS:
        raise ValueError(f"unknown sampler kind {kind!r}")
    return SAMPLERS[kind].from_dict(data)


@register_sampler("with_dummy")
class WithDummyResource(Sampler):
    """Appends a resource consumed at a fixed rate by every arm."""

    def __init__(self, base: Sampler, rate: float):
        self.base = base
        self.rate = float(rate)
        self.n_arms = base.n_arms
        self.n_resources = base.n_resources + 1

    def mean(self):
        m = self.base.mean()
        return np.concatenate([m, np.full((self.n_arms, 1), self.rate)], axis=1)

    def _draw(self, rng, n):
        m = self.base._draw(rng, n)
        return np.concatenate([m, np.full((n, self.n_arms, 1), self.rate)], axis=2)

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict(), "rate": self.rate}

    @classmethod
    def from_dict(cls, data):
        return cls(sampler_from_dict(data["base"]), data["rate"])


@register_sampler("with_null")
class WithNullArm(Sampler):
    """Appends an arm with zero reward and zero consumption.

    If `dummy` is given, the new arm consumes `rate` of that resource, like
    every other arm.
    """

    def __init__(self, base: Sampler, dummy: Optional[int] = None, rate: float = 0.0):
        self.base = base
        self.dummy = dummy
        self.rate = float(rate)
        self.n_arms = base.n_arms + 1
        self.n_resources = base.n_resources

    def _null_row(self):
        row = np.zeros(self.n_resources + 1)
        if self.dummy is not None:
            row[1 + self.dummy] = self.rate
        return row

    def mean(self):
        return np.concatenate([self.base.mean(), self._null_row()[None]], axis=0)

    def _draw(self, rng, n):
        m = self.base._draw(rng, n)
        null = np.broadcast_to(self._null_row(), (n, 1, self.n_resources + 1))
        return np.concatenate([m, null], axis=1)

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict(), "dummy": self.dummy, "rate": self.rate}

    @classmethod
    def from_dict(cls, data):
        return cls(sampler_from_dict(data["base"]), data.get("dummy"), data.get("rate", 0.0))


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BwkInstance:
    """One bandits-with-knapsacks problem.

    Exactly one of `matrices` (adversarial mode, shape (T, K, d + 1)) and
    `sampler` (stochastic mode) is set. `null_arm` and `dummy_resource` are
    indices or None.
    """

    K: int
    d: int
    T: int
    B: float
    matrices: Optional[np.ndarray] = None
    sampler: Optional[Sampler] = None
    null_arm: Optional[int] = None
    dummy_resource: Optional[int] = None
    name: str = ""

    def __post_init__(self):
        if (self.matrices is None) == (self.sampler is None):
            raise ValueError("give exactly one of matrices or sampler")
        if self.matrices is not None and self.matrices.flags.writeable:
            object.__setattr__(self, "matrices", _frozen(self.matrices))

    @property
    def mode(self) -> str:
        return "adversarial" if self.matrices is not None else "stochastic"

    def outcomes(self, start: int, stop: int, stream: int = 0) -> np.ndarray:
        """Outcome matrices for rounds start..stop (1-based, inclusive).

        `stream` selects the environment realization in stochastic mode and is
        ignored for a fixed sequence.
        """
        if self.matrices is not None:
            return self.matrices[start - 1: stop]
        return self.sampler.sample(start, stop, stream)

    def expected_matrix(self) -> np.ndarray:
        if self.sampler is None:
            raise ValueError("expected_matrix needs a stochastic instance")
        return self.sampler.mean()

    def with_name(self, name: str) -> "BwkInstance":
        return BwkInstance(self.K, self.d, self.T, self.B, self.matrices, self.sampler,
                           self.null_arm, self.dummy_resource, name)


def materialize(instance: BwkInstance, stream: int) -> BwkInstance:
    """Draw a stochastic instance's outcome sequence into a fixed instance."""
    if instance.mode == "adversarial":
        return instance
    m = instance.outcomes(1, instance.T, stream)
    return BwkInstance(instance.K, instance.d, instance.T, instance.B, matrices=m,
                       null_arm=instance.null_arm, dummy_resource=instance.dummy_resource,
                       name=instance.name)


class Violation(NamedTuple):
    round: Optional[int]
    arm: Optional[int]
    field: str
    message: str

    def __str__(self):
        where = []
        if self.round is not None:
            where.append(f"round {self.round}")
        if self.arm is not None:
            where.append(f"arm {self.arm}")
        loc = ", ".join(where)
        return f"{loc + ': ' if loc else ''}{self.field}: {self.message}"


def _matrix_violations(m: np.ndarray, rounds: np.ndarray, inst: BwkInstance) -> list[Violation]:
    out = []
    bad = np.argwhere(~np.isfinite(m) | (m < 0) | (m > 1))
    for t, a, j in bad[:50]:
        label = "reward" if j == 0 else f"consumption[{j - 1}]"
        out.append(Violation(int(rounds[t]), int(a), label, f"{m[t, a, j]!r} outside [0, 1]"))
    if inst.null_arm is not None:
        row = m[:, inst.null_arm, :].copy()
        if inst.dummy_resource is not None:
            row[:, 1 + inst.dummy_resource] = 0.0
        nz = np.argwhere(row != 0)
        for t, j in nz[:10]:
            out.append(Violation(int(rounds[t]), inst.null_arm, "null arm", "has nonzero reward or consumption"))
    if inst.dummy_resource is not None:
        col = m[:, :, 1 + inst.dummy_resource]
        rate = inst.B / inst.T
        off = np.argwhere(np.abs(col - rate) > 1e-12)
        for t, a in off[:10]:
            out.append(Violation(int(rounds[t]), int(a), "dummy resource", f"consumes {col[t, a]!r}, expected B/T={rate!r}"))
    return out


def validate_instance(instance: BwkInstance, n_samples: int = 64, stream: int = 0) -> list[Violation]:
    """Check the structural invariants of an instance.

    Stochastic instances are checked on the expected matrix plus `n_samples`
    sampled rounds. Returns an empty list for a valid instance.
    """
    inst = instance
    out: list[Violation] = []
    if inst.K < 1:
        out.append(Violation(None, None, "K", "need at least one arm"))
    if inst.d < 1:
        out.append(Violation(None, None, "d", "need at least one resource"))
    if not (1 <= inst.B <= inst.T):
        out.append(Violation(None, None, "B", f"budget {inst.B} not in [1, T={inst.T}]"))
    if inst.null_arm is not None and not (0 <= inst.null_arm < inst.K):
        out.append(Violation(None, None, "null arm", f"index {inst.null_arm} out of range"))
    if inst.dummy_resource is not None and not (0 <= inst.dummy_resource < inst.d):
        out.append(Violation(None, None, "dummy resource", f"index {inst.dummy_resource} out of range"))
    if out:
        return out
    shape = (inst.K, inst.d + 1)
    if inst.mode == "adversarial":
        m = inst.matrices
        if m.shape != (inst.T,) + shape:
            return [Violation(None, None, "matrices", f"shape {m.shape}, expected {(inst.T,) + shape}")]
        out += _matrix_violations(m, np.arange(1, inst.T + 1), inst)
    else:
        s = inst.sampler
        if (s.n_arms, s.n_resources) != (inst.K, inst.d):
            return [Violation(None, None, "sampler", "shape does not match K and d")]
        mean = s.mean()
        for v in _matrix_violations(mean[None], np.array([0]), inst):
            out.append(v._replace(round=None, field="expected " + v.field))
        n = min(n_samples, inst.T)
        if n > 0:
            out += _matrix_violations(inst.outcomes(1, n, stream), np.arange(1, n + 1), inst)
    return out


def average_outcome(matrices: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Mean outcome matrix over rounds start..stop (1-based, inclusive)."""
    if not (1 <= start <= stop <= len(matrices)):
        raise ValueError(f"bad round range [{start}, {stop}] for {len(matrices)} rounds")
    return matrices[start - 1: stop].mean(axis=0)


def insert_dummy_resource(instance: BwkInstance) -> BwkInstance:
    """Add a resource that every arm consumes at rate B/T each round."""
    inst = instance
    if inst.dummy_resource is not None:
        raise ValueError("instance already has a dummy resource")
    rate = inst.B / inst.T
    if inst.mode == "adversarial":
        col = np.full(inst.matrices.shape[:2] + (1,), rate)
        m = np.concatenate([inst.matrices, col], axis=2)
        return BwkInstance(inst.K, inst.d + 1, inst.T, inst.B, matrices=m,
                           null_arm=inst.null_arm, dummy_resource=inst.d, name=inst.name)
    return BwkInstance(inst.K, inst.d + 1, inst.T, inst.B, sampler=WithDummyResource(inst.sampler, rate),
                       null_arm=inst.null_arm, dummy_resource=inst.d, name=inst.name)


def insert_null_arm(instance: BwkInstance) -> BwkInstance:
    """Add an arm with zero reward and consumption (dummy consumption kept)."""
    inst = instance
    if inst.null_arm is not None:
        raise ValueError("instance already has a null arm")
    rate = inst.B / inst.T
    if inst.mode == "adversarial":
        row = np.zeros((inst.T, 1, inst.d + 1))
        if inst.dummy_resource is not None:
            row[:, :, 1 + inst.dummy_resource] = rate
        m = np.concatenate([inst.matrices, row], axis=1)
        return BwkInstance(inst.K + 1, inst.d, inst.T, inst.B, matrices=m,
                           null_arm=inst.K, dummy_resource=inst.dummy_resource, name=inst.name)
    s = WithNullArm(inst.sampler, inst.dummy_resource, rate if inst.dummy_resource is not None else 0.0)
    return BwkInstance(inst.K + 1, inst.d, inst.T, inst.B, sampler=s,
                       null_arm=inst.K, dummy_resource=inst.dummy_resource, name=inst.name)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

FORMAT_VERSION = 1


def instance_to_dict(instance: BwkInstance) -> dict:
    inst = instance
    data: dict[str, Any] = {
        "format": FORMAT_VERSION,
        "name": inst.name,
        "mode": inst.mode,
        "K": inst.K,
        "d": inst.d,
        "T": inst.T,
        "B": inst.B,
        "null_arm": inst.null_arm,
        "dummy_resource": inst.dummy_resource,
    }
    if inst.mode == "adversarial":
        data["matrices"] = inst.matrices.tolist()
    else:
        data["sampler"] = inst.sampler.to_dict()
    return data


def instance_from_dict(data: dict) -> BwkInstance:
    if data.get("format") != FORMAT_VERSION:
        raise ValueError(f"unsupported instance format {data.get('format')!r}")
    common = dict(K=int(data["K"]), d=int(data["d"]), T=int(data["T"]), B=data["B"],
                  null_arm=data.get("null_arm"), dummy_resource=data.get("dummy_resource"),
                  name=data.get("name", ""))
    if data["mode"] == "adversarial":
        return BwkInstance(matrices=np.array(data["matrices"], dtype=float), **common)
    if data["mode"] == "stochastic":
        return BwkInstance(sampler=sampler_from_dict(data["sampler"]), **common)
    raise ValueError(f"unknown mode {data['mode']!r}")


def save_instance(instance: BwkInstance, path) -> None:
    # json writes floats with repr, which round-trips exactly
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(instance_to_dict(instance), f)
        f.write("\n")


def load_instance(path) -> BwkInstance:
    with open(path, encoding="utf-8") as f:
        return instance_from_dict(json.load(f))


# ---------------------------------------------------------------------------
# Run results
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    """Trajectory of one run.

    `rewards[t - 1]` is the reward collected in round t. The round whose
    consumption overdraws a budget is recorded with its arm, its consumption
    counts toward `cumulative_consumption`, and its reward is forfeited (0).
    """

    chosen_arms: np.ndarray
    rewards: np.ndarray
    cumulative_consumption: np.ndarray
    stop_time: int
    total_reward: float
    distributions: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)


def check_run(result: RunResult, instance: BwkInstance, stream: int = 0) -> list[str]:
    """Replay-free consistency checks of a RunResult against its instance."""
    problems = []
    tau = result.stop_time
    if not (1 <= tau <= instance.T):
        problems.append(f"stop_time {tau} outside [1, {instance.T}]")
        return problems
    if len(result.chosen_arms) != tau or len(result.rewards) != tau:
        problems.append("trajectory length differs from stop_time")
    if not np.isclose(result.total_reward, float(np.sum(result.rewards)), rtol=0, atol=1e-9):
        problems.append("total_reward differs from the sum of rewards")
    m = instance.outcomes(1, tau, stream)
    cons = m[np.arange(tau), result.chosen_arms, 1:]
    cum = np.cumsum(cons, axis=0)
    if not np.allclose(cum[-1], result.cumulative_consumption, rtol=0, atol=1e-9):
        problems.append("cumulative consumption does not match the chosen arms")
    if tau > 1 and exceeds_budget(cum[-2], instance.B).any():
        problems.append("budget already exceeded before stop_time")
    if tau < instance.T and not exceeds_budget(cum[-1], instance.B).any():
        problems.append("stopped early without exceeding a budget")
    return problems


def as_prob_vector(p: Sequence[float], atol: float = 1e-9) -> np.ndarray:
    """Validate a probability vector and return it as an array."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or len(p) == 0:
        raise ValueError("probability vector must be one-dimensional and nonempty")
    if (p < -atol).any() or abs(p.sum() - 1.0) > atol:
        raise ValueError(f"not a probability vector: {p}")
    return p
