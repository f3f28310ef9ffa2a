"""Experiment configuration and instance resolution."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

from ..core import BwkInstance, insert_dummy_resource, insert_null_arm, load_instance
from ..instances import (ConstructionFamily, construct_family, gen_dynamic_pricing, gen_stochastic,
                         load_family)

ALGORITHMS = ("lagrange", "simple_adversarial", "highprob")


@dataclass
class ExperimentConfig:
    """One experiment: an instance (or family), an algorithm, and replication.

    `instance` takes one of these forms:

        {"family": "log", "T": 4096, "B": 64, "K": null, "members": [1, 2]}
        {"file": "instance.json"}
        {"manifest": "family_dir/manifest.json"}
        {"stochastic": {"arms": [...], "T": 2000, "B": 1000}, "dummy": true, "null": false}
        {"pricing": {"prices": [...], "valuation": {...}, "T": 1000, "B": 100}}

    `members` (1-based) restricts a family to some members. `dummy` and `null`
    insert a dummy resource or a null arm. Relative paths resolve against
    `base_dir` (the config file's directory when loaded from disk).

    `params` holds algorithm parameters: kappa, g_min, g_max, gamma0, delta,
    primal, dual, and B0/T0 for "lagrange" (defaults B and T).
    """

    name: str
    instance: dict
    algorithm: str = "simple_adversarial"
    params: dict = field(default_factory=dict)
    replicates: int = 10
    seed: int = 0
    out_dir: str = "results"
    mc_benchmark: bool = False
    base_dir: str = ""

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose one of {', '.join(ALGORITHMS)}")
        if int(self.replicates) < 1:
            raise ValueError("replicates must be at least 1")
        delta = self.params.get("delta", 0.05)
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not isinstance(self.instance, dict) or not self.instance:
            raise ValueError("instance must be a nonempty mapping")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    @classmethod
    def from_dict(cls, data: dict, base_dir: str = "") -> "ExperimentConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__ and k != "base_dir"}
        extra = set(data) - set(known) - {"base_dir"}
        if extra:
            raise ValueError(f"unknown config fields: {', '.join(sorted(extra))}")
        return cls(**known, base_dir=base_dir)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    return ExperimentConfig.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def save_config(config: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(config.to_dict(), f, indent=1, sort_keys=True)
        f.write("\n")


def _path(config: ExperimentConfig, p: str) -> str:
    return p if os.path.isabs(p) or not config.base_dir else os.path.join(config.base_dir, p)


def resolve_instances(config: ExperimentConfig) -> tuple[Optional[ConstructionFamily], list[tuple[int, BwkInstance]]]:
    """The family (if any) and the (member index, instance) pairs to run.

    Raises:
        ValueError: for an unrecognized or invalid instance reference.
    """
    spec = config.instance
    fam = None
    if "family" in spec:
        fam = construct_family(spec["family"], int(spec["T"]), spec.get("B"), spec.get("K"))
    elif "manifest" in spec:
        fam = load_family(_path(config, spec["manifest"]))
    if fam is not None:
        members = spec.get("members") or list(range(1, len(fam) + 1))
        for j in members:
            if not 1 <= j <= len(fam):
                raise ValueError(f"member {j} outside 1..{len(fam)}")
        pairs = [(j - 1, fam[j - 1]) for j in members]
    elif "file" in spec:
        pairs = [(0, load_instance(_path(config, spec["file"])))]
    elif "stochastic" in spec:
        s = spec["stochastic"]
        pairs = [(0, gen_stochastic(s["arms"], int(s["T"]), float(s["B"]), s.get("name", config.name)))]
    elif "pricing" in spec:
        s = spec["pricing"]
        pairs = [(0, gen_dynamic_pricing(s["prices"], s["valuation"], float(s["B"]), int(s["T"])))]
    else:
        raise ValueError(f"unrecognized instance reference with keys {sorted(spec)}")
    out = []
    for j, inst in pairs:
        if spec.get("null") and inst.null_arm is None:
            inst = insert_null_arm(inst)
        if spec.get("dummy"):
            inst = insert_dummy_resource(inst)
        out.append((j, inst))
    return fam, out
