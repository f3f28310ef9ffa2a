"""Worst-member competitive ratio on the log family as T grows (B fixed).

Plots the simulated ratio of the guess-based algorithm against ln T together
with the recurrence floor 1/2 ln(T/B) + Euler's constant.

    python3 scripts/sweep_log_ratio.py --B 32 --Ts 256 512 1024 2048 4096 --seeds 100
"""
import argparse
import csv
import math
import os

import numpy as np

from bwk.algorithms import run_simple_adversarial_many
from bwk.benchmarks import lb_competitive_value
from bwk.harness.plots import line_chart
from bwk.instances import construct_log_family
from bwk.lp import stopped_lp


def worst_ratio(T, B, seeds, seed):
    worst = 0.0
    for inst in construct_log_family(T, B):
        bench = stopped_lp(inst.matrices, inst.B, inst.null_arm).value
        rew = np.mean([r.total_reward for r in run_simple_adversarial_many(inst, seed=seed, replicates=seeds)])
        worst = max(worst, bench / rew if rew > 0 else math.inf)
    return worst


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--B", type=int, default=32)
    ap.add_argument("--Ts", type=int, nargs="+", default=[256, 512, 1024, 2048, 4096])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for T in args.Ts:
        r = worst_ratio(T, args.B, args.seeds, args.seed)
        floor = lb_competitive_value(T, args.B)
        rows.append((T, math.log(T), r, floor))
        print(f"T={T}: worst-member ratio {r:.3f}, floor {floor:.3f}", flush=True)
    with open(os.path.join(args.out, "log_ratio_sweep.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["T", "lnT", "worst_ratio", "floor"])
        w.writerows(rows)
    xs = [r[1] for r in rows]
    line_chart(os.path.join(args.out, "log_ratio_sweep.svg"),
               {"algorithm 2": (xs, [r[2] for r in rows]), "floor": (xs, [r[3] for r in rows])},
               title=f"log family, B={args.B}", xlabel="ln T", ylabel="worst-member ratio")


if __name__ == "__main__":
    main()
