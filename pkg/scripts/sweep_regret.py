"""Regret of LagrangeBwK on a fixed stochastic instance against sqrt(T).

B = T/2 with a dummy resource; regret is T * OPT_LP - mean REW.

    python3 scripts/sweep_regret.py --Ts 1000 2000 4000 8000 16000 --seeds 30
"""
import argparse
import csv
import math
import os

import numpy as np

from bwk.algorithms import run_lagrange_bwk_many
from bwk.harness.plots import line_chart
from bwk.harness.suites import stochastic_instance
from bwk.lagrange import LagrangeParams
from bwk.lp import benchmark_lp


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--Ts", type=int, nargs="+", default=[1000, 2000, 4000, 8000, 16000])
    ap.add_argument("--seeds", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for T in args.Ts:
        inst = stochastic_instance(T)
        opt = T * benchmark_lp(inst.expected_matrix(), inst.B, T).value
        runs = run_lagrange_bwk_many(inst, LagrangeParams(inst.B, T), seed=args.seed, replicates=args.seeds)
        regret = opt - float(np.mean([r.total_reward for r in runs]))
        rows.append((T, math.sqrt(T), opt, regret, regret / math.sqrt(T * inst.K * math.log(T))))
        print(f"T={T}: regret {regret:.1f} (T*OPT_LP {opt:.1f}), normalized {rows[-1][-1]:.3f}", flush=True)
    with open(os.path.join(args.out, "regret_sweep.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["T", "sqrtT", "T_opt_lp", "mean_regret", "normalized"])
        w.writerows(rows)
    line_chart(os.path.join(args.out, "regret_sweep.svg"), {"LagrangeBwK": ([r[1] for r in rows], [r[3] for r in rows])},
               title="stochastic instance, B = T/2", xlabel="sqrt T", ylabel="mean regret")


if __name__ == "__main__":
    main()
