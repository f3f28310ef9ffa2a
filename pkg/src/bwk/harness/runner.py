"""Run experiments and write per-run, summary and phase CSVs."""
from __future__ import annotations

import csv
import datetime as _dt
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..algorithms import run_highprob_many, run_lagrange_bwk_many, run_simple_adversarial_many
from ..benchmarks import BenchmarkValues, compute_benchmarks, competitive_ratio
from ..core import BwkInstance, RunResult
from ..lagrange import LagrangeParams
from .config import ExperimentConfig, resolve_instances
from .plots import line_chart
from .stats import azuma_halfwidth, mean_std_stderr

RUN_COLUMNS = ["experiment", "instance_id", "algorithm", "seed", "replicate", "REW", "stop_time",
               "guess_or_phase_info"]  # followed by consumption_1..consumption_d
SUMMARY_COLUMNS = ["experiment", "instance_id", "algorithm", "T", "B", "K", "d", "replicates", "mean_REW",
                   "stddev_REW", "ci_halfwidth", "azuma_halfwidth", "opt_stopped_lp", "opt_fd_lower",
                   "opt_fd_mc", "opt_fd_mc_stderr", "opt_dp", "opt_fa", "competitive_ratio", "mean_regret"]
PHASE_COLUMNS = ["experiment", "instance_id", "replicate", "phase", "tau_start", "tau_end", "g", "B0", "T0",
                 "full", "depleted_at"]


def fmt(x) -> str:
    """CSV cell: floats with 12 significant digits, None as empty."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def write_csv(path, header, rows, timestamp: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        if timestamp:
            f.write(f"# generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n")
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


@dataclass
class SummaryRow:
    experiment: str
    instance_id: str
    algorithm: str
    T: int
    B: float
    K: int
    d: int
    replicates: int
    mean_REW: float
    stddev_REW: float
    ci_halfwidth: float
    azuma_halfwidth: float
    bench: BenchmarkValues
    competitive_ratio: float
    mean_regret: float

    def cells(self) -> list:
        b = self.bench
        return [self.experiment, self.instance_id, self.algorithm, self.T, float(self.B), self.K, self.d,
                self.replicates, self.mean_REW, self.stddev_REW, self.ci_halfwidth, self.azuma_halfwidth,
                b.opt_stopped_lp, b.opt_fd_lower, b.opt_fd_mc, b.opt_fd_mc_stderr, b.opt_dp, b.opt_fa,
                self.competitive_ratio, self.mean_regret]


def run_algorithm(config: ExperimentConfig, instance: BwkInstance) -> list[RunResult]:
    p = dict(config.params)
    common = dict(delta=p.get("delta", 0.05), seed=config.seed, replicates=int(config.replicates),
                  primal=p.get("primal", "exp3p"), dual=p.get("dual", "hedge"))
    if config.algorithm == "lagrange":
        params = LagrangeParams(float(p.get("B0", instance.B)), float(p.get("T0", instance.T)))
        return run_lagrange_bwk_many(instance, params, **common)
    if config.algorithm == "simple_adversarial":
        return run_simple_adversarial_many(instance, p.get("kappa", 2.0), p.get("g_min"), p.get("g_max"), **common)
    return run_highprob_many(instance, p.get("kappa", 2.0), p.get("gamma0"), **common)


def _info(algorithm: str, res: RunResult) -> str:
    if algorithm == "simple_adversarial":
        return f"g={res.info['guess'].guess:.12g}"
    if algorithm == "highprob":
        return f"phases={len(res.info['phases'])};g={res.info['guess']:.12g}"
    return f"B0={res.info['B0']:.12g};T0={res.info['T0']:.12g}"


def summarize(config: ExperimentConfig, inst_id: str, instance: BwkInstance, results: list[RunResult],
              bench: BenchmarkValues, delta: float = 0.05) -> SummaryRow:
    rews = [r.total_reward for r in results]
    n = len(rews)
    mean, std, se = mean_std_stderr(rews)
    # Azuma reference width for the mean of n runs with per-round increments in [0, 1]
    az = azuma_halfwidth(instance.T * n, 1.0, delta) / n
    return SummaryRow(config.name, inst_id, config.algorithm, instance.T, instance.B, instance.K, instance.d, n,
                      mean, std, 1.96 * se, az, bench, competitive_ratio(bench.opt_stopped_lp, mean),
                      bench.opt_stopped_lp - mean)


def run_experiment(config: ExperimentConfig, timestamp: bool = True, plots: bool = False,
                   out_dir: Optional[str] = None) -> dict:
    """Run every instance of the config and write CSVs (and optionally an SVG).

    Files, under the output directory: `<name>_runs.csv`, `<name>_summary.csv`,
    `<name>_phases.csv` (highprob only) and `<name>_ratio.svg` with `plots`.

    Returns:
        {"runs": path, "summary": path, "phases": path or None, "plot": path or None,
         "summary_rows": [SummaryRow, ...]}

    Raises:
        OSError: if the output directory cannot be created or written.
        ValueError: for an invalid instance reference.
    """
    out_dir = config.out_dir if out_dir is None else out_dir
    fam, pairs = resolve_instances(config)
    os.makedirs(out_dir, exist_ok=True)
    delta = config.params.get("delta", 0.05)
    d_max = max(inst.d for _, inst in pairs)
    run_rows, sum_rows, phase_rows, summaries = [], [], [], []
    for j, inst in pairs:
        inst_id = inst.name or f"{config.name}-{j + 1}"
        bench = compute_benchmarks(inst, fam, j if fam is not None else None, mc=config.mc_benchmark,
                                   seed=config.seed)
        results = run_algorithm(config, inst)
        for r, res in enumerate(results):
            cons = list(res.cumulative_consumption) + [None] * (d_max - inst.d)
            run_rows.append([config.name, inst_id, config.algorithm, config.seed, r, res.total_reward,
                             res.stop_time, _info(config.algorithm, res)] + cons)
            for ph in res.info.get("phases", []):
                phase_rows.append([config.name, inst_id, r, ph.phase, ph.tau_start, ph.tau_end, ph.g, ph.B0,
                                   ph.T0, ph.full, ph.depleted_at])
        row = summarize(config, inst_id, inst, results, bench, delta)
        summaries.append(row)
        sum_rows.append(row.cells())

    stem = os.path.join(out_dir, config.name)
    paths = {"runs": stem + "_runs.csv", "summary": stem + "_summary.csv", "phases": None, "plot": None}
    write_csv(paths["runs"], RUN_COLUMNS + [f"consumption_{i + 1}" for i in range(d_max)], run_rows, timestamp)
    write_csv(paths["summary"], SUMMARY_COLUMNS, sum_rows, timestamp)
    if config.algorithm == "highprob":
        paths["phases"] = stem + "_phases.csv"
        write_csv(paths["phases"], PHASE_COLUMNS, phase_rows, timestamp)
    if plots:
        paths["plot"] = stem + "_ratio.svg"
        xs = [float(j + 1) for j, _ in pairs]
        ys = [s.competitive_ratio if math.isfinite(s.competitive_ratio) else math.nan for s in summaries]
        line_chart(paths["plot"], {config.algorithm: (xs, ys)}, title=f"{config.name}: competitive ratio",
                   xlabel="instance", ylabel="stopped-LP / mean REW")
    paths["summary_rows"] = summaries
    return paths
