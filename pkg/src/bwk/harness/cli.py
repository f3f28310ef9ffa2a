"""Command-line entry point: run experiments, verification suites, benchmarks."""
from __future__ import annotations

import argparse
import json
import sys

from ..benchmarks import compute_benchmarks
from ..core import load_instance, validate_instance
from ..instances import construct_family
from .config import load_config
from .runner import fmt, run_experiment, write_csv
from .suites import SUITES, verify

BENCH_COLUMNS = ["family", "member", "T", "B", "K", "opt_stopped_lp", "opt_fd_lower", "opt_dp", "opt_fa"]


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.replicates is not None:
        if args.replicates < 1:
            raise SystemExit("--replicates must be at least 1")
        cfg.replicates = args.replicates
    paths = run_experiment(cfg, timestamp=not args.no_timestamp, plots=args.plots, out_dir=args.out)
    for row in paths["summary_rows"]:
        print(f"{row.instance_id}: mean REW {row.mean_REW:.4g} +- {row.ci_halfwidth:.2g}, "
              f"stopped LP {row.bench.opt_stopped_lp:.4g}, ratio {row.competitive_ratio:.4g}")
    for key in ("runs", "summary", "phases", "plot"):
        if paths[key]:
            print(f"wrote {paths[key]}")
    return 0


def _cmd_verify(args) -> int:
    try:
        checks = verify(args.suite, on_check=lambda c: print(c.line(), flush=True))
    except KeyError as e:
        print(e.args[0], file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            json.dump([c.to_dict() for c in checks], f, indent=1, default=float)
            f.write("\n")
    return 0 if all(c.passed for c in checks) else 1


def _cmd_bench(args) -> int:
    fam = construct_family(args.family, args.T, args.B, args.K)
    rows = []
    for j, inst in enumerate(fam):
        b = compute_benchmarks(inst, fam, j)
        rows.append([fam.kind, j + 1, inst.T, float(inst.B), inst.K, b.opt_stopped_lp, b.opt_fd_lower,
                     b.opt_dp, b.opt_fa])
    if args.out:
        write_csv(args.out, BENCH_COLUMNS, rows, timestamp=not args.no_timestamp)
        print(f"wrote {args.out}")
    else:
        print(",".join(BENCH_COLUMNS))
        for r in rows:
            print(",".join(fmt(x) for x in r))
    return 0


def _cmd_validate(args) -> int:
    inst = load_instance(args.file)
    problems = validate_instance(inst, stream=args.seed or 0)
    for v in problems:
        print(f"round {v.round}, arm {v.arm}, {v.field}: {v.message}")
    print(f"{args.file}: {'ok' if not problems else f'{len(problems)} violation(s)'} "
          f"(K={inst.K}, d={inst.d}, T={inst.T}, B={inst.B:g}, {inst.mode})")
    return 0 if not problems else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bwk", description="Bandits with Knapsacks simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config (JSON)")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.add_argument("--replicates", type=int)
    r.add_argument("--out", help="output directory (default: the config's out_dir)")
    r.add_argument("--no-timestamp", action="store_true", help="omit the '# generated' line in CSVs")
    r.add_argument("--plots", action="store_true", help="also write an SVG chart")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("verify", help=f"run a verification suite: {', '.join(SUITES)}")
    v.add_argument("suite")
    v.add_argument("--out", help="write a JSON report here")
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="benchmark values of a construction family")
    b.add_argument("family", choices=["simple", "log", "dp", "fa"])
    b.add_argument("--T", type=int, required=True)
    b.add_argument("--B", type=float)
    b.add_argument("--K", type=int)
    b.add_argument("--out", help="CSV path (default: stdout)")
    b.add_argument("--no-timestamp", action="store_true")
    b.set_defaults(func=_cmd_bench)

    i = sub.add_parser("instance", help="instance file utilities")
    isub = i.add_subparsers(dest="action", required=True)
    iv = isub.add_parser("validate", help="check an instance file's invariants")
    iv.add_argument("file")
    iv.add_argument("--seed", type=int, help="sample stream for stochastic instances")
    iv.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
