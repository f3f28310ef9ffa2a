"""Run acceptance criteria and write a JSON report.

    python3 scripts/run_acceptance.py [criterion ...] [--out report.json]
"""
import argparse
import json
import sys

from bwk.harness.suites import CRITERIA


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("criteria", nargs="*", type=int, help="criterion numbers (default: all)")
    ap.add_argument("--out", default="acceptance_report.json")
    args = ap.parse_args(argv)
    wanted = args.criteria or sorted(CRITERIA)
    checks = []
    for n in wanted:
        chk = CRITERIA[n]()
        print(chk.line(), flush=True)
        checks.append(chk)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        json.dump([c.to_dict() for c in checks], f, indent=1, default=float)
        f.write("\n")
    n_pass = sum(c.passed for c in checks)
    print(f"{n_pass}/{len(checks)} criteria pass; report in {args.out}")
    return 0 if n_pass == len(checks) else 1


if __name__ == "__main__":
    sys.exit(main())
