#!/usr/bin/env python3
"""Run the full identity-verification battery and write a JSONL report.

Usage: python scripts/run_verify_suite.py [out_dir] [--jobs N] [--seed S]
"""

import argparse
import sys
import time
import warnings
from pathlib import Path

from fracfield.quadrature import QuadratureConfig
from fracfield.verify import run_suite


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", nargs="?", default="out")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        reports = run_suite(QuadratureConfig(), seed=args.seed, jobs=args.jobs)
    wall = time.time() - t0

    path = out / "verify_report.jsonl"
    with open(path, "w") as fh:
        for r in reports:
            fh.write(r.to_json_line() + "\n")
    n_fail = 0
    for r in reports:
        flag = "PASS" if r.passed else "FAIL"
        n_fail += not r.passed
        print(f"{flag}  {r.name:28s} lhs={r.lhs:+.6e} rhs={r.rhs:+.6e} "
              f"rel={r.rel_err:.2e} est={r.est_err:.1e} [{r.branch}] {r.seconds:.1f}s")
    print(f"\n{len(reports)} checks, {n_fail} failures, {wall:.0f}s -> {path}")
    return 1 if n_fail else 0


if __name__ == "__main__":
    sys.exit(main())
