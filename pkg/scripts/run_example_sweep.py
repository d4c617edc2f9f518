#!/usr/bin/env python3
"""Run the two-power example end to end: conditions, sweep, reports.

Produces sweep.csv / sweep.json next to --out-dir and prints the verdict
summary.  The mu range defaults to [0.1, 0.94] * mu_star so the sweep
stays strictly inside the admissible interval whatever the config says.
"""

import argparse
import json
import pathlib
import sys

from fracvar.conditions import evaluate_conditions
from fracvar.harness import emit_report, run_sweep
from fracvar.problem import ProblemSpec


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/example.json")
    ap.add_argument("--count", type=int, default=8)
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--mu-lo-frac", type=float, default=0.1)
    ap.add_argument("--mu-hi-frac", type=float, default=0.94)
    args = ap.parse_args()

    with open(args.config) as fh:
        spec = ProblemSpec.from_config(json.load(fh))

    report = evaluate_conditions(spec.nonlinearity, spec.alpha, spec.T)
    print(report.json_str())
    if not report.mu_star > 0.0:
        print("datum admits no positive mu; nothing to sweep", file=sys.stderr)
        return 1

    mu_lo = args.mu_lo_frac * report.mu_star
    mu_hi = args.mu_hi_frac * report.mu_star
    sweep = run_sweep(spec, mu_lo, mu_hi, args.count)

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = emit_report(sweep, out / "sweep.csv", format="csv")
    paths += emit_report(sweep, out / "sweep.json", format="json")
    for p in paths:
        print("wrote", p)

    print(f"monotonicity {sweep.monotonicity_verdict}  "
          f"negativity {sweep.negativity_verdict}  "
          f"norm-decay {sweep.norm_decay_verdict}")
    return 0 if (sweep.monotonicity_verdict and sweep.negativity_verdict
                 and sweep.norm_decay_verdict) else 1


if __name__ == "__main__":
    raise SystemExit(main())
