#!/usr/bin/env python3
"""Run every built-in experiment with its defaults and print the headline numbers.

Artifacts go to ``<out>/<experiment>/``. Experiments whose data file is
missing are reported and skipped.
"""

import argparse
import json
import sys
import time
from pathlib import Path

from qhmc_kit.harness import EXPERIMENTS, load_config, run_experiment

ROOT = Path(__file__).resolve().parents[1]

HEADLINE = ("w1", "final_escape_fraction", "rel_var_error", "mode_fractions", "var", "mean_test_mse", "psnr")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(ROOT / "runs"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--paper-scale", action="store_true")
    ap.add_argument("--only", nargs="*", choices=EXPERIMENTS, help="subset of experiments")
    args = ap.parse_args(argv)

    for name in args.only or EXPERIMENTS:
        cfg = load_config(name, seed=args.seed, out_dir=str(Path(args.out) / name), paper_scale=args.paper_scale)
        # data paths in the defaults are relative to the repository root
        for key in ("data", "image"):
            if key in cfg.params and not Path(cfg.params[key]).is_absolute():
                cfg.params[key] = str(ROOT / cfg.params[key])
        t0 = time.perf_counter()
        try:
            art = run_experiment(cfg)
        except FileNotFoundError as exc:
            print(f"{name}: skipped ({exc})")
            continue
        runs = json.loads(art.metrics.read_text())["metrics"]["runs"]
        print(f"{name} ({time.perf_counter() - t0:.0f}s) -> {art.out_dir}")
        for label, m in runs.items():
            shown = {k: m[k] for k in HEADLINE if k in m}
            print(f"  {label}: {json.dumps(shown)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
