#!/usr/bin/env python3
"""Run one experiment from a JSON config file; same flags as ``qhmc-kit experiment``.

Example::

    python scripts/run_experiment.py lp1d --config configs/lp1d.json --seed 3 --out runs/lp1d
"""

import sys

from qhmc_kit.harness.cli import main

if __name__ == "__main__":
    sys.exit(main(["experiment", *sys.argv[1:]]))
