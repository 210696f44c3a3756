#!/usr/bin/env python3
"""Write the LARS diabetes table (442 rows, AGE ... S6, Y) to data/diabetes.data.

Uses the raw copy bundled with scikit-learn when it is installed, else
downloads the original tab-delimited file.
"""

import argparse
import sys
import urllib.request
from pathlib import Path

import numpy as np

from qhmc_kit.targets import read_diabetes_table, write_diabetes_table

URL = "https://web.stanford.edu/~hastie/Papers/LARS/diabetes.data"


def from_sklearn():
    from sklearn.datasets import load_diabetes

    raw = load_diabetes(scaled=False)
    return np.asarray(raw.data, dtype=float), np.asarray(raw.target, dtype=float)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" / "diabetes.data"))
    ap.add_argument("--download", action="store_true", help="skip scikit-learn and fetch the original file")
    args = ap.parse_args(argv)
    out = Path(args.out)
    if not args.download:
        try:
            X, y = from_sklearn()
        except ImportError:
            args.download = True
    if args.download:
        out.parent.mkdir(parents=True, exist_ok=True)
        with urllib.request.urlopen(URL, timeout=30) as resp:
            out.write_bytes(resp.read())
    else:
        write_diabetes_table(out, X, y)
    X, y = read_diabetes_table(out)  # validates the layout
    print(f"wrote {out} ({X.shape[0]} rows, {X.shape[1]} attributes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
