#!/usr/bin/env python3
"""Write a 28x28 gray-level digit to data/digit28.pgm.

The 8x8 scikit-learn digit is upsampled with cubic splines and rescaled
to [0, 1]; it stands in for the handwritten digit used in the denoising
experiment.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from scipy import ndimage

from qhmc_kit.targets import write_pgm


def digit28(index=0):
    from sklearn.datasets import load_digits

    img = load_digits().images[index].astype(float)
    big = ndimage.zoom(img, 28 / 8, order=3)
    big = np.clip(big, 0, None)
    return big / big.max()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--index", type=int, default=0, help="which scikit-learn digit")
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" / "digit28.pgm"))
    args = ap.parse_args(argv)
    img = digit28(args.index)
    write_pgm(args.out, img)
    print(f"wrote {args.out} {img.shape}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
