"""Dataset and image ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import ValidationError

DIABETES_COLUMNS = ("AGE", "SEX", "BMI", "BP", "S1", "S2", "S3", "S4", "S5", "S6", "Y")
DIABETES_FORMAT = (
    "whitespace/tab-delimited text with a header row "
    "'AGE SEX BMI BP S1 S2 S3 S4 S5 S6 Y' followed by 442 numeric rows "
    "(the LARS diabetes.data file)"
)


@dataclass
class RegressionDataset:
    """Standardised design matrix and centred/scaled response with a fixed split.

    Column statistics come from the training rows only. ``y_scale`` is the
    divisor applied to the centred response.
    """

    X: np.ndarray
    y: np.ndarray
    train: np.ndarray
    test: np.ndarray
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_scale: float
    columns: tuple = field(default=DIABETES_COLUMNS[:-1])
    seed: int | None = None

    @property
    def X_train(self):
        return self.X[self.train]

    @property
    def y_train(self):
        return self.y[self.train]

    @property
    def X_test(self):
        return self.X[self.test]

    @property
    def y_test(self):
        return self.y[self.test]


def prepare_regression(X, y, n_train: int, seed: int, response_scale: float | None = 100.0,
                       columns=DIABETES_COLUMNS[:-1]) -> RegressionDataset:
    """Seeded shuffle split, then standardise with training statistics.

    ``response_scale=None`` standardises y; a number divides the centred y
    by that constant instead.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if not 0 < n_train < n:
        raise ValidationError(f"n_train must be in (0, {n}), got {n_train}")
    perm = np.random.default_rng(seed).permutation(n)
    train, test = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    x_mean = X[train].mean(axis=0)
    x_std = X[train].std(axis=0)
    if np.any(x_std == 0):
        raise ValidationError("constant column in training split")
    y_mean = float(y[train].mean())
    y_scale = float(y[train].std()) if response_scale is None else float(response_scale)
    return RegressionDataset(
        X=(X - x_mean) / x_std, y=(y - y_mean) / y_scale, train=train, test=test,
        x_mean=x_mean, x_std=x_std, y_mean=y_mean, y_scale=y_scale,
        columns=tuple(columns), seed=seed,
    )


def read_diabetes_table(path) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"diabetes data not found at {path}; expected {DIABETES_FORMAT}")
    lines = [ln.split() for ln in path.read_text().splitlines() if ln.strip()]
    header, rows = lines[0], lines[1:]
    if [h.upper() for h in header] != list(DIABETES_COLUMNS):
        raise ValidationError(f"unexpected header {header}; expected {DIABETES_FORMAT}")
    if len(rows) != 442:
        raise ValidationError(f"expected 442 data rows, found {len(rows)}")
    for i, r in enumerate(rows, start=2):
        if len(r) != len(DIABETES_COLUMNS):
            raise ValidationError(f"line {i}: expected {len(DIABETES_COLUMNS)} columns, got {len(r)}")
    try:
        data = np.array(rows, dtype=float)
    except ValueError as exc:
        raise ValidationError(f"non-numeric entry in {path}") from exc
    return data[:, :-1], data[:, -1]


def load_diabetes(path, seed: int = 0, n_train: int = 300,
                  response_scale: float | None = 100.0) -> RegressionDataset:
    X, y = read_diabetes_table(path)
    return prepare_regression(X, y, n_train, seed, response_scale)


def write_diabetes_table(path, X, y):
    """Write ``X, y`` in the tab-delimited LARS layout."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write("\t".join(DIABETES_COLUMNS) + "\n")
        for xr, yr in zip(np.asarray(X), np.asarray(y)):
            fh.write("\t".join(f"{v:g}" for v in (*xr, yr)) + "\n")


# ---------------------------------------------------------------------------
# images


def _pgm_tokens(data: bytes):
    """Header tokens of a PGM file, skipping comments; returns (tokens, offset)."""
    tokens, i = [], 0
    while len(tokens) < 4:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if data[i : i + 1] == b"#":
            while i < len(data) and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        tokens.append(data[i:j].decode("ascii"))
        i = j
    return tokens, i + 1


def read_pgm(path) -> np.ndarray:
    """Read a P2/P5 PGM as floats in [0, 1]."""
    data = Path(path).read_bytes()
    (magic, w, h, maxval), offset = _pgm_tokens(data)
    w, h, maxval = int(w), int(h), int(maxval)
    if magic == "P5":
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        pix = np.frombuffer(data, dtype=dtype, count=w * h, offset=offset)
    elif magic == "P2":
        pix = np.array(data[offset:].split()[: w * h], dtype=float)
    else:
        raise ValidationError(f"{path}: not a PGM file (magic {magic!r})")
    if pix.size != w * h:
        raise ValidationError(f"{path}: expected {w * h} pixels, found {pix.size}")
    return np.clip(pix.reshape(h, w).astype(float) / maxval, 0.0, 1.0)


def write_pgm(path, img, binary: bool = True):
    img = np.clip(np.asarray(img, dtype=float), 0.0, 1.0)
    pix = np.rint(img * 255).astype(np.uint8)
    h, w = pix.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if binary:
        path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + pix.tobytes())
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in pix)
        path.write_text(f"P2\n{w} {h}\n255\n{body}\n")


def read_image(path) -> np.ndarray:
    """PGM, or a CSV matrix of values in [0, 1] (clamped)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"image not found: {path}")
    if path.suffix.lower() == ".csv":
        with path.open(newline="") as fh:
            rows = [[float(v) for v in r] for r in csv.reader(fh) if r]
        return np.clip(np.array(rows, dtype=float), 0.0, 1.0)
    return read_pgm(path)


def corrupt_image(img, density: float, rng: np.random.Generator) -> np.ndarray:
    """Salt-and-pepper noise: each pixel becomes 0 or 1 w.p. ``density``."""
    if not 0.0 <= density <= 1.0:
        raise ValidationError("density must lie in [0, 1]")
    img = np.asarray(img, dtype=float)
    hit = rng.random(img.shape) < density
    salt = rng.random(img.shape) < 0.5
    return np.where(hit, salt.astype(float), img)
