"""Writing and re-reading run artifacts: samples CSV, metrics JSON, histograms, images."""

from __future__ import annotations

import csv
import importlib.resources
import json
import math
import platform
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy
from scipy import stats

from ..targets import (
    asymmetric_well_target,
    double_well_target,
    lp_target,
    write_pgm,
)
from .config import ExperimentConfig
from .experiments import ExperimentResult, spiky_smooth_regions, summarize_1d

SAMPLES_FILE = "samples.csv"
METRICS_FILE = "metrics.json"
HISTOGRAM_FILE = "histograms.csv"
SCHEMA_VERSION = 1
ONE_D = ("lp1d", "spiky_smooth", "asymmetric_well", "double_well", "qsgnht_gauss")


@dataclass
class RunArtifact:
    out_dir: Path
    samples: Path
    metrics: Path
    histograms: Path | None
    images: list[Path]
    provenance: dict


def _software_version() -> str:
    from .. import __version__
    return __version__


def provenance(config: ExperimentConfig) -> dict:
    return {
        "config": config.to_dict(),
        "seed": config.seed,
        "software_version": _software_version(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def metrics_schema() -> dict:
    """The JSON schema every metrics file validates against (also shipped under ``docs/``)."""
    return json.loads(importlib.resources.files(__package__).joinpath("metrics_schema.json").read_text())


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def dumps_metrics(doc: dict) -> str:
    """Canonical serialisation (sorted keys, two-space indent, trailing newline)."""
    return json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(v: float) -> str:
    return repr(float(v))


def write_samples_csv(path: Path, result: ExperimentResult):
    """Long format: ``label, rep, index`` then one column per state coordinate."""
    width = max((b.values.shape[1] for b in result.blocks), default=0)
    cols = result.columns if result.columns and len(result.columns) == width else [f"x{i}" for i in range(width)]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["label", "rep", "index", *cols])
        for b in result.blocks:
            for i, row in enumerate(np.atleast_2d(b.values)):
                w.writerow([b.label, b.rep, i, *(_fmt(v) for v in row)])


def read_samples_csv(path) -> dict[str, list[np.ndarray]]:
    """``label -> [block per rep]`` in file order."""
    out: dict[str, dict[int, list]] = {}
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for row in r:
            out.setdefault(row[0], {}).setdefault(int(row[1]), []).append([float(v) for v in row[3:]])
    return {k: [np.array(rows) for rows in reps.values()] for k, reps in out.items()}


def write_histograms_csv(path: Path, histograms: dict):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["label", "left", "right", "count", "density"])
        for label, h in histograms.items():
            for lo, hi, c, d in zip(h.edges[:-1], h.edges[1:], h.counts, h.density):
                w.writerow([label, _fmt(lo), _fmt(hi), int(c), _fmt(d)])


def emit_artifacts(result: ExperimentResult, config: ExperimentConfig, out_dir=None) -> RunArtifact:
    """Write every artifact of ``result`` under ``out_dir`` (default ``config.out_dir``).

    Raises ``OSError`` when the directory cannot be created or written.
    """
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    samples = out / SAMPLES_FILE
    write_samples_csv(samples, result)
    hist = None
    if result.histograms:
        hist = out / HISTOGRAM_FILE
        write_histograms_csv(hist, result.histograms)
    images = []
    for name, img in result.images.items():
        path = out / f"{name}.pgm"
        write_pgm(path, img)
        images.append(path)
    prov = provenance(config)
    doc = {"schema_version": SCHEMA_VERSION, "experiment": result.experiment, "metrics": result.metrics,
           "provenance": prov, "files": {"samples": SAMPLES_FILE,
                                         "histograms": HISTOGRAM_FILE if hist else None,
                                         "images": [p.name for p in images]}}
    metrics = out / METRICS_FILE
    metrics.write_text(dumps_metrics(doc))
    return RunArtifact(out, samples, metrics, hist, images, prov)


# ---------------------------------------------------------------------------
# recomputation from disk


def reference_for(config: dict, label: str | None = None):
    """Exact or quadrature reference of a one-dimensional experiment, else ``None``.

    ``spiky_smooth`` runs carry their region after a slash in ``label``.
    """
    exp, p = config["experiment"], config["params"]
    if exp == "lp1d":
        return lp_target(float(p["p"]), float(p["lam"])).reference()
    if exp == "spiky_smooth":
        region = (label or "").rpartition("/")[2]
        if region not in p["regions"]:
            raise ValueError(f"label {label!r} names no region of {sorted(p['regions'])}")
        return spiky_smooth_regions(p)[region].reference()
    if exp == "asymmetric_well":
        return asymmetric_well_target().reference()
    if exp == "double_well":
        return double_well_target().reference()
    if exp == "qsgnht_gauss":
        return stats.norm()
    return None


def recompute_metrics(out_dir) -> dict:
    """Recompute the per-run summaries of a one-dimensional experiment from its samples CSV.

    Returns ``label -> {w1, mean, var, n}``; comparing with the ``runs``
    block of the metrics file checks that the two agree.
    """
    out = Path(out_dir)
    doc = json.loads((out / METRICS_FILE).read_text())
    config = doc["provenance"]["config"]
    if config["experiment"] not in ONE_D:
        raise ValueError(f"no one-dimensional reference for experiment {doc['experiment']!r}")
    blocks = read_samples_csv(out / SAMPLES_FILE)
    return {label: summarize_1d(np.concatenate([b[:, 0] for b in reps]), reference_for(config, label))
            for label, reps in blocks.items()}


def run_experiment(config: ExperimentConfig, out_dir=None) -> RunArtifact:
    """Execute ``config`` and write its artifacts."""
    from .experiments import execute
    return emit_artifacts(execute(config), config, out_dir)
