"""Experiment configs: JSON files, built-in defaults and CLI overrides.

Precedence, lowest first: built-in experiment defaults, the JSON config
file, command-line flags. A config file may replace the whole sampler list
and any entry of ``params``. Subcommand flags (``--lam``, ``--mass-mu``, ...)
override the file, and ``--seed``/``--out``/``--paper-scale`` override
everything.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..core import (
    DenseMass,
    DiagonalLogNormal,
    DiagonalMass,
    DiracMass,
    MassMatrix,
    MassSpec,
    MixtureMass,
    ScalarLogNormal,
    ScalarMass,
    ValidationError,
)
from ..integrators import PathConfig
from ..samplers import SAMPLERS, SamplerConfig

EXPERIMENTS = (
    "lp1d",
    "spiky_smooth",
    "asymmetric_well",
    "double_well",
    "ill_gaussian",
    "gmm2d",
    "bridge",
    "denoise",
    "qsgnht_gauss",
)

SQRT2 = float(np.sqrt(2.0))


# ---------------------------------------------------------------------------
# mass and sampler entries


def _matrix(entry: dict, dim: int) -> MassMatrix:
    kind = entry.get("kind")
    if kind == "scalar":
        return ScalarMass(float(entry["m"]), dim)
    if kind == "diagonal":
        return DiagonalMass(np.asarray(entry["diag"], dtype=float))
    if kind == "dense":
        return DenseMass(np.asarray(entry["matrix"], dtype=float))
    raise ValidationError(f"unknown mass matrix kind {kind!r}")


def mass_from_dict(entry: dict, dim: int) -> MassSpec:
    """Build a mass distribution from its JSON form.

    Kinds: ``dirac`` (fields of a fixed matrix under ``matrix`` or a bare
    ``m``), ``scalar_lognormal`` (``mu``, ``sigma``, optional ``lower``),
    ``diagonal_lognormal`` (lists ``mu``, ``sigma``), ``mixture``
    (``weights`` plus fixed-matrix ``components``).
    """
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ValidationError(f"mass entry needs a 'kind': {entry!r}")
    kind = entry["kind"]
    try:
        if kind == "dirac":
            inner = entry.get("matrix", {"kind": "scalar", "m": entry.get("m", 1.0)})
            return DiracMass(_matrix(inner, dim))
        if kind == "scalar_lognormal":
            return ScalarLogNormal(float(entry["mu"]), float(entry["sigma"]), dim, entry.get("lower"))
        if kind == "diagonal_lognormal":
            return DiagonalLogNormal(entry["mu"], entry["sigma"], entry.get("lower"))
        if kind == "mixture":
            return MixtureMass(entry["weights"], [_matrix(c, dim) for c in entry["components"]])
    except KeyError as exc:
        raise ValidationError(f"mass entry of kind {kind!r} is missing {exc}") from exc
    raise ValidationError(f"unknown mass kind {kind!r}")


_SAMPLER_KEYS = {
    "label", "sampler", "mass", "step_size", "n_steps", "mean_duration", "n_paths", "burn_in",
    "burn_in_mode", "mh", "temperature", "thermal_mass", "diffusion", "xi_init", "freeze_xi",
    "thermostat_form",
}


def sampler_from_dict(entry: dict, dim: int) -> tuple[str, str, SamplerConfig]:
    """``(label, sampler name, SamplerConfig)`` from one JSON sampler entry."""
    unknown = set(entry) - _SAMPLER_KEYS
    if unknown:
        raise ValidationError(f"unknown sampler fields {sorted(unknown)}")
    name = entry.get("sampler", "qhmc")
    if name not in SAMPLERS:
        raise ValidationError(f"unknown sampler {name!r}; choose from {sorted(SAMPLERS)}")
    path = PathConfig(entry.get("step_size", 0.03), entry.get("n_steps", 5), entry.get("mean_duration"))
    kw = {k: entry[k] for k in ("n_paths", "burn_in", "burn_in_mode", "mh", "temperature", "thermal_mass",
                                "diffusion", "xi_init", "freeze_xi", "thermostat_form") if k in entry}
    cfg = SamplerConfig(path=path, mass=mass_from_dict(entry.get("mass", {"kind": "dirac"}), dim), **kw)
    return entry.get("label", name), name, cfg


def scalar_ln(mu, sigma, lower=None):
    d = {"kind": "scalar_lognormal", "mu": mu, "sigma": sigma}
    if lower is not None:
        d["lower"] = lower
    return d


def dirac(m):
    return {"kind": "dirac", "m": m}


# ---------------------------------------------------------------------------
# defaults


def _qhmc(label, mass, n_paths, **kw):
    return {"label": label, "sampler": "qhmc", "mass": mass, "n_paths": n_paths, **kw}


def default_config(experiment: str, paper_scale: bool = False) -> dict:
    """Built-in defaults for ``experiment``; the parameter choices follow the experiment write-ups.

    ``paper_scale`` doubles the path counts that were halved to keep a
    desk run under about five minutes.
    """
    if experiment not in EXPERIMENTS:
        raise ValidationError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    half = 2 if paper_scale else 1
    if experiment == "lp1d":
        samplers = [_qhmc(f"sqhmc_mu{m:+d}", scalar_ln(m, 1.0), 200_000) for m in (-2, 0, 2)]
        params = {"p": 1.0, "lam": 1.0, "x0": 0.1}
    elif experiment == "spiky_smooth":
        n, eps = 25_000, 0.003
        samplers = [
            _qhmc("hmc_m1", dirac(1.0), n, step_size=eps),
            _qhmc("hmc_m0.01", dirac(0.01), n, step_size=eps),
            _qhmc("qhmc_bernoulli", {"kind": "mixture", "weights": [0.5, 0.5],
                                     "components": [{"kind": "scalar", "m": 0.01}, {"kind": "scalar", "m": 1.0}]}, n,
                  step_size=eps),
        ]
        params = {"regions": {"smooth": 1.0, "spiky": 1000.0}, "x0_scale": 0.5}
    elif experiment == "asymmetric_well":
        samplers = [_qhmc("qhmc_bernoulli", {"kind": "mixture", "weights": [0.5, 0.5],
                                             "components": [{"kind": "scalar", "m": 0.1},
                                                            {"kind": "scalar", "m": 1.0}]}, 50_000)]
        params = {"x0_init": 0.0}
    elif experiment == "double_well":
        samplers = [_qhmc(f"sqhmc_sigma{s}", scalar_ln(1.0, float(s)), 2500) for s in (0, 1, 2)]
        params = {"particles": 200, "check_interval": 50, "x0_init": SQRT2}
    elif experiment == "ill_gaussian":
        samplers = [
            _qhmc("dqhmc", {"kind": "diagonal_lognormal", "mu": [-3.0, -1.0], "sigma": [1.0, 1.0]}, 10_000),
            _qhmc("sqhmc", scalar_ln(-2.0, 1.0), 10_000),
            _qhmc("hmc_m0.01", dirac(0.01), 10_000),
        ]
        params = {"cov_diag": [100.0, 1.0]}
    elif experiment == "gmm2d":
        comps = [{"kind": "diagonal", "diag": [0.1, 0.001]}, {"kind": "diagonal", "diag": [0.001, 0.1]}]
        samplers = [
            _qhmc("mqhmc", {"kind": "mixture", "weights": [0.5, 0.5], "components": comps}, 20_000),
            _qhmc("hmc_m0.02", dirac(0.02), 20_000),
            _qhmc("riemannian_sigma1", {"kind": "dirac", "matrix": comps[0]}, 20_000),
        ]
        params = {"cov1_diag": [1.0, 100.0], "cov2_diag": [100.0, 1.0], "x_init": [0.0, 0.0]}
    elif experiment == "bridge":
        samplers = [
            _qhmc("hmc_m1", dirac(1.0), 2000, burn_in=1000, burn_in_mode="descent"),
            _qhmc("sqhmc_mu1", scalar_ln(1.0, 1.0), 2000, burn_in=1000, burn_in_mode="descent"),
        ]
        params = {"data": "data/diabetes.data", "mu": 100.0, "lambdas": [10.0, 100.0, 1000.0], "p": 0.5,
                  "eps0": 1e-8, "split_seeds": [0, 1, 2, 3, 4], "n_train": 300, "response_scale": 100.0}
    elif experiment == "denoise":
        samplers = [_qhmc(f"sqhmc_mu{m}", scalar_ln(float(m), 1.0), 500, burn_in=300) for m in (0, 1, 2)]
        samplers += [_qhmc(f"hmc_mu{m}", dirac(10.0**m), 500, burn_in=300) for m in (0, 1, 2)]
        params = {"image": "data/digit28.pgm", "density": 0.1, "mu": 100.0, "lam1": 1.0, "lam2": 10.0,
                  "p0": 0.5, "eps0": 1e-8, "rank": 20, "corruption_seed": 0}
    else:  # qsgnht_gauss
        common = {"step_size": 0.1, "n_steps": 20, "mh": False, "thermostat_form": "mass_scaled"}
        mass = scalar_ln(1.0, 0.5, lower=1.0)
        samplers = [
            {"label": "qsgnht", "sampler": "qsgnht", "mass": mass, "n_paths": 20_000, **common},
            {"label": "naive", "sampler": "qsgnht", "mass": mass, "n_paths": 20_000, "diffusion": 0.0,
             "xi_init": 0.0, "freeze_xi": True, **common},
        ]
        params = {"n_records": 1000, "batch_size": 64, "spread": 6.0}
    for s in samplers:
        s["n_paths"] = s["n_paths"] * half if experiment in _HALVED else s["n_paths"]
    return {"experiment": experiment, "samplers": samplers, "params": params, "seed": 0,
            "repetitions": 20 if experiment == "spiky_smooth" else 1, "out_dir": f"runs/{experiment}",
            "paper_scale": paper_scale}


# experiments whose published path counts take over ~5 minutes; desk runs use half
_HALVED = {"spiky_smooth"}


@dataclass
class ExperimentConfig:
    experiment: str
    samplers: list[dict]
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    repetitions: int = 1
    out_dir: str = "runs"
    paper_scale: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValidationError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if not self.samplers:
            raise ValidationError("need at least one sampler entry")
        labels = [s.get("label", s.get("sampler", "qhmc")) for s in self.samplers]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"sampler labels must be unique, got {labels}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))


def load_config(experiment: str | None = None, path=None, seed: int | None = None,
                out_dir: str | None = None, paper_scale: bool | None = None) -> ExperimentConfig:
    """Merge defaults, an optional JSON file and explicit overrides."""
    file_cfg: dict = {}
    if path is not None:
        try:
            file_cfg = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(file_cfg, dict):
            raise ValidationError(f"{path}: top level must be an object")
    exp = experiment or file_cfg.get("experiment")
    if exp is None:
        raise ValidationError("no experiment given (argument or 'experiment' in the config file)")
    if experiment and file_cfg.get("experiment") not in (None, experiment):
        raise ValidationError(f"config file is for {file_cfg['experiment']!r}, not {experiment!r}")
    scale = paper_scale if paper_scale is not None else bool(file_cfg.get("paper_scale", False))
    merged = default_config(exp, scale)
    unknown = set(file_cfg) - set(merged)
    if unknown:
        raise ValidationError(f"unknown config fields {sorted(unknown)}")
    for key, value in file_cfg.items():
        if key == "params":
            merged["params"].update(value)
        elif key != "paper_scale":
            merged[key] = value
    if seed is not None:
        merged["seed"] = seed
    if out_dir is not None:
        merged["out_dir"] = out_dir
    merged["paper_scale"] = scale
    return ExperimentConfig(**merged)
