"""Runners for the synthetic and applied experiments.

Every runner returns an ``ExperimentResult``: named sample blocks, a
metrics dict and optional histograms and images. Writing them to disk is
``artifacts.emit_artifacts``'s job.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from ..core import ValidationError, make_rng, split_rng
from ..diagnostics import escape_ratio, histogram, moment_report, psnr, test_mse, wasserstein1
from ..samplers import SAMPLERS, run_chains
from ..targets import (
    asymmetric_well_target,
    bridge_target,
    corrupt_image,
    denoise_target,
    double_well_target,
    gaussian_mixture_target,
    gaussian_records,
    gaussian_target,
    load_diabetes,
    lp_target,
    read_image,
)
from .config import ExperimentConfig, sampler_from_dict


@dataclass
class SampleBlock:
    """Rows of one run: ``label`` names the sampler (and setting), ``rep`` the repetition."""

    label: str
    rep: int
    values: np.ndarray


@dataclass
class ExperimentResult:
    experiment: str
    metrics: dict
    blocks: list[SampleBlock] = field(default_factory=list)
    histograms: dict = field(default_factory=dict)
    images: dict = field(default_factory=dict)
    columns: list[str] | None = None


def _streams(config: ExperimentConfig):
    """One generator per sampler entry, in list order; child ``i`` does not depend on the list length."""
    return split_rng(make_rng(config.seed), len(config.samplers))


def _entries(config: ExperimentConfig, dim: int):
    return [sampler_from_dict(e, dim) for e in config.samplers]


def summarize_1d(values, reference) -> dict:
    """Shared by the runners and by the CSV recomputation check."""
    x = np.asarray(values, dtype=float).reshape(-1)
    return {"w1": wasserstein1(x, reference), "mean": float(x.mean()), "var": float(x.var()), "n": int(x.size)}


def _chain_stats(chain) -> dict:
    return {"acceptance": chain.acceptance_rate, "divergent_rate": float(chain.divergent.mean())}


# ---------------------------------------------------------------------------
# one-dimensional targets


def _one_d_runs(res, config, target, x_init, streams, suffix=""):
    ref = target.reference()
    for (label, name, cfg), rng in zip(_entries(config, 1), streams):
        key = label + suffix
        chains = [SAMPLERS[name](cfg, target, [x_init], r) for r in split_rng(rng, config.repetitions)]
        for k, ch in enumerate(chains):
            res.blocks.append(SampleBlock(key, k, ch.samples))
        pooled = np.concatenate([c.samples[:, 0] for c in chains])
        m = summarize_1d(pooled, ref)
        m["acceptance"] = float(np.mean([c.acceptance_rate for c in chains]))
        m["divergent_rate"] = float(np.mean([c.divergent.mean() for c in chains]))
        if config.repetitions > 1:
            rep = moment_report([{"mean": c.samples.mean()} for c in chains])["mean"]
            m["mean_of_means"], m["std_of_means"] = float(rep.mean), float(rep.std)
        res.metrics["runs"][key] = m
        res.histograms[key] = histogram(pooled, bins=100)
    return res


def _one_d(config: ExperimentConfig, target, x_init) -> ExperimentResult:
    return _one_d_runs(ExperimentResult(config.experiment, {"runs": {}}), config, target, x_init, _streams(config))


def run_lp1d(config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    target = lp_target(float(p["p"]), float(p["lam"]), 1, float(p.get("eps0", 1e-8)))
    return _one_d(config, target, float(p.get("x0", 0.1)))


def spiky_smooth_regions(params: dict) -> dict:
    """``region -> lp target``: the smooth part is ``|x|``, the spiky part ``1000|x|`` by default."""
    return {name: lp_target(1.0, float(lam)) for name, lam in params["regions"].items()}


def run_spiky_smooth(config: ExperimentConfig) -> ExperimentResult:
    """Each region's slope is sampled on its own; labels are ``sampler/region``.

    The combined piecewise target is too narrow inside the spike for any one
    step size, so the two regions are run as separate Laplace targets and the
    error bars of the mean over repetitions are reported for each.
    """
    regions = spiky_smooth_regions(config.params)
    res = ExperimentResult(config.experiment, {"runs": {}})
    streams = [split_rng(r, len(regions)) for r in _streams(config)]
    for i, (region, target) in enumerate(regions.items()):
        # start half a scale length from the kink
        x_init = float(config.params.get("x0_scale", 0.5)) / target.lam
        _one_d_runs(res, config, target, x_init, [s[i] for s in streams], f"/{region}")
    return res


def run_asymmetric_well(config: ExperimentConfig) -> ExperimentResult:
    res = _one_d(config, asymmetric_well_target(), float(config.params.get("x0_init", 0.0)))
    for label, m in res.metrics["runs"].items():
        pooled = np.concatenate([b.values[:, 0] for b in res.blocks if b.label == label])
        m["left_fraction"] = float(np.mean(pooled < 0))
    res.metrics["exact_left_fraction"] = 0.75
    return res


def run_double_well(config: ExperimentConfig) -> ExperimentResult:
    """Particles start in the right well; samples are the particle states at each checkpoint."""
    p = config.params
    target, ref = double_well_target(), double_well_target().reference()
    n_part, every = int(p["particles"]), int(p["check_interval"])
    inits = [[float(p.get("x0_init", np.sqrt(2.0)))]] * n_part
    res = ExperimentResult(config.experiment, {"runs": {}})
    for (label, name, cfg), rng in zip(_entries(config, 1), _streams(config)):
        chains = run_chains(SAMPLERS[name], cfg, target, inits, rng)
        iters, frac = escape_ratio(chains, barrier=0.0, check_interval=every, start_side="right")
        for k, ch in enumerate(chains):
            res.blocks.append(SampleBlock(label, k, ch.samples[every - 1 :: every]))
        pooled = np.concatenate([b.values[:, 0] for b in res.blocks if b.label == label])
        m = summarize_1d(pooled, ref)
        m.update(escape_iterations=iters.tolist(), escape_fraction=frac.tolist(),
                 final_escape_fraction=float(frac[-1]),
                 acceptance=float(np.mean([c.acceptance_rate for c in chains])))
        res.metrics["runs"][label] = m
        res.histograms[label] = histogram(pooled, bins=100)
    return res


# ---------------------------------------------------------------------------
# two-dimensional targets


def run_ill_gaussian(config: ExperimentConfig) -> ExperimentResult:
    cov = np.diag(np.asarray(config.params["cov_diag"], dtype=float))
    target = gaussian_target(cov)
    res = ExperimentResult(config.experiment, {"runs": {}, "true_var": np.diag(cov).tolist()})
    for (label, name, cfg), rng in zip(_entries(config, cov.shape[0]), _streams(config)):
        ch = SAMPLERS[name](cfg, target, np.zeros(cov.shape[0]), rng)
        res.blocks.append(SampleBlock(label, 0, ch.samples))
        var = ch.samples.var(axis=0)
        res.metrics["runs"][label] = {
            "var": var.tolist(),
            "rel_var_error": (np.abs(var / np.diag(cov) - 1.0)).tolist(),
            "mean": ch.samples.mean(axis=0).tolist(),
            **_chain_stats(ch),
        }
    return res


def run_gmm2d(config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    covs = [np.diag(p["cov1_diag"]), np.diag(p["cov2_diag"])]
    target = gaussian_mixture_target([0.5, 0.5], covs)
    res = ExperimentResult(config.experiment, {"runs": {}})
    for (label, name, cfg), rng in zip(_entries(config, 2), _streams(config)):
        ch = SAMPLERS[name](cfg, target, np.asarray(p["x_init"], dtype=float), rng)
        res.blocks.append(SampleBlock(label, 0, ch.samples))
        frac = np.bincount(target.assign(ch.samples), minlength=2) / len(ch)
        res.metrics["runs"][label] = {"mode_fractions": frac.tolist(), "min_mode_fraction": float(frac.min()),
                                      **_chain_stats(ch)}
    return res


# ---------------------------------------------------------------------------
# stochastic gradients


def qsgnht_records(n_records: int, batch_size: int, spread: float):
    """Records ``(x - c_i)**2 / 2`` with centres at normal quantiles rescaled to std ``spread``.

    The full-data posterior is N(0, 1) whatever the spread; the spread only
    sets the minibatch gradient noise.
    """
    c = stats.norm.ppf((np.arange(n_records) + 0.5) / n_records)
    c = (c - c.mean()) / c.std() * spread
    return gaussian_records(c, batch_size)


def run_qsgnht_gauss(config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    target = qsgnht_records(int(p["n_records"]), int(p["batch_size"]), float(p["spread"]))
    res = ExperimentResult(config.experiment, {"runs": {}, "true_var": 1.0})
    for (label, name, cfg), rng in zip(_entries(config, 1), _streams(config)):
        ch = SAMPLERS[name](cfg, target, [0.0], rng)
        res.blocks.append(SampleBlock(label, 0, ch.samples))
        m = summarize_1d(ch.samples, stats.norm())
        m.update(_chain_stats(ch))
        if ch.xi is not None:
            m["xi_mean"] = float(ch.xi[ch.burn_in :].mean())
        res.metrics["runs"][label] = m
        res.histograms[label] = histogram(ch.samples, bins=100)
    return res


# ---------------------------------------------------------------------------
# bridge regression


def bridge_regress(data_path, lam: float, mu: float, sampler, split_seed: int = 0, rng=None,
                   p: float = 0.5, eps0: float = 1e-8, n_train: int = 300,
                   response_scale: float | None = 100.0):
    """One bridge-regression fit; returns ``(MSEReport, Chain, dataset)``.

    ``sampler`` is ``(name, SamplerConfig)``; the chain starts at zero
    coefficients and the config's burn-in settings apply (descent burn-in
    by default in the experiment configs).
    """
    path = Path(data_path)
    if not path.is_file():
        from ..targets.data import DIABETES_FORMAT
        raise FileNotFoundError(f"diabetes data not found at {path}; expected {DIABETES_FORMAT}")
    data = load_diabetes(path, seed=split_seed, n_train=n_train, response_scale=response_scale)
    target = bridge_target(data, mu, lam, p, eps0)
    name, cfg = sampler
    rng = make_rng(split_seed) if rng is None else rng
    chain = SAMPLERS[name](cfg, target, np.zeros(target.dim), rng)
    return test_mse(chain, data.X_test, data.y_test), chain, data


def run_bridge(config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    res = ExperimentResult(config.experiment, {"runs": {}, "mu": p["mu"]})
    entries = _entries(config, 10)
    # one child stream per (sampler, lambda), then one per split seed
    streams = [split_rng(r, len(p["lambdas"])) for r in _streams(config)]
    cols = None
    for i, lam in enumerate(p["lambdas"]):
        for (label, name, cfg), lam_streams in zip(entries, streams):
            key = f"{label}@lam={lam:g}"
            per_seed = []
            seed_rngs = split_rng(lam_streams[i], len(p["split_seeds"]))
            pooled = []
            for split_seed, r in zip(p["split_seeds"], seed_rngs):
                rep, chain, data = bridge_regress(p["data"], float(lam), float(p["mu"]), (name, cfg), split_seed, r,
                                                  float(p["p"]), float(p["eps0"]), int(p["n_train"]),
                                                  p.get("response_scale"))
                cols = list(data.columns)
                res.blocks.append(SampleBlock(key, int(split_seed), chain.samples))
                pooled.append(chain.samples)
                per_seed.append({"split_seed": int(split_seed), "test_mse": rep.posterior_mean_mse,
                                 "mean_per_sample_mse": rep.mean_per_sample_mse,
                                 "acceptance": chain.acceptance_rate, "coef_mean": rep.coef_mean.tolist()})
            mses = [s["test_mse"] for s in per_seed]
            res.metrics["runs"][key] = {"lambda": float(lam), "mean_test_mse": float(np.mean(mses)),
                                        "std_test_mse": float(np.std(mses)), "per_seed": per_seed}
            pooled = np.concatenate(pooled)
            for j, col in enumerate(cols):
                res.histograms[f"{key}/{col}"] = histogram(pooled[:, j], bins=50)
    res.columns = cols
    return res


# ---------------------------------------------------------------------------
# denoising


def denoise(image_path, density: float, params: dict, sampler, rng=None, corruption_seed: int = 0):
    """Corrupt, SVD-initialise, sample, and score one sampler.

    Returns a dict with the reconstruction (posterior mean of ``AB`` over the
    kept samples), its PSNR against the clean image, the corrupted image and
    the chain.
    """
    clean = read_image(image_path)
    noisy = corrupt_image(clean, density, make_rng(corruption_seed)) if density > 0 else clean.copy()
    target = denoise_target(noisy, params.get("mu", 100.0), params.get("lam1", 1.0), params.get("lam2", 10.0),
                            params.get("p0", 0.5), params.get("eps0", 1e-8), params.get("rank", 20))
    x0 = target.svd_init()
    name, cfg = sampler
    rng = make_rng(0) if rng is None else rng
    chain = SAMPLERS[name](cfg, target, x0, rng)
    recon = np.mean([target.unpack(s).low_rank() for s in chain.samples], axis=0)
    return {
        "reconstruction": recon,
        "psnr": psnr(np.clip(recon, 0.0, 1.0), clean),
        "psnr_corrupted": psnr(noisy, clean),
        "psnr_init": psnr(np.clip(target.unpack(x0).low_rank(), 0.0, 1.0), clean),
        "corrupted": noisy,
        "chain": chain,
    }


def run_denoise(config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    probe = read_image(p["image"])
    dim = p.get("rank", 20) * sum(probe.shape) + probe.size
    res = ExperimentResult(config.experiment, {"runs": {}})
    for (label, name, cfg), rng in zip(_entries(config, dim), _streams(config)):
        out = denoise(p["image"], float(p["density"]), p, (name, cfg), rng, int(p.get("corruption_seed", 0)))
        res.blocks.append(SampleBlock(label, 0, out["reconstruction"].reshape(1, -1)))
        res.images[f"{label}_reconstruction"] = out["reconstruction"]
        res.images.setdefault("corrupted", out["corrupted"])
        res.metrics["runs"][label] = {"psnr": out["psnr"], **_chain_stats(out["chain"])}
        res.metrics["psnr_corrupted"] = out["psnr_corrupted"]
        res.metrics["psnr_init"] = out["psnr_init"]
    vals = {k: v["psnr"] for k, v in res.metrics["runs"].items()}
    res.metrics["psnr_spread"] = float(max(vals.values()) - min(vals.values()))
    return res


RUNNERS = {
    "lp1d": run_lp1d,
    "spiky_smooth": run_spiky_smooth,
    "asymmetric_well": run_asymmetric_well,
    "double_well": run_double_well,
    "ill_gaussian": run_ill_gaussian,
    "gmm2d": run_gmm2d,
    "bridge": run_bridge,
    "denoise": run_denoise,
    "qsgnht_gauss": run_qsgnht_gauss,
}


def execute(config: ExperimentConfig) -> ExperimentResult:
    try:
        runner = RUNNERS[config.experiment]
    except KeyError:
        raise ValidationError(f"unknown experiment {config.experiment!r}") from None
    return runner(config)
