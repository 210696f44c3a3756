"""Metropolis-corrected samplers with per-path random mass.

Per-path random draws happen in a fixed order: minibatch (stochastic
samplers only), mass, momentum, path length, integrator noise, MH uniform.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .core import (
    DiagonalLogNormal,
    DiagonalMass,
    DiracMass,
    MassSpec,
    ScalarLogNormal,
    ScalarMass,
    ThermostatState,
    ValidationError,
    kinetic_energy,
    sample_momentum,
    split_rng,
)
from .integrators import THERMOSTAT_FORMS, PathConfig, is_divergent, leapfrog_path, thermostat_step

BURN_IN_MODES = ("sample", "descent")


@dataclass
class SamplerConfig:
    """Settings shared by every sampler.

    ``n_paths`` counts all paths including the ``burn_in`` ones. With
    ``burn_in_mode="descent"`` burn-in paths start from zero momentum and
    skip the MH test (a gradient-descent warm start); only divergent or
    non-finite proposals are refused.
    ``xi_init=None`` starts the thermostat at the diffusion strength ``A``.
    """

    path: PathConfig = field(default_factory=PathConfig)
    mass: MassSpec = field(default_factory=lambda: DiracMass(ScalarMass(1.0)))
    n_paths: int = 1000
    burn_in: int = 0
    burn_in_mode: str = "sample"
    mh: bool = True
    temperature: float = 1.0
    thermal_mass: float = 1.0
    diffusion: float = 1.0
    xi_init: float | None = None
    freeze_xi: bool = False
    thermostat_form: str = "printed"

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValidationError("n_paths must be >= 1")
        if not 0 <= self.burn_in < self.n_paths:
            raise ValidationError("burn_in must be in [0, n_paths)")
        if self.burn_in_mode not in BURN_IN_MODES:
            raise ValidationError(f"burn_in_mode must be one of {BURN_IN_MODES}")
        if not self.temperature > 0:
            raise ValidationError("temperature must be positive")
        if not self.thermal_mass > 0:
            raise ValidationError("thermal mass must be positive")
        if not self.diffusion >= 0:
            raise ValidationError("diffusion strength must be non-negative")
        if self.thermostat_form not in THERMOSTAT_FORMS:
            raise ValidationError(f"thermostat_form must be one of {THERMOSTAT_FORMS}")


@dataclass
class Chain:
    """Kept states plus per-path records (burn-in paths included in records)."""

    samples: np.ndarray
    mass: np.ndarray
    h_current: np.ndarray
    h_proposed: np.ndarray
    accepted: np.ndarray
    divergent: np.ndarray
    n_steps: np.ndarray
    burn_in: int = 0
    xi: np.ndarray | None = None

    def __len__(self):
        return self.samples.shape[0]

    @property
    def acceptance_rate(self) -> float:
        kept = self.accepted[self.burn_in :]
        return float(kept.mean()) if kept.size else 0.0

    @property
    def final_state(self) -> np.ndarray:
        return self.samples[-1]


def _new_records(n, d, n_keep, thermostat=False):
    return dict(
        samples=np.empty((n_keep, d)),
        mass=np.empty(n),
        h_current=np.empty(n),
        h_proposed=np.empty(n),
        accepted=np.zeros(n, dtype=bool),
        divergent=np.zeros(n, dtype=bool),
        n_steps=np.empty(n, dtype=np.int64),
        xi=np.empty(n) if thermostat else None,
    )


def mh_accept(h_current: float, h_proposed: float, temperature: float, u: float) -> bool:
    """Accept iff ``u < min(1, exp((H_current - H_proposed) / T))``."""
    if not math.isfinite(h_proposed):
        return False
    delta = h_current - h_proposed
    if delta >= 0:
        return True
    return u < math.exp(delta / temperature)


def _check_init(x_init, dim):
    x = np.array(x_init, dtype=float).reshape(-1)
    if x.size != dim:
        raise ValidationError(f"x_init has {x.size} entries, target dim is {dim}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("x_init must be finite")
    return x


def qhmc_sample(config: SamplerConfig, target, x_init, rng: np.random.Generator) -> Chain:
    """QHMC: a fresh mass ``M_t ~ P_M`` per path, then an MH-corrected leapfrog path.

    A ``DiracMass`` spec gives standard HMC.
    """
    x = _check_init(x_init, target.dim)
    n, burn = config.n_paths, config.burn_in
    rec = _new_records(n, x.size, n - burn)
    u_x = target.potential(x)
    spec, path = config.mass, config.path
    for t in range(n):
        descent = t < burn and config.burn_in_mode == "descent"
        M = spec.sample(rng)
        q = np.zeros(x.size) if descent else sample_momentum(M, rng)
        steps = path.draw_steps(rng)
        h0 = u_x + kinetic_energy(M, q)
        res = leapfrog_path(target, x, q, M, path.step_size, steps)
        if res.divergent:
            h1, accept = math.inf, False
        else:
            u_new = target.potential(res.x)
            h1 = u_new + kinetic_energy(M, res.q)
            if descent or not config.mh:
                accept = math.isfinite(h1)
            else:
                accept = mh_accept(h0, h1, config.temperature, rng.random())
        if accept:
            x, u_x = res.x, u_new
        rec["mass"][t] = M.summary()
        rec["h_current"][t], rec["h_proposed"][t] = h0, h1
        rec["accepted"][t], rec["divergent"][t] = accept, res.divergent
        rec["n_steps"][t] = steps
        if t >= burn:
            rec["samples"][t - burn] = x
    return Chain(burn_in=burn, **rec)


def dirac_from(spec: MassSpec) -> DiracMass:
    """Fixed mass at the median of a log-normal spec (lower bound applied)."""
    if isinstance(spec, DiracMass):
        return spec
    if isinstance(spec, ScalarLogNormal):
        m = 10.0**spec.mu
        if spec.lower is not None:
            m = max(m, spec.lower)
        return DiracMass(ScalarMass(m, spec.dim))
    if isinstance(spec, DiagonalLogNormal):
        d = 10.0**spec.mu
        if spec.lower is not None:
            d = np.maximum(d, spec.lower)
        return DiracMass(DiagonalMass(d))
    raise ValidationError(f"no fixed-mass equivalent for {type(spec).__name__}")


def qsgnht_sample(config: SamplerConfig, target, x_init, rng: np.random.Generator) -> Chain:
    """QSGNHT: random mass per path, minibatch thermostat dynamics, minibatch MH.

    Each path uses one minibatch for every gradient and for both ends of the
    MH test. The path is: half kick, ``L - 1`` thermostat steps, a final
    drift, and a closing half kick. The friction ``xi`` carries over between
    paths whether or not the proposal is accepted.
    """
    x = _check_init(x_init, target.dim)
    n, burn = config.n_paths, config.burn_in
    rec = _new_records(n, x.size, n - burn, thermostat=True)
    xi = config.diffusion if config.xi_init is None else float(config.xi_init)
    spec, path = config.mass, config.path
    eps = path.step_size
    for t in range(n):
        batch = target.sample_batch(rng)

        def grad(z, batch=batch):
            return target.minibatch_gradient(z, batch)

        M = spec.sample(rng)
        descent = t < burn and config.burn_in_mode == "descent"
        q = np.zeros(x.size) if descent else sample_momentum(M, rng)
        steps = path.draw_steps(rng)
        h0 = target.minibatch_potential(x, batch) + kinetic_energy(M, q)
        with np.errstate(over="ignore", invalid="ignore"):
            state = ThermostatState(x, q - 0.5 * eps * grad(x), xi, config.thermal_mass,
                                    config.diffusion, config.temperature)
            divergent = False
            for _ in range(steps - 1):
                state, divergent = thermostat_step(state, grad, M, eps, rng, update_xi=not config.freeze_xi,
                                                   form=config.thermostat_form)
                if divergent:
                    break
            if not divergent:
                x_new = state.x + eps * M.inv_apply(state.q)
                divergent = is_divergent(x_new)
            if not divergent:
                q_new = state.q - 0.5 * eps * grad(x_new)
                divergent = is_divergent(q_new)
        if math.isfinite(state.xi):
            xi = state.xi
        if divergent:
            h1, accept = math.inf, False
        else:
            u_new = target.minibatch_potential(x_new, batch)
            h1 = u_new + kinetic_energy(M, q_new)
            if descent or not config.mh:
                accept = math.isfinite(h1)
            else:
                accept = mh_accept(h0, h1, config.temperature, rng.random())
        if accept:
            x = x_new
        rec["mass"][t] = M.summary()
        rec["h_current"][t], rec["h_proposed"][t] = h0, h1
        rec["accepted"][t], rec["divergent"][t] = accept, divergent
        rec["n_steps"][t] = steps
        rec["xi"][t] = xi
        if t >= burn:
            rec["samples"][t - burn] = x
    return Chain(burn_in=burn, **rec)


def sgld_sample(config: SamplerConfig, target, x_init, rng: np.random.Generator) -> Chain:
    """Momentum-free Langevin: ``x <- x - eps grad U~(x) + sqrt(2 eps T) z``.

    One minibatch per path of ``L`` steps; no MH test.
    """
    x = _check_init(x_init, target.dim)
    n, burn = config.n_paths, config.burn_in
    rec = _new_records(n, x.size, n - burn)
    eps, T = config.path.step_size, config.temperature
    noise_scale = math.sqrt(2.0 * eps * T)
    for t in range(n):
        batch = target.sample_batch(rng)
        steps = config.path.draw_steps(rng)
        z = x
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(steps):
                z = z - eps * target.minibatch_gradient(z, batch) + noise_scale * rng.standard_normal(x.size)
        divergent = is_divergent(z)
        if not divergent:
            x = z
        rec["mass"][t] = math.inf
        rec["h_current"][t] = rec["h_proposed"][t] = math.nan
        rec["accepted"][t], rec["divergent"][t] = not divergent, divergent
        rec["n_steps"][t] = steps
        if t >= burn:
            rec["samples"][t - burn] = x
    return Chain(burn_in=burn, **rec)


BASELINES = ("sgnht", "sghmc", "sgld")


def baseline_sample(mode: str, config: SamplerConfig, target, x_init, rng: np.random.Generator) -> Chain:
    """Fixed-mass stochastic-gradient baselines.

    ``sgnht``: the thermostat sampler with a fixed mass (a log-normal spec is
    replaced by its median). ``sghmc``: friction frozen at ``xi = 1``.
    ``sgld``: first-order Langevin, see ``sgld_sample``.
    """
    mode = mode.lower()
    if mode not in BASELINES:
        raise ValidationError(f"unknown baseline {mode!r}; choose from {BASELINES}")
    if mode == "sgld":
        return sgld_sample(config, target, x_init, rng)
    cfg = replace(config, mass=dirac_from(config.mass))
    if mode == "sghmc":
        cfg = replace(cfg, xi_init=1.0, freeze_xi=True)
    return qsgnht_sample(cfg, target, x_init, rng)


SAMPLERS: dict[str, Callable] = {
    "qhmc": qhmc_sample,
    "qsgnht": qsgnht_sample,
    "sgnht": lambda c, t, x, r: baseline_sample("sgnht", c, t, x, r),
    "sghmc": lambda c, t, x, r: baseline_sample("sghmc", c, t, x, r),
    "sgld": sgld_sample,
}


def worker_count(default: int = 1) -> int:
    """Worker cap from ``QHMC_KIT_THREADS`` (falls back to ``default``)."""
    raw = os.environ.get("QHMC_KIT_THREADS")
    if raw is None:
        return default
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ValidationError(f"QHMC_KIT_THREADS must be an integer, got {raw!r}") from exc


def _run_one(args):
    sampler, config, target, x0, rng = args
    return sampler(config, target, x0, rng)


def run_chains(sampler: Callable, config: SamplerConfig, target, x_inits: Sequence,
               rng: np.random.Generator, workers: int | None = None) -> list[Chain]:
    """Independent chains on split streams, returned in input order.

    With more than one worker the chains run in a process pool, so the
    sampler and target must be picklable.
    """
    streams = split_rng(rng, len(x_inits))
    jobs = [(sampler, config, target, x0, s) for x0, s in zip(x_inits, streams)]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
