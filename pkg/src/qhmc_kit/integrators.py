"""Leapfrog paths and the stochastic Nose-Hoover thermostat step."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import MassMatrix, ThermostatState, ValidationError

#: states with any |coordinate| above this (or non-finite) are divergent
DIVERGENCE_BOUND = 1e10


@dataclass(frozen=True)
class PathConfig:
    """Step size plus either a fixed step count or a mean path duration.

    With ``mean_duration`` set (randomized-HMC mode) each path draws
    ``t ~ Exponential(mean_duration)`` and runs ``max(1, round(t / step_size))``
    steps; ``n_steps`` is then ignored.
    """

    step_size: float = 0.03
    n_steps: int = 5
    mean_duration: float | None = None

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValidationError("step size must be positive")
        if self.n_steps < 1:
            raise ValidationError("need at least one leapfrog step")
        if self.mean_duration is not None and not self.mean_duration > 0:
            raise ValidationError("mean path duration must be positive")

    def draw_steps(self, rng: np.random.Generator) -> int:
        if self.mean_duration is None:
            return self.n_steps
        t = rng.exponential(self.mean_duration)
        return max(1, int(round(t / self.step_size)))


class PathResult(NamedTuple):
    x: np.ndarray
    q: np.ndarray
    divergent: bool


def is_divergent(v: np.ndarray) -> bool:
    # written so NaN also counts as divergent; scalar fast path for 1-D targets
    if v.size == 1:
        return not (-DIVERGENCE_BOUND <= v.item() <= DIVERGENCE_BOUND)
    return not (np.abs(v).max() <= DIVERGENCE_BOUND)


def leapfrog_path(target, x0, q0, M: MassMatrix, step_size: float, n_steps: int,
                  grad: Callable | None = None) -> PathResult:
    """Half kick, ``n_steps`` drifts interleaved with full kicks, closing half kick.

    ``grad`` overrides ``target.gradient`` (used for minibatch gradients).
    The path stops early and is flagged divergent as soon as ``x`` or ``q``
    leaves the finite box.
    """
    grad = target.gradient if grad is None else grad
    eps = step_size
    with np.errstate(over="ignore", invalid="ignore"):
        x = np.array(x0, dtype=float)
        q = np.array(q0, dtype=float) - 0.5 * eps * grad(x)
        for _ in range(n_steps - 1):
            x = x + eps * M.inv_apply(q)
            if is_divergent(x):
                return PathResult(x, q, True)
            q = q - eps * grad(x)
        x = x + eps * M.inv_apply(q)
        if is_divergent(x):
            return PathResult(x, q, True)
        q = q - 0.5 * eps * grad(x)
        return PathResult(x, q, is_divergent(q))


THERMOSTAT_FORMS = ("printed", "mass_scaled")


def thermostat_step(state: ThermostatState, grad: Callable[[np.ndarray], np.ndarray],
                    M: MassMatrix, step_size: float, rng: np.random.Generator,
                    update_xi: bool = True, form: str = "printed") -> tuple[ThermostatState, bool]:
    """One step of the stochastic-gradient Nose-Hoover update.

    ``form="printed"``:

    ``x <- x + eps M^-1 q``;
    ``q <- q - eps grad(x_new) - eps xi q + sqrt(2 A eps) z``;
    ``xi <- xi + eps/m_mu (q_new' M^-1 q_new - T tr(M^-1))``.

    ``form="mass_scaled"`` uses friction ``eps xi M^-1 q`` and drives ``xi``
    with ``|M^-1 q_new|**2 - T tr(M^-1)``. This is the drift whose
    stationary law is ``exp(-U - K - m_mu/2 (xi - A)**2)`` for a general
    ``M``; both forms agree when ``M = I``.

    With ``update_xi=False`` the friction stays at its current value.
    Returns the new state and a divergence flag.
    """
    if form not in THERMOSTAT_FORMS:
        raise ValidationError(f"thermostat form must be one of {THERMOSTAT_FORMS}")
    eps = step_size
    with np.errstate(over="ignore", invalid="ignore"):
        x = state.x + eps * M.inv_apply(state.q)
        noise = math.sqrt(2.0 * state.diffusion * eps) * rng.standard_normal(x.size)
        if form == "printed":
            friction = state.xi * state.q
        else:
            friction = state.xi * M.inv_apply(state.q)
        q = state.q - eps * grad(x) - eps * friction + noise
        xi = state.xi
        if update_xi:
            v = M.inv_apply(q)
            drive = float(q @ v) if form == "printed" else float(v @ v)
            xi = xi + eps / state.thermal_mass * (drive - state.temperature * M.inv_trace())
    new = ThermostatState(x, q, xi, state.thermal_mass, state.diffusion, state.temperature)
    return new, is_divergent(x) or is_divergent(q) or not math.isfinite(xi)
