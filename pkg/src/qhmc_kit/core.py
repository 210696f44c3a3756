"""Mass matrices, mass distributions, momenta and Hamiltonians.

A mass matrix is drawn once per simulation path from a ``MassSpec`` and
held fixed along that path. Log-normal specs use base 10: ``m = 10**w`` with
``w ~ N(mu, sigma**2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import linalg


class ValidationError(ValueError):
    """Raised when a configuration or argument violates its contract."""


def make_rng(seed: int | np.random.SeedSequence | None = None) -> np.random.Generator:
    return np.random.default_rng(seed)


def split_rng(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Independent child streams, one per chain/particle."""
    return list(rng.spawn(n))


# ---------------------------------------------------------------------------
# Mass matrices


class MassMatrix:
    """Positive-definite mass. Subclasses: ScalarMass, DiagonalMass, DenseMass."""

    dim: int

    def apply(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inv_apply(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sqrt_apply(self, z: np.ndarray) -> np.ndarray:
        """Map a standard normal vector to a draw from N(0, M)."""
        raise NotImplementedError

    def inv_trace(self) -> float:
        raise NotImplementedError

    def summary(self) -> float:
        """Geometric-mean mass; one number per path for chain records."""
        raise NotImplementedError


@dataclass(frozen=True)
class ScalarMass(MassMatrix):
    m: float
    dim: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.m) and self.m > 0):
            raise ValidationError(f"scalar mass must be positive, got {self.m}")
        if self.dim < 1:
            raise ValidationError("dim must be >= 1")

    def apply(self, v):
        return self.m * v

    def inv_apply(self, q):
        return q / self.m

    def sqrt_apply(self, z):
        return np.sqrt(self.m) * z

    def inv_trace(self):
        return self.dim / self.m

    def summary(self):
        return float(self.m)


@dataclass(frozen=True)
class DiagonalMass(MassMatrix):
    diag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).reshape(-1)
        if d.size == 0 or not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise ValidationError("diagonal mass entries must be positive and finite")
        object.__setattr__(self, "diag", d)

    @property
    def dim(self):
        return self.diag.size

    def apply(self, v):
        return self.diag * v

    def inv_apply(self, q):
        return q / self.diag

    def sqrt_apply(self, z):
        return np.sqrt(self.diag) * z

    def inv_trace(self):
        return float(np.sum(1.0 / self.diag))

    def summary(self):
        return float(np.exp(np.mean(np.log(self.diag))))


@dataclass(frozen=True)
class DenseMass(MassMatrix):
    matrix: np.ndarray
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if M.shape[0] != M.shape[1]:
            raise ValidationError("dense mass must be square")
        if not np.allclose(M, M.T, rtol=1e-12, atol=1e-12 * np.abs(M).max()):
            raise ValidationError("dense mass must be symmetric")
        try:
            chol = linalg.cholesky(M, lower=True)
        except linalg.LinAlgError as exc:
            raise ValidationError("dense mass must be positive definite") from exc
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def apply(self, v):
        return self.matrix @ v

    def inv_apply(self, q):
        return linalg.cho_solve((self._chol, True), q)

    def sqrt_apply(self, z):
        return self._chol @ z

    def inv_trace(self):
        return float(np.trace(linalg.cho_solve((self._chol, True), np.eye(self.dim))))

    def summary(self):
        return float(np.exp(2.0 * np.mean(np.log(np.diag(self._chol)))))


# ---------------------------------------------------------------------------
# Mass distributions


class MassSpec:
    """Distribution over mass matrices; ``sample`` draws one per path."""

    dim: int

    def sample(self, rng: np.random.Generator) -> MassMatrix:
        raise NotImplementedError


def _check_lower(lower):
    if lower is not None and not lower > 0:
        raise ValidationError(f"mass lower bound must be positive, got {lower}")


@dataclass(frozen=True)
class DiracMass(MassSpec):
    """Point mass at ``mass``: plain HMC."""

    mass: MassMatrix

    @property
    def dim(self):
        return self.mass.dim

    def sample(self, rng):
        return self.mass


@dataclass(frozen=True)
class ScalarLogNormal(MassSpec):
    """``M = 10**w * I`` with ``w ~ N(mu, sigma**2)`` (S-QHMC)."""

    mu: float
    sigma: float
    dim: int = 1
    lower: float | None = None

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValidationError("sigma must be non-negative")
        _check_lower(self.lower)

    def sample(self, rng):
        # sigma == 0 consumes no randomness, so it replays a DiracMass run exactly
        m = 10.0 ** (rng.normal(self.mu, self.sigma) if self.sigma > 0 else self.mu)
        if self.lower is not None:
            m = max(m, self.lower)
        return ScalarMass(m, self.dim)


@dataclass(frozen=True)
class DiagonalLogNormal(MassSpec):
    """Independent ``m_kk = 10**w_k``, ``w_k ~ N(mu_k, sigma_k**2)`` (D-QHMC)."""

    mu: np.ndarray
    sigma: np.ndarray
    lower: float | None = None

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), mu.shape).copy()
        if np.any(sigma < 0):
            raise ValidationError("sigma entries must be non-negative")
        _check_lower(self.lower)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def dim(self):
        return self.mu.size

    def sample(self, rng):
        diag = 10.0 ** rng.normal(self.mu, self.sigma)
        if self.lower is not None:
            diag = np.maximum(diag, self.lower)
        return DiagonalMass(diag)


@dataclass(frozen=True)
class MixtureMass(MassSpec):
    """Finite mixture of fixed mass matrices (M-QHMC)."""

    weights: Sequence[float]
    components: Sequence[MassMatrix]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(w) != len(self.components) or len(w) == 0:
            raise ValidationError("need one weight per mixture component")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("mixture weights must be non-negative and sum to 1")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise ValidationError("mixture components must share a dimension")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def dim(self):
        return self.components[0].dim

    def sample(self, rng):
        k = rng.choice(len(self.weights), p=self.weights) if len(self.weights) > 1 else 0
        return self.components[k]


AnyMassSpec = Union[DiracMass, ScalarLogNormal, DiagonalLogNormal, MixtureMass]


def sample_mass(spec: MassSpec, rng: np.random.Generator) -> MassMatrix:
    return spec.sample(rng)


def sample_momentum(M: MassMatrix, rng: np.random.Generator) -> np.ndarray:
    return M.sqrt_apply(rng.standard_normal(M.dim))


def kinetic_energy(M: MassMatrix, q: np.ndarray) -> float:
    q = np.asarray(q, dtype=float)
    if q.shape != (M.dim,):
        raise ValidationError(f"momentum shape {q.shape} does not match mass dim {M.dim}")
    return 0.5 * float(q @ M.inv_apply(q))


def hamiltonian(target, x: np.ndarray, q: np.ndarray, M: MassMatrix) -> float:
    return target.potential(x) + kinetic_energy(M, q)


# ---------------------------------------------------------------------------
# Thermostat state


@dataclass
class ThermostatState:
    """Position, momentum and Nose-Hoover friction ``xi`` of a thermostat chain."""

    x: np.ndarray
    q: np.ndarray
    xi: float
    thermal_mass: float = 1.0
    diffusion: float = 1.0
    temperature: float = 1.0

    def __post_init__(self):
        if not self.thermal_mass > 0:
            raise ValidationError("thermal mass must be positive")
        if not self.diffusion >= 0:
            raise ValidationError("diffusion strength must be non-negative")
        if not self.temperature > 0:
            raise ValidationError("temperature must be positive")
