"""Built-in synthetic targets (lp priors, piecewise wells, Gaussians)."""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg, special
from scipy.special import logsumexp

from ..core import ValidationError
from .base import QuadratureReference, Target, sign

DEFAULT_EPS0 = 1e-8


def lp_gradient(x, p, lam, eps0=DEFAULT_EPS0):
    """Smoothed gradient of ``lam * sum |x|**p``; finite at zero when eps0 > 0."""
    ax = np.abs(x)
    return lam * p * sign(x) / (ax ** (1.0 - p) + eps0)


class LpReference:
    """Exact quantiles of ``p(x) ~ exp(-lam |x|**p)`` in 1-D.

    ``lam |X|**p`` is Gamma(1/p) distributed, so quantiles come from the
    inverse regularised incomplete gamma function.
    """

    def __init__(self, p: float, lam: float):
        self.p, self.lam = p, lam

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        g = special.gammaincinv(1.0 / self.p, np.abs(2.0 * u - 1.0))
        return np.sign(u - 0.5) * (g / self.lam) ** (1.0 / self.p)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        tail = special.gammainc(1.0 / self.p, self.lam * np.abs(x) ** self.p)
        return 0.5 + 0.5 * np.sign(x) * tail

    def pdf(self, x):
        a = 1.0 / self.p
        log_z = math.log(2.0) + special.gammaln(a) + math.log(a) - a * math.log(self.lam)
        return np.exp(-self.lam * np.abs(x) ** self.p - log_z)

    def var(self):
        a = 1.0 / self.p
        return float(np.exp(special.gammaln(3 * a) - special.gammaln(a)) / self.lam ** (2 * a))


class LpTarget(Target):
    def __init__(self, p: float, lam: float = 1.0, dim: int = 1, eps0: float = DEFAULT_EPS0):
        if not 0 < p <= 1:
            raise ValidationError(f"p must lie in (0, 1], got {p}")
        if not lam > 0:
            raise ValidationError("lambda must be positive")
        self.p, self.lam, self.dim, self.eps0 = p, lam, dim, eps0

    def potential(self, x):
        return self.lam * float(np.sum(np.abs(x) ** self.p))

    def gradient(self, x):
        return lp_gradient(x, self.p, self.lam, self.eps0)

    def reference(self):
        return LpReference(self.p, self.lam) if self.dim == 1 else None


def lp_target(p, lam=1.0, d=1, eps0=DEFAULT_EPS0) -> LpTarget:
    return LpTarget(p, lam, d, eps0)


class PiecewiseWellTarget(Target):
    """Flat on (-3, 0], stiff parabola 8x(x-1) on (0, 1], linear tails."""

    breakpoints = (-3.0, 0.0, 1.0)

    def potential(self, x):
        v = float(x[0])
        if v <= -3.0:
            return -v - 3.0
        if v <= 0.0:
            return 0.0
        if v <= 1.0:
            return 8.0 * v * (v - 1.0)
        return v - 1.0

    def gradient(self, x):
        # right-hand derivative at breakpoints
        v = float(x[0])
        if v < -3.0:
            g = -1.0
        elif v < 0.0:
            g = 0.0
        elif v < 1.0:
            g = 16.0 * v - 8.0
        else:
            g = 1.0
        return np.array([g])

    def potential_vec(self, v):
        v = np.asarray(v, dtype=float)
        return np.select(
            [v <= -3.0, v <= 0.0, v <= 1.0], [-v - 3.0, 0.0 * v, 8.0 * v * (v - 1.0)], v - 1.0
        )

    def reference(self):
        return QuadratureReference(self.potential_vec, -45.0, 45.0, self.breakpoints)


def piecewise_well_target() -> PiecewiseWellTarget:
    return PiecewiseWellTarget()


class SpikySmoothTarget(Target):
    """``1000|x|`` inside ``[-x0, x0]``, ``|x| + 999 x0`` outside."""

    def __init__(self, x0: float = math.log(1001.0) / 1000.0):
        if not x0 > 0:
            raise ValidationError("x0 must be positive")
        self.x0 = x0
        self.breakpoints = (-x0, 0.0, x0)

    def potential(self, x):
        a = abs(float(x[0]))
        return 1000.0 * a if a <= self.x0 else a + 999.0 * self.x0

    def gradient(self, x):
        v = float(x[0])
        s = 1.0 if v >= 0 else -1.0
        return np.array([1000.0 * s if -self.x0 <= v < self.x0 else s])

    def potential_vec(self, v):
        a = np.abs(np.asarray(v, dtype=float))
        return np.where(a <= self.x0, 1000.0 * a, a + 999.0 * self.x0)

    def reference(self):
        return QuadratureReference(self.potential_vec, -60.0, 60.0, self.breakpoints)


def spiky_smooth_target(x0: float = math.log(1001.0) / 1000.0) -> SpikySmoothTarget:
    return SpikySmoothTarget(x0)


class DoubleWellTarget(Target):
    """``U(x) = x**4 - 4x**2``; minima at +-sqrt(2), barrier of height 4 at 0."""

    def potential(self, x):
        v = float(x[0])
        return v**4 - 4.0 * v**2

    def gradient(self, x):
        v = float(x[0])
        return np.array([4.0 * v**3 - 8.0 * v])

    @staticmethod
    def potential_vec(v):
        v = np.asarray(v, dtype=float)
        return v**4 - 4.0 * v**2

    def reference(self):
        return QuadratureReference(self.potential_vec, -4.0, 4.0, (0.0,))


def double_well_target() -> DoubleWellTarget:
    return DoubleWellTarget()


class AsymmetricWellReference:
    """Exact law of ``exp(-U)`` for ``U = -x (x<0), 3x (x>=0)``; Z = 4/3."""

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.75 * np.exp(np.minimum(x, 0.0)), 1.0 - 0.25 * np.exp(-3.0 * np.maximum(x, 0.0)))

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            left = np.log(u / 0.75)
            right = -np.log((1.0 - u) / 0.25) / 3.0
        return np.where(u < 0.75, left, right)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.75 * np.exp(np.minimum(x, 0.0)), 0.75 * np.exp(-3.0 * np.maximum(x, 0.0)))


class AsymmetricWellTarget(Target):
    def potential(self, x):
        v = float(x[0])
        return -v if v < 0 else 3.0 * v

    def gradient(self, x):
        return np.array([-1.0 if x[0] < 0 else 3.0])

    def potential_vec(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v < 0, -v, 3.0 * v)

    def reference(self):
        return AsymmetricWellReference()


def asymmetric_well_target() -> AsymmetricWellTarget:
    return AsymmetricWellTarget()


def _spd_inverse(sigma):
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.shape[0] != sigma.shape[1] or not np.allclose(sigma, sigma.T):
        raise ValidationError("covariance must be a symmetric square matrix")
    try:
        c = linalg.cho_factor(sigma, lower=True)
    except linalg.LinAlgError as exc:
        raise ValidationError("covariance must be positive definite") from exc
    return linalg.cho_solve(c, np.eye(sigma.shape[0]))


class GaussianTarget(Target):
    def __init__(self, cov):
        self.cov = np.atleast_2d(np.asarray(cov, dtype=float))
        self.precision = _spd_inverse(self.cov)
        self.dim = self.cov.shape[0]

    def potential(self, x):
        return 0.5 * float(x @ self.precision @ x)

    def gradient(self, x):
        return self.precision @ x


def gaussian_target(cov) -> GaussianTarget:
    return GaussianTarget(cov)


class GaussianMixtureTarget(Target):
    """``U = -log sum_i w_i exp(-x' P_i x / 2)`` with zero-mean components.

    Component normalisers are not included, matching the unnormalised
    mixture the experiments use (equal determinants there anyway).
    """

    def __init__(self, weights, covs):
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12 or len(w) != len(covs):
            raise ValidationError("mixture weights must be non-negative, sum to 1, one per component")
        self.weights = w
        self.log_weights = np.log(w)
        self.covs = [np.atleast_2d(np.asarray(c, dtype=float)) for c in covs]
        self.precisions = np.stack([_spd_inverse(c) for c in self.covs])
        self.dim = self.precisions.shape[1]

    def _log_terms(self, x):
        quad = np.einsum("i,kij,j->k", x, self.precisions, x)
        return self.log_weights - 0.5 * quad

    def potential(self, x):
        return -float(logsumexp(self._log_terms(x)))

    def responsibilities(self, x):
        t = self._log_terms(x)
        return np.exp(t - logsumexp(t))

    def gradient(self, x):
        r = self.responsibilities(x)
        return np.einsum("k,kij,j->i", r, self.precisions, x)

    def assign(self, samples):
        """Index of the most responsible component for each row of ``samples``."""
        samples = np.atleast_2d(samples)
        quad = np.einsum("ni,kij,nj->nk", samples, self.precisions, samples)
        return np.argmax(self.log_weights - 0.5 * quad, axis=1)


def gaussian_mixture_target(weights, covs) -> GaussianMixtureTarget:
    return GaussianMixtureTarget(weights, covs)


class QuadraticTarget(Target):
    """``U = x' A x / 2`` for symmetric (not necessarily definite) ``A``."""

    exact_density = False

    def __init__(self, A):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[0] != A.shape[1] or not np.allclose(A, A.T):
            raise ValidationError("A must be symmetric")
        self.A = A
        self.dim = A.shape[0]

    def potential(self, x):
        return 0.5 * float(x @ self.A @ x)

    def gradient(self, x):
        return self.A @ x


def quadratic_target(A) -> QuadraticTarget:
    return QuadraticTarget(A)


class FreeParticle(Target):
    """Zero potential; useful for integrator checks."""

    exact_density = False

    def __init__(self, dim: int = 1):
        self.dim = dim

    def potential(self, x):
        return 0.0

    def gradient(self, x):
        return np.zeros(self.dim)
