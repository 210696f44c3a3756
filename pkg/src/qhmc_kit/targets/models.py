"""Bridge regression and robust low-rank image factorisation posteriors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ValidationError
from .base import Target, sign
from .synthetic import DEFAULT_EPS0, lp_gradient


class BridgeTarget(Target):
    """``U(b) = mu/(2n) |y - X b|**2 + lam * sum |b_j|**p`` over training rows."""

    exact_density = False

    def __init__(self, X, y, mu: float, lam: float, p: float = 0.5, eps0: float = DEFAULT_EPS0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[0] != y.size:
            raise ValidationError("X must be (n, k) with len(y) == n")
        if not 0 < p <= 1:
            raise ValidationError("p must lie in (0, 1]")
        if mu <= 0 or lam < 0:
            raise ValidationError("need mu > 0 and lam >= 0")
        self.X, self.y = X, y
        self.n, self.dim = X.shape
        self.mu, self.lam, self.p, self.eps0 = mu, lam, p, eps0

    def _check(self, beta):
        if beta.shape != (self.dim,):
            raise ValidationError(f"beta must have shape ({self.dim},), got {beta.shape}")

    def potential(self, beta):
        self._check(beta)
        r = self.y - self.X @ beta
        return self.mu / (2 * self.n) * float(r @ r) + self.lam * float(np.sum(np.abs(beta) ** self.p))

    def gradient(self, beta):
        self._check(beta)
        r = self.y - self.X @ beta
        g = -(self.mu / self.n) * (self.X.T @ r)
        if self.lam:
            g = g + lp_gradient(beta, self.p, self.lam, self.eps0)
        return g


def bridge_target(data, mu: float, lam: float, p: float = 0.5, eps0: float = DEFAULT_EPS0) -> BridgeTarget:
    return BridgeTarget(data.X_train, data.y_train, mu, lam, p, eps0)


@dataclass
class FactorizationState:
    A: np.ndarray
    B: np.ndarray
    S: np.ndarray

    @property
    def rank(self):
        return self.A.shape[1]

    def low_rank(self):
        return self.A @ self.B


class DenoiseTarget(Target):
    """Robust factorisation ``Y ~ A B + S`` with an lp prior on outliers ``S``.

    ``U = mu/2 |Y - AB - S|_F**2 + lam1/2 (|A|_F**2 + |B|_F**2) + lam2 |S|_p**p``.

    The sampler state is one flat vector: ``A`` row-major, then ``B``
    row-major, then ``S`` row-major.
    """

    exact_density = False

    def __init__(self, Y, mu=100.0, lam1=1.0, lam2=10.0, p0=0.5, eps0=DEFAULT_EPS0, rank=20):
        Y = np.asarray(Y, dtype=float)
        rows, cols = Y.shape
        if not 1 <= rank <= min(rows, cols):
            raise ValidationError(f"rank must be in [1, {min(rows, cols)}], got {rank}")
        self.Y = Y
        self.rows, self.cols, self.rank = rows, cols, rank
        self.mu, self.lam1, self.lam2, self.p0, self.eps0 = mu, lam1, lam2, p0, eps0
        self._na = rows * rank
        self._nb = rank * cols
        self.dim = self._na + self._nb + rows * cols

    def unpack(self, x) -> FactorizationState:
        A = x[: self._na].reshape(self.rows, self.rank)
        B = x[self._na : self._na + self._nb].reshape(self.rank, self.cols)
        S = x[self._na + self._nb :].reshape(self.rows, self.cols)
        return FactorizationState(A, B, S)

    def pack(self, state: FactorizationState) -> np.ndarray:
        return np.concatenate([state.A.ravel(), state.B.ravel(), state.S.ravel()])

    def potential(self, x):
        s = self.unpack(x)
        R = self.Y - s.A @ s.B - s.S
        return (0.5 * self.mu * float(np.sum(R * R))
                + 0.5 * self.lam1 * (float(np.sum(s.A * s.A)) + float(np.sum(s.B * s.B)))
                + self.lam2 * float(np.sum(np.abs(s.S) ** self.p0)))

    def gradient(self, x):
        s = self.unpack(x)
        E = s.A @ s.B + s.S - self.Y
        gA = self.mu * E @ s.B.T + self.lam1 * s.A
        gB = self.mu * s.A.T @ E + self.lam1 * s.B
        gS = self.mu * E + self.lam2 * self.p0 / (np.abs(s.S) ** (1 - self.p0) + self.eps0) * sign(s.S)
        return np.concatenate([gA.ravel(), gB.ravel(), gS.ravel()])

    def svd_init(self, image=None) -> np.ndarray:
        """``A = U_r sqrt(S_r)``, ``B = sqrt(S_r) V_r'``, ``S = 0``."""
        Y = self.Y if image is None else np.asarray(image, dtype=float)
        U, sv, Vt = np.linalg.svd(Y, full_matrices=False)
        root = np.sqrt(sv[: self.rank])
        A = U[:, : self.rank] * root
        B = root[:, None] * Vt[: self.rank]
        return self.pack(FactorizationState(A, B, np.zeros_like(Y)))


def denoise_target(Y, mu=100.0, lam1=1.0, lam2=10.0, p0=0.5, eps0=DEFAULT_EPS0, r=20) -> DenoiseTarget:
    return DenoiseTarget(Y, mu, lam1, lam2, p0, eps0, r)
