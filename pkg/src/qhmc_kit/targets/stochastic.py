"""Minibatch potentials ``U~(x) = mean_{i in batch} U_i(x)``."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..core import ValidationError
from .base import Target

RecordFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


class StochasticTarget(Target):
    """Full potential ``U = mean_i U_i`` plus unbiased minibatch estimates.

    ``record_potential(x, idx)`` returns the losses of records ``idx`` and
    ``record_gradient(x, idx)`` their gradients stacked as ``(len(idx), d)``.
    Batches are drawn by the caller's generator, uniformly without
    replacement.
    """

    def __init__(self, record_potential: RecordFn, record_gradient: RecordFn,
                 n_records: int, batch_size: int, dim: int):
        if not 1 <= batch_size <= n_records:
            raise ValidationError(f"batch size must be in [1, {n_records}], got {batch_size}")
        self.record_potential = record_potential
        self.record_gradient = record_gradient
        self.n_records = n_records
        self.batch_size = batch_size
        self.dim = dim
        self._all = np.arange(n_records)

    def sample_batch(self, rng: np.random.Generator) -> np.ndarray:
        if self.batch_size == self.n_records:
            return self._all
        return rng.choice(self.n_records, size=self.batch_size, replace=False)

    def minibatch_potential(self, x, batch) -> float:
        return float(np.mean(self.record_potential(x, batch)))

    def minibatch_gradient(self, x, batch) -> np.ndarray:
        return np.mean(self.record_gradient(x, batch), axis=0)

    def potential(self, x):
        return self.minibatch_potential(x, self._all)

    def gradient(self, x):
        return self.minibatch_gradient(x, self._all)


def to_stochastic(record_potential: RecordFn, record_gradient: RecordFn, n_records: int,
                  batch_size: int, dim: int) -> StochasticTarget:
    return StochasticTarget(record_potential, record_gradient, n_records, batch_size, dim)


def gaussian_records(centers, batch_size: int) -> StochasticTarget:
    """Records ``U_i(x) = |x - c_i|**2 / 2``.

    The full potential is ``|x - mean(c)|**2 / 2 + const``: a unit-variance
    Gaussian centred at the mean of ``centers``. Minibatches see a shifted
    centre, which is the gradient noise the thermostat has to absorb.
    """
    centers = np.asarray(centers, dtype=float)
    if centers.ndim == 1:
        centers = centers[:, None]

    def record_potential(x, idx):
        diff = x - centers[idx]
        return 0.5 * np.sum(diff * diff, axis=1)

    def record_gradient(x, idx):
        return x - centers[idx]

    return StochasticTarget(record_potential, record_gradient, centers.shape[0],
                            batch_size, centers.shape[1])
