"""Target interface, finite-difference gradient oracle and 1-D references."""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate


class Target:
    """Potential energy ``U(x) = -log p(x)`` up to a constant.

    Subclasses set ``dim`` and implement ``potential`` and ``gradient``.
    1-D targets with a tractable normalizer also implement ``reference``,
    returning an object with a vectorised ``ppf`` (quantile function).
    """

    dim: int = 1
    #: whether exp(-U) is a normalisable density we can compare samples to
    exact_density: bool = True

    def potential(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def reference(self):
        return None


def sign(x):
    """Sign with sign(0) = +1."""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


class FDCheck(NamedTuple):
    max_error: float
    errors: np.ndarray
    analytic: np.ndarray
    numeric: np.ndarray


def finite_diff_check(target: Target, x, h: float = 1e-5) -> FDCheck:
    """Compare ``target.gradient`` to central differences of ``target.potential``.

    The per-coordinate error is ``|g - g_fd| / max(|g|, |g_fd|, 1)``, i.e.
    relative for large components and absolute below one.
    """
    x = np.asarray(x, dtype=float)
    analytic = np.asarray(target.gradient(x), dtype=float)
    numeric = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        numeric[k] = (target.potential(x + e) - target.potential(x - e)) / (2 * h)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1.0)
    errors = np.abs(analytic - numeric) / scale
    return FDCheck(float(errors.max()), errors, analytic, numeric)


class QuadratureReference:
    """Normalised 1-D density ``exp(-U)`` tabulated by quadrature.

    The CDF is built with cumulative Simpson integration on a grid that
    is refined between consecutive ``breakpoints``; ``ppf`` inverts it by
    linear interpolation.
    """

    def __init__(
        self,
        potential: Callable[[np.ndarray], np.ndarray],
        lo: float,
        hi: float,
        breakpoints: Sequence[float] = (),
        points_per_segment: int = 20001,
    ):
        knots = sorted({lo, hi, *[b for b in breakpoints if lo < b < hi]})
        pieces = [np.linspace(a, b, points_per_segment) for a, b in zip(knots[:-1], knots[1:])]
        grid = np.unique(np.concatenate(pieces))
        u = potential(grid)
        w = np.exp(-(u - u.min()))
        cdf = integrate.cumulative_simpson(w, x=grid, initial=0.0)
        cdf = np.maximum.accumulate(np.clip(cdf, 0.0, None))
        self.log_norm = float(np.log(cdf[-1]) - u.min())
        self.grid = grid
        self.cdf_values = cdf / cdf[-1]
        self.pdf_values = w / cdf[-1]

    def cdf(self, x):
        return np.interp(x, self.grid, self.cdf_values)

    def pdf(self, x):
        return np.interp(x, self.grid, self.pdf_values, left=0.0, right=0.0)

    def ppf(self, u):
        return np.interp(u, self.cdf_values, self.grid)

    def mean(self):
        return float(integrate.trapezoid(self.grid * self.pdf_values, self.grid))

    def var(self):
        m = self.mean()
        return float(integrate.trapezoid((self.grid - m) ** 2 * self.pdf_values, self.grid))
