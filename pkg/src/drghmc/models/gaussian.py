"""Gaussian targets: iid standard normal and the banded-correlation normal.

The correlated variant has zero mean and covariance Sigma_ij = rho^|i-j|,
i.e. strong correlation between adjacent coordinates decaying with
distance.  Both are exactly sampleable, which makes them useful as
stationarity oracles as well as benchmark posteriors.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .base import Model

LOG_2PI = math.log(2.0 * math.pi)


class StandardGaussian(Model):
    def __init__(self, dim: int = 1):
        super().__init__("gaussian", dim)

    def log_density(self, theta) -> float:
        theta = self._check(theta)
        return float(-0.5 * np.sum(theta * theta) - 0.5 * self.dim * LOG_2PI)

    def grad_log_density(self, theta) -> np.ndarray:
        return -self._check(theta)

    def sample(self, count: int, rng) -> np.ndarray:
        return rng.standard_normal((count, self.dim))


def banded_covariance(dim: int, rho: float) -> np.ndarray:
    idx = np.arange(dim)
    return rho ** np.abs(idx[:, None] - idx[None, :]) if rho != 0.0 else np.eye(dim)


class CorrelatedGaussian(Model):
    """Zero-mean multivariate normal with Sigma_ij = rho^|i-j|."""

    def __init__(self, dim: int, rho: float, name: str | None = None):
        if not 0.0 <= rho < 1.0:
            raise ValueError("correlation rho must lie in [0, 1)")
        super().__init__(name or f"gaussian_rho", dim)
        self.rho = float(rho)
        cov = banded_covariance(dim, self.rho)
        self._chol = np.linalg.cholesky(cov)
        self._cho = cho_factor(cov, lower=True)
        self._log_det = 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    def log_density(self, theta) -> float:
        theta = self._check(theta)
        if not np.all(np.isfinite(theta)):
            return float("nan")
        white = solve_triangular(self._chol, theta, lower=True)
        return float(
            -0.5 * np.sum(white * white) - 0.5 * self._log_det - 0.5 * self.dim * LOG_2PI
        )

    def grad_log_density(self, theta) -> np.ndarray:
        theta = self._check(theta)
        if not np.all(np.isfinite(theta)):
            return np.full(self.dim, np.nan)
        return -cho_solve(self._cho, theta)

    def sample(self, count: int, rng) -> np.ndarray:
        return rng.standard_normal((count, self.dim)) @ self._chol.T


def make_normal100(rho: float) -> CorrelatedGaussian:
    if not 0.0 < rho < 1.0:
        raise ValueError("normal100 requires rho strictly inside (0, 1)")
    return CorrelatedGaussian(100, rho, name="normal100")
