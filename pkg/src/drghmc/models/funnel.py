"""Funnel-shaped hierarchical density.

theta[0] = x is a log scale with x ~ normal(0, 3); the remaining D-1
coordinates are latents y_i ~ normal(0, exp(x / 2)).  The neck (x << 0)
has curvature growing like exp(-x) while the mouth (x >> 0) is nearly
flat, so no single leapfrog step size can serve both regions.  The
density factorizes, which makes exact reference draws and the analytic
Hessian cheap.
"""

from __future__ import annotations

import math

import numpy as np

from .base import Model

LOG_2PI = math.log(2.0 * math.pi)

SCALE_SD = 3.0


class Funnel(Model):
    def __init__(self, dim: int = 10):
        if dim < 2:
            raise ValueError("funnel needs at least one latent coordinate (dim >= 2)")
        names = ["x"] + [f"y_{i + 1}" for i in range(dim - 1)]
        super().__init__("funnel", dim, names)

    def log_density(self, theta) -> float:
        theta = self._check(theta)
        x, y = theta[0], theta[1:]
        n = self.dim - 1
        lp = -0.5 * (x / SCALE_SD) ** 2 - math.log(SCALE_SD) - 0.5 * LOG_2PI
        lp += -0.5 * np.sum(y * y) * np.exp(-x) - 0.5 * n * x - 0.5 * n * LOG_2PI
        return float(lp)

    def grad_log_density(self, theta) -> np.ndarray:
        theta = self._check(theta)
        x, y = theta[0], theta[1:]
        n = self.dim - 1
        e = np.exp(-x)
        grad = np.empty(self.dim)
        grad[0] = -x / SCALE_SD**2 - 0.5 * n + 0.5 * np.sum(y * y) * e
        grad[1:] = -y * e
        return grad

    def hessian_neg_log_density(self, theta) -> np.ndarray:
        """Hessian of -log pi, analytic; used for the condition-number field."""
        theta = self._check(theta)
        x, y = theta[0], theta[1:]
        e = np.exp(-x)
        hess = np.zeros((self.dim, self.dim))
        hess[0, 0] = 1.0 / SCALE_SD**2 + 0.5 * np.sum(y * y) * e
        hess[0, 1:] = -y * e
        hess[1:, 0] = -y * e
        idx = np.arange(1, self.dim)
        hess[idx, idx] = e
        return hess

    def sample(self, count: int, rng) -> np.ndarray:
        """Exact iid draws by the generative recipe, shape (count, D)."""
        x = SCALE_SD * rng.standard_normal(count)
        y = np.exp(0.5 * x)[:, None] * rng.standard_normal((count, self.dim - 1))
        return np.column_stack([x, y])


def embed_grid_point(x: float, y: float, dim: int = 10) -> np.ndarray:
    """Lift a planar (x, y) coordinate to a D-vector by repeating y."""
    theta = np.full(dim, float(y))
    theta[0] = float(x)
    return theta
