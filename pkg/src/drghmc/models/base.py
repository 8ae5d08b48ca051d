"""Target density interface.

Every bundled target lives on the unconstrained scale R^D and returns a
fully normalized log density, so density differences agree exactly across
implementations.  Constrained parameters (scales, correlations) enter
through log or atanh transforms with the Jacobian terms folded into the
log density.  Instances are immutable after construction and safe to read
from many chains at once.
"""

from __future__ import annotations

import numpy as np


class Model:
    """A target density exposing log pi, its gradient, and metadata."""

    unconstrained = True

    def __init__(self, name: str, dim: int, param_names=None):
        if dim < 1:
            raise ValueError("model dimension must be a positive integer")
        self.name = str(name)
        self.dim = int(dim)
        if param_names is None:
            param_names = [f"theta_{i + 1}" for i in range(self.dim)]
        if len(param_names) != self.dim:
            raise ValueError("param_names length must equal the model dimension")
        self.param_names = list(param_names)

    def _check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,):
            raise ValueError(
                f"{self.name}: expected a parameter vector of length {self.dim}, "
                f"got shape {theta.shape}"
            )
        return theta

    def log_density(self, theta) -> float:
        raise NotImplementedError

    def grad_log_density(self, theta) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, dim={self.dim})"


def half_cauchy_log_density(value: float, scale: float) -> float:
    """log density of a scale parameter with a half-Cauchy(0, scale) prior."""
    return np.log(2.0 / (np.pi * scale)) - np.log1p((value / scale) ** 2)


def half_cauchy_grad_unconstrained(value: float, scale: float) -> float:
    """d/dx of [half-Cauchy log density + Jacobian] where value = exp(x)."""
    v2 = value * value
    return 1.0 - 2.0 * v2 / (scale * scale + v2)
