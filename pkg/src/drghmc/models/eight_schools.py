"""Hierarchical school-effects posterior, centered parameterization.

Data are per-school effect estimates y_i with standard errors sigma_i.
The generative model places theta_i ~ normal(mu, tau) with mu ~ normal(0, 5)
and tau ~ half-Cauchy(0, 5).  The population mean mu is a normal-normal
conjugate coordinate, so it is integrated out analytically, leaving the
exact 9-dimensional marginal posterior over (tau, theta_1..theta_8):

    theta | tau ~ normal(0, tau^2 I + 25 * 11')

whose inverse and determinant come from the rank-one update formulas.
tau is sampled on the log scale with its Jacobian term included.  The
coupling between tau and the spread of the theta_i is what gives this
posterior its funnel-like multiscale geometry.
"""

from __future__ import annotations

import math

import numpy as np

from .base import Model, half_cauchy_grad_unconstrained, half_cauchy_log_density

LOG_2PI = math.log(2.0 * math.pi)

TAU_PRIOR_SCALE = 5.0
MU_PRIOR_VAR = 25.0


class EightSchools(Model):
    def __init__(self, y, sigma):
        y = np.asarray(y, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        if y.shape != sigma.shape or y.ndim != 1:
            raise ValueError("y and sigma must be 1-d arrays of equal length")
        if np.any(sigma <= 0):
            raise ValueError("school standard errors must be positive")
        n = y.size
        names = ["log_tau"] + [f"effect_{i + 1}" for i in range(n)]
        super().__init__("eight_schools", n + 1, names)
        self.y = y
        self.sigma = sigma
        self._sigma_sq = sigma * sigma

    def _marginal_pieces(self, xi: float, theta: np.ndarray):
        n = self.y.size
        a = np.exp(2.0 * xi)  # tau^2
        denom = a + n * MU_PRIOR_VAR
        s = np.sum(theta)
        prec_theta = theta / a - (MU_PRIOR_VAR * s / (a * denom)) * np.ones(n)
        quad = np.sum(theta * theta) / a - MU_PRIOR_VAR * s * s / (a * denom)
        log_det = (n - 1) * np.log(a) + np.log(denom)
        return a, denom, prec_theta, quad, log_det

    def log_density(self, theta) -> float:
        theta = self._check(theta)
        xi, effects = theta[0], theta[1:]
        n = effects.size
        a, _, _, quad, log_det = self._marginal_pieces(xi, effects)
        tau = np.exp(xi)
        lp = half_cauchy_log_density(tau, TAU_PRIOR_SCALE) + xi
        lp += -0.5 * n * LOG_2PI - 0.5 * log_det - 0.5 * quad
        resid = self.y - effects
        lp += np.sum(
            -0.5 * LOG_2PI - np.log(self.sigma) - 0.5 * resid * resid / self._sigma_sq
        )
        return float(lp)

    def grad_log_density(self, theta) -> np.ndarray:
        theta = self._check(theta)
        xi, effects = theta[0], theta[1:]
        n = effects.size
        a, denom, prec_theta, _, _ = self._marginal_pieces(xi, effects)
        tau = np.exp(xi)
        grad = np.empty(self.dim)
        grad[0] = half_cauchy_grad_unconstrained(tau, TAU_PRIOR_SCALE)
        grad[0] += a * np.sum(prec_theta * prec_theta) - (n - 1) - a / denom
        grad[1:] = -prec_theta + (self.y - effects) / self._sigma_sq
        return grad
