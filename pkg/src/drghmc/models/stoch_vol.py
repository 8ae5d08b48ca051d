"""Stochastic volatility posterior on mean-corrected asset returns.

Latent log volatilities h_t follow a stationary AR(1) process with mean mu,
persistence phi in (-1, 1), and innovation scale sigma; observed returns
are y_t ~ normal(0, exp(h_t / 2)).  Priors: mu ~ Cauchy(0, 10),
sigma ~ half-Cauchy(0, 5), phi ~ uniform(-1, 1).  The unconstrained
parameterization is (mu, log sigma, atanh phi, h_1..h_T) with the two
Jacobian terms included, giving dimension 3 + T.
"""

from __future__ import annotations

import math

import numpy as np

from .base import Model, half_cauchy_grad_unconstrained, half_cauchy_log_density

LOG_2PI = math.log(2.0 * math.pi)

SIGMA_PRIOR_SCALE = 5.0
MU_PRIOR_SCALE = 10.0


class StochasticVolatility(Model):
    def __init__(self, returns):
        returns = np.asarray(returns, dtype=float)
        if returns.ndim != 1 or returns.size < 2:
            raise ValueError("returns must be a 1-d array with at least two entries")
        t = returns.size
        names = ["mu", "log_sigma", "atanh_phi"] + [f"log_vol_{i + 1}" for i in range(t)]
        super().__init__("stoch_vol", 3 + t, names)
        self.returns = returns
        self._y_sq = returns * returns

    def _unpack(self, theta):
        mu, xi, psi = theta[0], theta[1], theta[2]
        h = theta[3:]
        sigma = np.exp(xi)
        phi = np.tanh(psi)
        return mu, xi, sigma, phi, h

    def log_density(self, theta) -> float:
        theta = self._check(theta)
        mu, xi, sigma, phi, h = self._unpack(theta)
        t = h.size
        s2 = sigma * sigma
        v = 1.0 - phi * phi

        lp = -math.log(MU_PRIOR_SCALE * math.pi) - np.log1p((mu / MU_PRIOR_SCALE) ** 2)
        lp += half_cauchy_log_density(sigma, SIGMA_PRIOR_SCALE) + xi
        lp += -math.log(2.0) + np.log(v)  # uniform(-1,1) plus atanh Jacobian

        e1 = h[0] - mu
        lp += -0.5 * LOG_2PI - (xi - 0.5 * np.log(v)) - 0.5 * e1 * e1 * v / s2
        e = h[1:] - mu - phi * (h[:-1] - mu)
        lp += (t - 1) * (-0.5 * LOG_2PI - xi) - 0.5 * np.sum(e * e) / s2

        lp += np.sum(-0.5 * LOG_2PI - 0.5 * h - 0.5 * self._y_sq * np.exp(-h))
        return float(lp)

    def grad_log_density(self, theta) -> np.ndarray:
        theta = self._check(theta)
        mu, xi, sigma, phi, h = self._unpack(theta)
        t = h.size
        s2 = sigma * sigma
        v = 1.0 - phi * phi

        e1 = h[0] - mu
        e = h[1:] - mu - phi * (h[:-1] - mu)

        grad = np.empty(self.dim)
        grad[0] = -2.0 * mu / (MU_PRIOR_SCALE**2 + mu * mu)
        grad[0] += e1 * v / s2 + (1.0 - phi) * np.sum(e) / s2

        grad[1] = half_cauchy_grad_unconstrained(sigma, SIGMA_PRIOR_SCALE)
        grad[1] += -1.0 + e1 * e1 * v / s2
        grad[1] += -(t - 1) + np.sum(e * e) / s2

        grad[2] = -3.0 * phi + (v / s2) * (phi * e1 * e1 + np.sum(e * (h[:-1] - mu)))

        gh = -0.5 + 0.5 * self._y_sq * np.exp(-h)
        gh[0] += -e1 * v / s2
        gh[1:] += -e / s2
        gh[:-1] += phi * e / s2
        grad[3:] = gh
        return grad
