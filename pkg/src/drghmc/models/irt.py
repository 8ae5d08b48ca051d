"""Two-parameter logistic item response posterior.

Binary correctness y_ij of student i on question j is modeled through
ability theta_i, question difficulty b_j, and a multiplicative question
discrimination a_j:

    logit P(y_ij = 1) = a_j * (theta_i - b_j)

with hierarchical priors theta ~ normal(0, sigma_theta),
log a ~ normal(0, sigma_a), b ~ normal(mu_b, sigma_b) and half-Cauchy(0, 2)
priors on the three scales.  The shared additive shift between abilities
and difficulties is only weakly identified, which is the interesting part
of this geometry.  Discriminations are parameterized by log a directly, so
the lognormal prior becomes a plain normal with no extra Jacobian; the
scales carry log-transform Jacobians.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit

from .base import Model, half_cauchy_grad_unconstrained, half_cauchy_log_density

LOG_2PI = math.log(2.0 * math.pi)

SCALE_PRIOR = 2.0
MU_B_PRIOR_SD = 5.0


class ItemResponse(Model):
    def __init__(self, responses):
        responses = np.asarray(responses, dtype=float)
        if responses.ndim != 2:
            raise ValueError("responses must be a students-by-questions matrix")
        if not np.all((responses == 0) | (responses == 1)):
            raise ValueError("responses must be binary (0/1)")
        n_students, n_questions = responses.shape
        names = (
            ["log_sigma_ability"]
            + [f"ability_{i + 1}" for i in range(n_students)]
            + ["log_sigma_disc"]
            + [f"log_disc_{j + 1}" for j in range(n_questions)]
            + ["mu_diff", "log_sigma_diff"]
            + [f"diff_{j + 1}" for j in range(n_questions)]
        )
        super().__init__("irt_2pl", len(names), names)
        self.responses = responses
        self.n_students = n_students
        self.n_questions = n_questions

    def _unpack(self, theta):
        i, j = self.n_students, self.n_questions
        xi_t = theta[0]
        ability = theta[1 : 1 + i]
        xi_a = theta[1 + i]
        log_disc = theta[2 + i : 2 + i + j]
        mu_b = theta[2 + i + j]
        xi_b = theta[3 + i + j]
        diff = theta[4 + i + j :]
        return xi_t, ability, xi_a, log_disc, mu_b, xi_b, diff

    def log_density(self, theta) -> float:
        theta = self._check(theta)
        xi_t, ability, xi_a, log_disc, mu_b, xi_b, diff = self._unpack(theta)
        i, j = self.n_students, self.n_questions
        s_t, s_a, s_b = np.exp(xi_t), np.exp(xi_a), np.exp(xi_b)

        lp = half_cauchy_log_density(s_t, SCALE_PRIOR) + xi_t
        lp += -0.5 * i * LOG_2PI - i * xi_t - 0.5 * np.sum(ability * ability) / (s_t * s_t)
        lp += half_cauchy_log_density(s_a, SCALE_PRIOR) + xi_a
        lp += -0.5 * j * LOG_2PI - j * xi_a - 0.5 * np.sum(log_disc * log_disc) / (s_a * s_a)
        lp += -0.5 * LOG_2PI - math.log(MU_B_PRIOR_SD) - 0.5 * (mu_b / MU_B_PRIOR_SD) ** 2
        lp += half_cauchy_log_density(s_b, SCALE_PRIOR) + xi_b
        resid_b = diff - mu_b
        lp += -0.5 * j * LOG_2PI - j * xi_b - 0.5 * np.sum(resid_b * resid_b) / (s_b * s_b)

        disc = np.exp(log_disc)
        eta = disc[None, :] * (ability[:, None] - diff[None, :])
        lp += float(np.sum(self.responses * eta - np.logaddexp(0.0, eta)))
        return float(lp)

    def grad_log_density(self, theta) -> np.ndarray:
        theta = self._check(theta)
        xi_t, ability, xi_a, log_disc, mu_b, xi_b, diff = self._unpack(theta)
        i, j = self.n_students, self.n_questions
        s_t, s_a, s_b = np.exp(xi_t), np.exp(xi_a), np.exp(xi_b)

        disc = np.exp(log_disc)
        eta = disc[None, :] * (ability[:, None] - diff[None, :])
        resid = self.responses - expit(eta)

        grad = np.empty(self.dim)
        grad[0] = half_cauchy_grad_unconstrained(s_t, SCALE_PRIOR)
        grad[0] += -i + np.sum(ability * ability) / (s_t * s_t)
        grad[1 : 1 + i] = -ability / (s_t * s_t) + resid @ disc
        grad[1 + i] = half_cauchy_grad_unconstrained(s_a, SCALE_PRIOR)
        grad[1 + i] += -j + np.sum(log_disc * log_disc) / (s_a * s_a)
        grad[2 + i : 2 + i + j] = -log_disc / (s_a * s_a) + np.sum(resid * eta, axis=0)
        resid_b = diff - mu_b
        grad[2 + i + j] = -mu_b / MU_B_PRIOR_SD**2 + np.sum(resid_b) / (s_b * s_b)
        grad[3 + i + j] = half_cauchy_grad_unconstrained(s_b, SCALE_PRIOR)
        grad[3 + i + j] += -j + np.sum(resid_b * resid_b) / (s_b * s_b)
        grad[4 + i + j :] = -resid_b / (s_b * s_b) - disc * np.sum(resid, axis=0)
        return grad
