"""Leapfrog integration and momentum flips on phase space.

The augmented state is a phase point (theta, rho) in R^{2D} with a diagonal
mass matrix M.  The Hamiltonian is

    H(theta, rho) = 0.5 * rho' M^{-1} rho - log pi(theta)

and one leapfrog step is the usual kick-drift-kick update.  Composing n
leapfrog steps with a terminal momentum flip gives a volume-preserving
involution, which is the structural property the staged acceptance
machinery relies on.  Non-finite intermediates never raise: they mark the
result as divergent and the caller decides what a divergence means.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


class PhasePoint(NamedTuple):
    """Position and momentum, both length-D float vectors."""

    theta: np.ndarray
    rho: np.ndarray

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.rho)))


def phase_point(theta, rho) -> PhasePoint:
    return PhasePoint(np.asarray(theta, dtype=float), np.asarray(rho, dtype=float))


class MassMatrix:
    """Diagonal positive mass matrix with cached inverse and square root.

    A length-1 diagonal broadcasts over any dimension, so ``MassMatrix(4.0)``
    works for a scalar problem and ``MassMatrix(np.ones(D))`` for vectors.
    """

    def __init__(self, diag):
        diag = np.atleast_1d(np.asarray(diag, dtype=float))
        if diag.ndim != 1 or diag.size == 0:
            raise ValueError("mass matrix diagonal must be a 1-d vector")
        if not np.all(np.isfinite(diag)) or np.any(diag <= 0.0):
            raise ValueError("mass matrix entries must be positive and finite")
        self.diag = diag
        self.inv_diag = 1.0 / diag
        self.sqrt_diag = np.sqrt(diag)

    @classmethod
    def identity(cls, dim: int) -> "MassMatrix":
        return cls(np.ones(int(dim)))

    def __repr__(self):
        return f"MassMatrix(diag={self.diag!r})"


def kinetic_energy(rho: np.ndarray, mass: MassMatrix) -> float:
    return 0.5 * float(np.sum(rho * rho * mass.inv_diag))


def momentum_log_density(rho: np.ndarray, mass: MassMatrix) -> float:
    """Normalized log density of normal(rho | 0, M)."""
    d = rho.shape[0]
    log_det = float(np.sum(np.log(mass.diag))) * (d if mass.diag.size == 1 else 1)
    return -kinetic_energy(rho, mass) - 0.5 * log_det - 0.5 * d * LOG_2PI


def hamiltonian(model, z: PhasePoint, mass: MassMatrix) -> float:
    """Kinetic plus potential energy; excludes the momentum normalizer.

    May return inf or nan when evaluated at a divergent point; callers in
    the sampling path coerce that to a rejected proposal.
    """
    return kinetic_energy(z.rho, mass) - float(model.log_density(z.theta))


def gibbs_log_density(model, z: PhasePoint, mass: MassMatrix) -> float:
    """Fully normalized log density of the joint (theta, rho) target."""
    return float(model.log_density(z.theta)) + momentum_log_density(z.rho, mass)


def flip(z: PhasePoint) -> PhasePoint:
    """Negate the momentum, leaving the position untouched."""
    return PhasePoint(z.theta, -z.rho)


def leapfrog(model, z: PhasePoint, step_size: float, mass: MassMatrix):
    """One kick-drift-kick step.

    Returns ``(point, divergent)``.  A divergent step carries the offending
    (possibly non-finite) point; the second gradient evaluation is skipped
    once the drift has already left the finite range.
    """
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        rho_half = z.rho + (0.5 * step_size) * model.grad_log_density(z.theta)
        theta = z.theta + step_size * (mass.inv_diag * rho_half)
        if not np.all(np.isfinite(theta)):
            return PhasePoint(theta, rho_half), True
        rho = rho_half + (0.5 * step_size) * model.grad_log_density(theta)
    out = PhasePoint(theta, rho)
    return out, not out.is_finite()


def leapfrog_trajectory(model, z: PhasePoint, step_size: float, n_steps: int, mass: MassMatrix):
    """n independent single steps; stops early at the first divergence.

    Each step pays both of its gradient evaluations, which is the cost
    accounting the budgets use everywhere.
    """
    cur = z
    for _ in range(int(n_steps)):
        cur, divergent = leapfrog(model, cur, step_size, mass)
        if divergent:
            return cur, True
    return cur, False


def flip_leapfrog(model, z: PhasePoint, step_size: float, n_steps: int, mass: MassMatrix):
    """The proposal primitive: n leapfrog steps, then a momentum flip."""
    out, divergent = leapfrog_trajectory(model, z, step_size, n_steps, mass)
    return flip(out), divergent
