"""Pilot tuning of the reference step size.

Without an external auto-tuner the experiments need a sensible base step
size per model.  A short pilot measures the mean one-step Metropolis
acceptance rate at a set of probe points and bisects on log step size
until the rate hits a target (~0.8 by default).  Experiment configs then
scale this reference value by a factor c.  Pilot gradient work is counted
separately from any benchmark budget.
"""

from __future__ import annotations

import math

import numpy as np

from .integrator import MassMatrix, PhasePoint, flip_leapfrog, hamiltonian
from .samplers import _CountingModel


def pilot_points(model, reference=None, count: int = 64, seed: int = 0) -> np.ndarray:
    """Probe positions: reference draws when available, else jittered origin."""
    rng = np.random.default_rng([seed, 0x9E37])
    if reference is not None:
        draws = reference.draws
        idx = rng.integers(0, draws.shape[0], size=count)
        return draws[idx]
    return 0.1 * rng.standard_normal((count, model.dim))


def mean_onestep_accept(model, points, step_size, mass, rng) -> float:
    """Average one-leapfrog acceptance probability over probe points."""
    total = 0.0
    for theta in points:
        rho = mass.sqrt_diag * rng.standard_normal(model.dim)
        z = PhasePoint(np.asarray(theta, dtype=float), rho)
        y, divergent = flip_leapfrog(model, z, step_size, 1, mass)
        if divergent:
            continue
        h0 = hamiltonian(model, z, mass)
        h1 = hamiltonian(model, y, mass)
        if math.isfinite(h1) and math.isfinite(h0):
            total += math.exp(min(0.0, h0 - h1))
    return total / len(points)


def reference_step_size(
    model,
    points=None,
    mass: MassMatrix | None = None,
    seed: int = 0,
    target: float = 0.8,
    bisections: int = 24,
):
    """Bisect on log step size for the target one-step acceptance rate.

    Returns ``(step_size, gradient_evals)``; the second value is the pilot
    cost to report alongside (never against) a benchmark budget.
    """
    if points is None:
        points = pilot_points(model, seed=seed)
    mass = mass if mass is not None else MassMatrix.identity(model.dim)
    counting = _CountingModel(model)
    root = np.random.SeedSequence([seed, 0x51ED])
    streams = iter(root.spawn(bisections + 128))

    def rate(eps):
        return mean_onestep_accept(counting, points, eps, mass, np.random.default_rng(next(streams)))

    lo, hi = None, None
    eps = 1.0
    for _ in range(40):
        if rate(eps) >= target:
            lo = eps
            eps *= 2.0
            if rate(eps) < target:
                hi = eps
                break
        else:
            hi = eps
            eps *= 0.5
            if rate(eps) >= target:
                lo = eps
                break
        if eps > 1e6 or eps < 1e-8:
            break
    if lo is None:
        return max(eps, 1e-8), counting.grad_evals
    if hi is None:
        return min(eps, 1e6), counting.grad_evals
    for _ in range(bisections):
        mid = math.sqrt(lo * hi)
        if rate(mid) >= target:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi), counting.grad_evals


def pilot_mass_diag(model, step_size, seed: int = 0, iterations: int = 2000):
    """Diagonal mass from the inverse variances of a short one-step pilot.

    Crude by design: the paper-style experiments either use the identity
    or a diagonal tuned elsewhere, and this stands in for the latter.
    Returns ``(MassMatrix, gradient_evals)``.
    """
    from .samplers import DrHmcConfig, run_chain

    cfg = DrHmcConfig(max_proposals=1, step_size=step_size, steps=1, seed=seed)
    rng = np.random.default_rng([seed, 0xA55])
    init = 0.1 * rng.standard_normal(model.dim)
    result = run_chain(model, "hmc", cfg, init, 2 * iterations)
    tail = result.draws[result.draws.shape[0] // 2 :]
    var = np.clip(tail.var(axis=0), 1e-6, 1e6)
    return MassMatrix(1.0 / var), result.grad_evals
