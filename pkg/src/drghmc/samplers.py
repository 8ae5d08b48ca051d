"""Sampler engines built around staged proposals with delayed rejection.

Four kernels share the machinery:

    drghmc   partial momentum refresh, one leapfrog step per stage, step
             size shrinking geometrically across stages
    drhmc    full refresh, multi-step trajectories whose length tau stays
             fixed while the per-stage step size shrinks
    ghmc     drghmc restricted to a single stage
    hmc      full refresh, one trajectory, one Metropolis test

A stage-k proposal applies the map F_k (leapfrog then flip, an involution).
When stage k is reached after k-1 rejections, its acceptance probability
multiplies the joint-density ratio by, for every earlier stage i, the
probability of rejecting stage i from the *proposed* point (the ghost
states, which need fresh integrator work) over the probability of
rejecting stage i from the current point (already sitting on the
rejection stack from the forward pass).  Everything runs in log space;
divergent proposals get probability zero instead of aborting the chain.

The number of fresh map applications needed when an iteration reaches
stage k is exactly 2^k - 1, so budgets are dominated by the rare
deep-stage iterations in difficult regions.

RNG discipline: each chain owns one generator; a momentum refresh consumes
D normals, each stage's accept test consumes one uniform in stage order,
and ghost evaluations are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .integrator import (
    MassMatrix,
    PhasePoint,
    flip,
    flip_leapfrog,
    hamiltonian,
)

# A rejected stage must keep (1 - alpha) strictly positive; below this the
# balance correction is numerically meaningless, so the proposal is dropped
# and a diagnostic counter is bumped.
MIN_REJECTION_PROB = 1e-15
_GUARD_LOG = math.log(MIN_REJECTION_PROB)


def log1mexp(log_a: float) -> float:
    """log(1 - exp(log_a)) for log_a <= 0, stable near both endpoints."""
    if log_a >= 0.0:
        return -math.inf
    if log_a > -math.log(2.0):
        return math.log(-math.expm1(log_a))
    return math.log1p(-math.exp(log_a))


@dataclass(frozen=True)
class DrGhmcConfig:
    """Hyperparameters of the delayed rejection generalized HMC kernel.

    max_proposals  most stages attempted per iteration (K >= 1)
    damping        fraction of momentum variance refreshed per iteration,
                   in (0, 1]; 1 recovers full refresh
    step_size      stage-1 leapfrog step size
    reduction      geometric step-size reduction factor between stages (> 1)
    first_steps    leapfrog steps for stage 1 (later stages always use 1)
    mass           diagonal mass matrix; None means identity
    seed           base RNG seed for a chain using this config
    """

    max_proposals: int = 3
    damping: float = 0.08
    step_size: float = 1.0
    reduction: float = 4.0
    first_steps: int = 1
    mass: Optional[MassMatrix] = None
    seed: int = 0

    def __post_init__(self):
        if self.max_proposals < 1:
            raise ValueError("max_proposals must be at least 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.step_size <= 0.0:
            raise ValueError("step_size must be positive")
        if self.reduction <= 1.0:
            raise ValueError("reduction factor must exceed 1")
        if self.first_steps < 1:
            raise ValueError("first_steps must be at least 1")


@dataclass(frozen=True)
class DrHmcConfig:
    """Hyperparameters of the delayed rejection HMC kernel.

    The trajectory length tau = steps * step_size is held fixed across
    stages, so stage k runs round(tau / eps_k) leapfrog steps at step size
    eps_k = step_size / reduction^(k-1).  Momentum is fully refreshed.
    """

    max_proposals: int = 3
    step_size: float = 1.0
    reduction: float = 4.0
    steps: int = 10
    trajectory_length: Optional[float] = None
    mass: Optional[MassMatrix] = None
    seed: int = 0

    def __post_init__(self):
        if self.max_proposals < 1:
            raise ValueError("max_proposals must be at least 1")
        if self.step_size <= 0.0:
            raise ValueError("step_size must be positive")
        if self.reduction <= 1.0:
            raise ValueError("reduction factor must exceed 1")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.trajectory_length is not None and self.trajectory_length <= 0.0:
            raise ValueError("trajectory_length must be positive")

    @property
    def tau(self) -> float:
        if self.trajectory_length is not None:
            return self.trajectory_length
        return self.steps * self.step_size


def stage_step_size(cfg, k: int) -> float:
    """eps_k = eps / r^(k-1)."""
    if not 1 <= k <= cfg.max_proposals:
        raise ValueError(f"stage {k} outside 1..{cfg.max_proposals}")
    return cfg.step_size / cfg.reduction ** (k - 1)


def stage_steps(cfg, k: int) -> int:
    """Leapfrog steps for stage k: constant-tau for DR-HMC, one otherwise."""
    if isinstance(cfg, DrHmcConfig):
        return max(1, round(cfg.tau / stage_step_size(cfg, k)))
    return cfg.first_steps if k == 1 else 1


@dataclass
class ProposalRecord:
    """One delayed rejection stage, kept for the current iteration only."""

    stage: int
    step_size: float
    proposal: PhasePoint
    accept_prob: float
    divergent: bool
    grad_evals: int


@dataclass
class IterationOutcome:
    """Next state plus the per-stage audit trail of one iteration."""

    state: PhasePoint
    accepted_stage: int  # 0 when every stage was rejected
    records: list = field(default_factory=list)
    grad_evals: int = 0
    balance_guards: int = 0
    divergences: int = 0

    @property
    def accepted_step_size(self) -> float:
        if self.accepted_stage == 0:
            return math.nan
        return self.records[self.accepted_stage - 1].step_size


class _CountingModel:
    """Pass-through wrapper that counts gradient evaluations."""

    __slots__ = ("inner", "grad_evals")

    def __init__(self, inner):
        self.inner = inner
        self.grad_evals = 0

    @property
    def dim(self):
        return self.inner.dim

    def log_density(self, theta):
        return self.inner.log_density(theta)

    def grad_log_density(self, theta):
        self.grad_evals += 1
        return self.inner.grad_log_density(theta)


class _StagedKernel:
    """The shared proposal/acceptance engine for one iteration."""

    def __init__(self, model, schedule, mass):
        self.model = _CountingModel(model)
        self.schedule = schedule  # [(eps_k, n_k)] for k = 1..K
        self.mass = mass
        self.balance_guards = 0
        self.divergences = 0
        self.proposal_calls = 0

    def log_joint(self, z: PhasePoint) -> float:
        h = hamiltonian(self.model, z, self.mass)
        return -h if math.isfinite(h) else -math.inf

    def propose(self, z: PhasePoint, k: int):
        eps, n_steps = self.schedule[k - 1]
        self.proposal_calls += 1
        out, divergent = flip_leapfrog(self.model, z, eps, n_steps, self.mass)
        if divergent:
            self.divergences += 1
        return out, divergent

    def stage_log_alphas(self, z: PhasePoint, k_max: int) -> list:
        """log alpha_i(z -> F_i(z)) for i = 1..k_max, the rejection stack."""
        stack = []
        for i in range(1, k_max + 1):
            y, divergent = self.propose(z, i)
            stack.append(self.log_accept(z, y, i, stack, divergent))
        return stack

    def log_accept(self, z, y, k, stack, divergent) -> float:
        """log of the clamped stage-k acceptance probability for y = F_k(z).

        ``stack`` holds the earlier stages' log alphas from z (the
        denominators); the reverse-path ghosts are built fresh from y.
        """
        if divergent:
            return -math.inf
        log_ratio = self.log_joint(y) - self.log_joint(z)
        if not math.isfinite(log_ratio):
            # +inf only arises when the current state itself has zero
            # density, which no reachable chain state does.
            return 0.0 if log_ratio == math.inf else -math.inf
        if k > 1:
            ghost_stack = self.stage_log_alphas(y, k - 1)
            for log_a_fwd, log_a_rev in zip(stack, ghost_stack):
                log_keep_fwd = log1mexp(log_a_fwd)
                if log_keep_fwd < _GUARD_LOG:
                    self.balance_guards += 1
                    return -math.inf
                log_ratio += log1mexp(log_a_rev) - log_keep_fwd
                if log_ratio == -math.inf:
                    return -math.inf
        return min(0.0, log_ratio)


def _resolve_mass(cfg, model) -> MassMatrix:
    return cfg.mass if cfg.mass is not None else MassMatrix.identity(model.dim)


def _schedule(cfg) -> list:
    return [(stage_step_size(cfg, k), stage_steps(cfg, k)) for k in range(1, cfg.max_proposals + 1)]


def _make_kernel(model, cfg) -> _StagedKernel:
    return _StagedKernel(model, _schedule(cfg), _resolve_mass(cfg, model))


def partial_momentum_refresh(rho, damping: float, mass: MassMatrix, rng) -> np.ndarray:
    """rho' = rho sqrt(1 - damping) + sqrt(damping) M^(1/2) xi.

    Leaves normal(0, M) invariant for any damping in (0, 1]; damping 1
    discards the old momentum entirely.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    rho = np.asarray(rho, dtype=float)
    noise = rng.standard_normal(rho.shape[0])
    return rho * math.sqrt(1.0 - damping) + math.sqrt(damping) * (mass.sqrt_diag * noise)


def _log_uniform(rng) -> float:
    u = rng.uniform()
    return math.log(u) if u > 0.0 else -math.inf


def _staged_step(model, z, cfg, damping, rng) -> IterationOutcome:
    kernel = _make_kernel(model, cfg)
    rho1 = partial_momentum_refresh(z.rho, damping, kernel.mass, rng)
    current = PhasePoint(z.theta, rho1)
    stack, records = [], []
    for k in range(1, cfg.max_proposals + 1):
        grads_before = kernel.model.grad_evals
        proposal, divergent = kernel.propose(current, k)
        log_alpha = kernel.log_accept(current, proposal, k, stack, divergent)
        records.append(
            ProposalRecord(
                stage=k,
                step_size=stage_step_size(cfg, k),
                proposal=proposal,
                accept_prob=math.exp(log_alpha),
                divergent=divergent,
                grad_evals=kernel.model.grad_evals - grads_before,
            )
        )
        if _log_uniform(rng) < log_alpha:
            return IterationOutcome(
                flip(proposal), k, records, kernel.model.grad_evals,
                kernel.balance_guards, kernel.divergences,
            )
        stack.append(log_alpha)
    return IterationOutcome(
        flip(current), 0, records, kernel.model.grad_evals,
        kernel.balance_guards, kernel.divergences,
    )


def drghmc_step(model, z: PhasePoint, cfg: DrGhmcConfig, rng) -> IterationOutcome:
    """One delayed rejection generalized HMC iteration."""
    return _staged_step(model, z, cfg, cfg.damping, rng)


def drhmc_step(model, z: PhasePoint, cfg: DrHmcConfig, rng) -> IterationOutcome:
    """One delayed rejection HMC iteration (full refresh, constant tau)."""
    return _staged_step(model, z, cfg, 1.0, rng)


def hmc_step(model, z: PhasePoint, n_steps: int, step_size: float, mass: MassMatrix, rng) -> IterationOutcome:
    """One plain HMC iteration: full refresh, one trajectory, one test."""
    counting = _CountingModel(model)
    rho1 = partial_momentum_refresh(z.rho, 1.0, mass, rng)
    current = PhasePoint(z.theta, rho1)
    proposal, divergent = flip_leapfrog(counting, current, step_size, n_steps, mass)
    if divergent:
        log_alpha = -math.inf
    else:
        h_now = hamiltonian(counting, current, mass)
        h_new = hamiltonian(counting, proposal, mass)
        log_ratio = (-h_new if math.isfinite(h_new) else -math.inf) - (
            -h_now if math.isfinite(h_now) else -math.inf
        )
        if not math.isfinite(log_ratio):
            log_alpha = 0.0 if log_ratio == math.inf else -math.inf
        else:
            log_alpha = min(0.0, log_ratio)
    record = ProposalRecord(1, step_size, proposal, math.exp(log_alpha), divergent,
                            counting.grad_evals)
    accepted = _log_uniform(rng) < log_alpha
    state = flip(proposal) if accepted else flip(current)
    return IterationOutcome(state, 1 if accepted else 0, [record],
                            counting.grad_evals, 0, int(divergent))


def proposal_map(model, z: PhasePoint, k: int, cfg) -> PhasePoint:
    """F_k(z): the stage-k proposal point.  Divergence shows as non-finite."""
    mass = _resolve_mass(cfg, model)
    out, _ = flip_leapfrog(model, z, stage_step_size(cfg, k), stage_steps(cfg, k), mass)
    return out


def accept_prob(model, z: PhasePoint, k: int, cfg, cache=None) -> float:
    """Stage-k acceptance probability alpha_k(z, F_k(z)).

    ``cache`` carries the already-computed acceptance probabilities of the
    rejected stages 1..k-1 from z; passing None recomputes them from
    scratch through the same recursion.
    """
    kernel = _make_kernel(model, cfg)
    if cache is None:
        stack = kernel.stage_log_alphas(z, k - 1)
    else:
        if len(cache) < k - 1:
            raise ValueError(f"stage {k} needs {k - 1} cached probabilities")
        with np.errstate(divide="ignore"):
            stack = [float(np.log(a)) for a in list(cache)[: k - 1]]
    y, divergent = kernel.propose(z, k)
    return math.exp(kernel.log_accept(z, y, k, stack, divergent))


@dataclass
class ChainResult:
    """Draws plus per-iteration annotations for one chain.

    Row 0 is the initial state with zero cumulative gradient evaluations.
    """

    draws: np.ndarray  # (n_draws, D)
    cum_grads: np.ndarray  # int64, cumulative gradient evaluations
    accepted_stage: np.ndarray  # int, 0 means all stages rejected
    accepted_eps: np.ndarray  # float, nan when nothing was accepted
    grad_evals: int
    divergences: int
    balance_guards: int

    @property
    def accept_rate(self) -> float:
        if self.accepted_stage.size <= 1:
            return math.nan
        return float(np.mean(self.accepted_stage[1:] > 0))


SAMPLER_KINDS = ("drghmc", "drhmc", "ghmc", "hmc")


def _make_step(kind: str, cfg):
    if kind == "drghmc":
        if not isinstance(cfg, DrGhmcConfig):
            raise ValueError("drghmc requires a DrGhmcConfig")
        return lambda model, z, rng: drghmc_step(model, z, cfg, rng)
    if kind == "ghmc":
        if not isinstance(cfg, DrGhmcConfig):
            raise ValueError("ghmc requires a DrGhmcConfig")
        single = replace(cfg, max_proposals=1)
        return lambda model, z, rng: drghmc_step(model, z, single, rng)
    if kind == "drhmc":
        if not isinstance(cfg, DrHmcConfig):
            raise ValueError("drhmc requires a DrHmcConfig")
        return lambda model, z, rng: drhmc_step(model, z, cfg, rng)
    if kind == "hmc":
        if not isinstance(cfg, DrHmcConfig):
            raise ValueError("hmc requires a DrHmcConfig")
        n_steps = stage_steps(cfg, 1)

        def step(model, z, rng, _n=n_steps):
            return hmc_step(model, z, _n, cfg.step_size, _resolve_mass(cfg, model), rng)

        return step
    raise ValueError(f"unknown sampler kind {kind!r}; expected one of {SAMPLER_KINDS}")


def run_chain(model, kind: str, cfg, init, budget: int | None, rng=None,
              iterations: int | None = None) -> ChainResult:
    """Iterate one chain until the gradient budget is spent.

    Records one draw per iteration (plus the initial state).  The final
    iteration may overshoot the budget; its annotation carries the true
    cumulative count.  ``iterations`` adds (or, with ``budget=None``,
    replaces) an iteration-count stop rule.  With the same config and seed
    the draw sequence is bit-identical across runs.
    """
    theta0 = np.asarray(init, dtype=float)
    if theta0.shape != (model.dim,):
        raise ValueError(f"init must have length {model.dim}")
    if not np.all(np.isfinite(theta0)) or not math.isfinite(float(model.log_density(theta0))):
        raise ValueError("init must have finite coordinates and finite log density")
    if budget is None and iterations is None:
        raise ValueError("need a gradient budget, an iteration count, or both")
    if budget is not None and budget < 0:
        raise ValueError("budget must be non-negative")
    step = _make_step(kind, cfg)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    mass = _resolve_mass(cfg, model)

    rho0 = mass.sqrt_diag * rng.standard_normal(model.dim)
    z = PhasePoint(theta0, rho0)

    draws = [theta0]
    cum_grads = [0]
    stages = [0]
    eps_used = [math.nan]
    total_grads = 0
    divergences = 0
    balance_guards = 0
    it = 0
    while (budget is None or total_grads < budget) and (
        iterations is None or it < iterations
    ):
        it += 1
        outcome = step(model, z, rng)
        z = outcome.state
        total_grads += outcome.grad_evals
        divergences += outcome.divergences
        balance_guards += outcome.balance_guards
        draws.append(z.theta)
        cum_grads.append(total_grads)
        stages.append(outcome.accepted_stage)
        eps_used.append(outcome.accepted_step_size)
    return ChainResult(
        draws=np.asarray(draws),
        cum_grads=np.asarray(cum_grads, dtype=np.int64),
        accepted_stage=np.asarray(stages, dtype=np.int64),
        accepted_eps=np.asarray(eps_used, dtype=float),
        grad_evals=total_grads,
        divergences=divergences,
        balance_guards=balance_guards,
    )
