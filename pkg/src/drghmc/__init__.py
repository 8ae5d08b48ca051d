"""Delayed rejection generalized Hamiltonian Monte Carlo.

A sampler that retries rejected proposals within one iteration using
geometrically shrinking leapfrog step sizes, alongside delayed rejection
HMC, generalized HMC, and plain HMC baselines, benchmark densities with
analytic gradients, reference-draw machinery, and standardized-error
diagnostics.  The ``drghmc`` command line drives reproducible multi-chain
experiments on top of this library.
"""

from __future__ import annotations

from .integrator import (
    MassMatrix,
    PhasePoint,
    flip,
    flip_leapfrog,
    gibbs_log_density,
    hamiltonian,
    leapfrog,
    leapfrog_trajectory,
    phase_point,
)
from .models import build_model
from .samplers import (
    ChainResult,
    DrGhmcConfig,
    DrHmcConfig,
    IterationOutcome,
    ProposalRecord,
    accept_prob,
    drghmc_step,
    drhmc_step,
    hmc_step,
    partial_momentum_refresh,
    proposal_map,
    run_chain,
    stage_step_size,
    stage_steps,
)

__version__ = "0.1.0"

__all__ = [
    "MassMatrix",
    "PhasePoint",
    "flip",
    "flip_leapfrog",
    "gibbs_log_density",
    "hamiltonian",
    "leapfrog",
    "leapfrog_trajectory",
    "phase_point",
    "build_model",
    "ChainResult",
    "DrGhmcConfig",
    "DrHmcConfig",
    "IterationOutcome",
    "ProposalRecord",
    "accept_prob",
    "drghmc_step",
    "drhmc_step",
    "hmc_step",
    "partial_momentum_refresh",
    "proposal_map",
    "run_chain",
    "stage_step_size",
    "stage_steps",
    "__version__",
]
