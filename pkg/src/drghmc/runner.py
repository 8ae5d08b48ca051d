"""Multi-chain orchestration.

Chains are the unit of parallelism: each worker owns one chain, one RNG
stream, and no shared mutable state.  Results come back ordered by chain
index, so the output of a run does not depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .samplers import ChainResult, run_chain


def chain_seeds(base_seed: int, chains: int) -> list:
    """Deterministic per-chain seed keys derived from one base seed."""
    return [[int(base_seed), 0xC0DE, c] for c in range(chains)]


def default_workers(chains: int) -> int:
    return max(1, min(chains, os.cpu_count() or 1))


def _run_one(args):
    model, kind, cfg, init, budget, iterations, seed_key = args
    rng = np.random.default_rng(seed_key)
    return run_chain(model, kind, cfg, init, budget, rng=rng, iterations=iterations)


def run_chains(
    model,
    kind: str,
    cfg,
    inits,
    budget: int | None,
    seeds=None,
    workers: int | None = None,
    iterations: int | None = None,
) -> list[ChainResult]:
    """Run one chain per initial position, in parallel, results in order."""
    inits = np.asarray(inits, dtype=float)
    if inits.ndim != 2:
        raise ValueError("inits must be a (chains, D) array")
    n_chains = inits.shape[0]
    if seeds is None:
        seeds = chain_seeds(cfg.seed, n_chains)
    if len(seeds) != n_chains:
        raise ValueError("need one seed per chain")
    if workers is None:
        workers = default_workers(n_chains)
    tasks = [
        (model, kind, cfg, inits[c], budget, iterations, seeds[c])
        for c in range(n_chains)
    ]
    if workers <= 1 or n_chains == 1:
        return [_run_one(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, n_chains)) as pool:
        return list(pool.map(_run_one, tasks))
