"""Reference draws and moments for error measurement.

Targets with a tractable generative recipe (funnel, gaussians) get exact
iid reference draws.  The hierarchical posteriors get long, conservatively
tuned delayed rejection runs: four chains, a halved pilot step size, extra
proposal stages, thinned to the estimated integrated autocorrelation time.
A long run that fails the split R-hat gate refuses to emit a reference
rather than silently producing a biased one.  Long-run references are
cached on disk keyed by model, size, and seed, and regeneration is
byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics
from .models.funnel import Funnel
from .models.gaussian import CorrelatedGaussian

RHAT_LIMIT = 1.01
LONGRUN_MIN_DRAWS = 10_000
LONGRUN_CHAINS = 4


class ReferenceError(RuntimeError):
    """Raised when a long run cannot be certified as converged."""


@dataclass
class ReferenceSet:
    """Draws believed to represent the target, plus their moments."""

    draws: np.ndarray  # (M, D)
    provenance: str  # "analytic" | "longrun"

    def __post_init__(self):
        self.draws = np.asarray(self.draws, dtype=float)
        if self.draws.ndim != 2 or self.draws.shape[0] < 2:
            raise ValueError("reference draws must be a (M, D) array with M >= 2")
        self._moments = {}
        for f in diagnostics.FUNCTIONS:
            self._moments[f] = diagnostics.reference_moments(self.draws, f)

    @property
    def count(self) -> int:
        return self.draws.shape[0]

    @property
    def dim(self) -> int:
        return self.draws.shape[1]

    def moments(self, f: str):
        """(mean, sd) per dimension of f(theta) under the reference."""
        return self._moments[f]

    def save(self, out_dir) -> None:
        from . import runio

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        runio.write_matrix_csv(out / "draws.csv", self.draws,
                               [f"theta_{i + 1}" for i in range(self.dim)])
        moments = {"provenance": self.provenance, "count": self.count, "dim": self.dim}
        for f in diagnostics.FUNCTIONS:
            mean, sd = self.moments(f)
            moments[f"mean_{f}"] = mean.tolist()
            moments[f"sd_{f}"] = sd.tolist()
        runio.write_json(out / "moments.json", moments)

    @classmethod
    def load(cls, ref_dir) -> "ReferenceSet":
        from . import runio

        ref_dir = Path(ref_dir)
        moments = json.loads((ref_dir / "moments.json").read_text())
        draws = runio.read_matrix_csv(ref_dir / "draws.csv")
        return cls(draws, moments.get("provenance", "unknown"))


def funnel_reference(dim: int, count: int, rng) -> ReferenceSet:
    """Exact iid draws by the funnel's generative recipe."""
    return ReferenceSet(Funnel(dim).sample(count, rng), "analytic")


def gaussian_reference(dim: int, rho: float, count: int, rng) -> ReferenceSet:
    """Exact draws from the banded-correlation gaussian via its Cholesky factor."""
    return ReferenceSet(CorrelatedGaussian(dim, rho).sample(count, rng), "analytic")


def _longrun_config(model, count, seed, iterations):
    from .samplers import DrGhmcConfig
    from .stepsize import reference_step_size

    eps_ref, _ = reference_step_size(model, seed=seed)
    cfg = DrGhmcConfig(
        max_proposals=5,
        damping=0.08,
        step_size=0.5 * eps_ref,
        reduction=4.0,
        seed=seed,
    )
    if iterations is None:
        iterations = max(20_000, 10 * count // LONGRUN_CHAINS)
    return cfg, iterations


def longrun_reference(
    model,
    count: int = LONGRUN_MIN_DRAWS,
    seed: int = 0,
    cache_dir=None,
    iterations: int | None = None,
    workers: int = 1,
) -> ReferenceSet:
    """Reference draws from conservative delayed rejection long runs.

    Four chains start from dispersed jittered origins; draws are thinned
    by the worst-dimension integrated autocorrelation time and pooled in
    chain order.  Raises ReferenceError when split R-hat exceeds 1.01 on
    any coordinate or too few thinned draws remain.
    """
    if count < LONGRUN_MIN_DRAWS:
        raise ValueError(f"long-run references need at least {LONGRUN_MIN_DRAWS} draws")
    cache = None
    if cache_dir is not None:
        cache = Path(cache_dir) / f"{model.name}-d{model.dim}-m{count}-s{seed}"
        if (cache / "moments.json").exists():
            return ReferenceSet.load(cache)

    from .runner import run_chains

    cfg, iterations = _longrun_config(model, count, seed, iterations)
    init_rng = np.random.default_rng([seed, 0x1217])
    inits = 0.5 * init_rng.standard_normal((LONGRUN_CHAINS, model.dim))
    # iteration-count stop rule: every drghmc iteration costs >= 2 gradients
    results = run_chains(
        model,
        "drghmc",
        cfg,
        inits,
        budget=None,
        iterations=iterations,
        seeds=[[seed, 0xC0DE, c] for c in range(LONGRUN_CHAINS)],
        workers=workers,
    )
    warm = iterations // 5
    kept = [r.draws[warm:] for r in results]
    stacked = np.stack(kept)  # (C, N, D)

    rhats = np.array([diagnostics.split_rhat(stacked[:, :, d]) for d in range(model.dim)])
    if np.any(rhats > RHAT_LIMIT) or np.any(~np.isfinite(rhats)):
        worst = int(np.nanargmax(rhats))
        raise ReferenceError(
            f"long run for {model.name} not converged: split R-hat "
            f"{rhats[worst]:.4f} on {model.param_names[worst]} "
            f"(limit {RHAT_LIMIT}); R-hat by dim: "
            + ", ".join(f"{v:.3f}" for v in rhats)
        )
    taus = [diagnostics.autocorr_time(stacked[:, :, d]) for d in range(model.dim)]
    thin = max(1, math.ceil(max(taus)))
    thinned = np.concatenate([c[::thin] for c in kept], axis=0)
    if thinned.shape[0] < count:
        raise ReferenceError(
            f"long run for {model.name} too short: {thinned.shape[0]} draws "
            f"after thinning by {thin}, need {count}; rerun with more iterations"
        )
    out = ReferenceSet(thinned[:count], "longrun")
    if cache is not None:
        out.save(cache)
    return out


def analytic_reference(name: str, dim: int, count: int, seed: int, rho: float | None = None) -> ReferenceSet:
    """Dispatch for the exactly sampleable targets."""
    rng = np.random.default_rng([seed, 0xEF])
    if name == "funnel":
        return funnel_reference(dim, count, rng)
    if name == "gaussian":
        return gaussian_reference(dim, 0.0, count, rng)
    if name == "normal100":
        if rho is None:
            raise ValueError("normal100 reference needs its correlation rho")
        return gaussian_reference(dim, rho, count, rng)
    raise ValueError(f"{name} has no analytic reference; use the long-run path")
