"""Experiment configuration: a flat key=value file plus flag overrides.

Config files look like

    # funnel benchmark
    model = funnel
    dim = 10
    sampler = drghmc
    chains = 20
    budget = 100000
    seed = 1
    gamma = 0.08
    max_proposals = 3
    reduction = 4
    step_size_factor = 2

Recognized keys and defaults live in ``FIELDS``.  Command-line flags win
over file values, which win over defaults.  ``step_size`` pins the stage-1
step size directly; otherwise it is resolved as step_size_factor times a
pilot-tuned reference value.  Desk-scale defaults (20 chains, 1e5 budget)
keep full runs in the minutes range; paper-scale values are plain config
changes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional


class UsageError(Exception):
    """Bad configuration or arguments; maps to exit code 2."""


SAMPLERS = ("drghmc", "drhmc", "ghmc", "hmc")
MASS_POLICIES = ("identity", "pilot")
INIT_POLICIES = ("reference", "origin")

OUTPUT_ROOT_ENV = "DRGHMC_OUT"


@dataclass
class ExperimentConfig:
    model: str = "funnel"
    dim: Optional[int] = None
    data: Optional[str] = None
    sampler: str = "drghmc"
    chains: int = 20
    budget: int = 100_000
    seed: int = 1
    workers: Optional[int] = None
    gamma: float = 0.08
    max_proposals: int = 3
    reduction: float = 4.0
    step_size: Optional[float] = None
    step_size_factor: float = 2.0
    steps: int = 10
    trajectory_length: Optional[float] = None
    first_steps: int = 1
    mass: str = "identity"
    init: str = "reference"
    reference: Optional[str] = None
    out: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        if self.sampler not in SAMPLERS:
            raise UsageError(f"unknown sampler {self.sampler!r}; choose from {SAMPLERS}")
        if not 0.0 < self.gamma <= 1.0:
            raise UsageError("gamma must lie in (0, 1]")
        if self.max_proposals < 1:
            raise UsageError("max_proposals must be at least 1")
        if self.reduction <= 1.0:
            raise UsageError("reduction must exceed 1")
        if self.chains < 1:
            raise UsageError("chains must be at least 1")
        if self.budget < 0:
            raise UsageError("budget must be non-negative")
        if self.step_size is not None and self.step_size <= 0:
            raise UsageError("step_size must be positive")
        if self.step_size_factor <= 0:
            raise UsageError("step_size_factor must be positive")
        if self.steps < 1:
            raise UsageError("steps must be at least 1")
        if self.trajectory_length is not None and self.trajectory_length <= 0:
            raise UsageError("trajectory_length must be positive")
        if self.first_steps < 1:
            raise UsageError("first_steps must be at least 1")
        if self.mass not in MASS_POLICIES:
            raise UsageError(f"mass policy must be one of {MASS_POLICIES}")
        if self.init not in INIT_POLICIES:
            raise UsageError(f"init policy must be one of {INIT_POLICIES}")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}

_INT_KEYS = {"dim", "chains", "budget", "seed", "workers", "max_proposals", "steps", "first_steps"}
_FLOAT_KEYS = {"gamma", "reduction", "step_size", "step_size_factor", "trajectory_length"}


def parse_config_file(path) -> dict:
    """key = value lines; '#' starts a comment; unknown keys are errors."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise UsageError(f"cannot read config file {path}: {err}") from err
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FIELD_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value
    return values


def _coerce(key: str, value):
    if value is None or not isinstance(value, str):
        return value
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as err:
        raise UsageError(f"config key {key}={value!r}: {err}") from err
    return value


def build_experiment_config(file_values: dict | None, overrides: dict) -> ExperimentConfig:
    """Defaults, then file values, then non-None overrides; validated."""
    cfg = ExperimentConfig()
    merged = {}
    if file_values:
        merged.update(file_values)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    for key, value in merged.items():
        if key not in _FIELD_TYPES:
            raise UsageError(f"unknown config key {key!r}")
        setattr(cfg, key, _coerce(key, value))
    return cfg.validate()


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "drghmc-out"))


def resolve_out_dir(cfg_out, default_name: str) -> Path:
    if cfg_out:
        return Path(cfg_out)
    return output_root() / default_name
