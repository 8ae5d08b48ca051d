"""Bundled datasets and their schemas.

Each model reads a small JSON file of keys and arrays:

    eight_schools  {"y": [8 floats], "sigma": [8 positive floats]}
    normal100      {"rho": float in (0, 1)}
    stoch_vol      {"y": [T floats]}            (T = 500 bundled)
    irt_2pl        {"I": int, "J": int, "y": I-by-J matrix of 0/1}

The school data are transcribed from the classic published study; the
other three are synthetic, drawn from their own generative models with
the fixed seeds recorded below.  Generation screens out implausible
hyperparameter draws (heavy-tailed priors occasionally produce degenerate
datasets) by advancing a deterministic attempt counter, so regenerating
with the same seed reproduces the bundled files exactly.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

DATASET_NAMES = ("eight_schools", "normal100", "stoch_vol", "irt_2pl")

NORMAL100_RHO = 0.9
STOCH_VOL_LENGTH = 500
IRT_STUDENTS = 100
IRT_QUESTIONS = 20

STOCH_VOL_SEED = 20240811
IRT_SEED = 20240812


def dataset_path(name: str):
    return resources.files("drghmc.models").joinpath("data", f"{name}.json")


def load_dataset(name: str, path=None) -> dict:
    """Load and validate one dataset, from ``path`` or the bundled copy."""
    if name not in DATASET_NAMES:
        raise ValueError(f"unknown dataset {name!r}; expected one of {DATASET_NAMES}")
    if path is None:
        text = dataset_path(name).read_text()
    else:
        with open(path) as handle:
            text = handle.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"malformed data file for {name}: {err}") from err
    return validate_dataset(name, raw)


def validate_dataset(name: str, raw: dict) -> dict:
    if name == "eight_schools":
        y = np.asarray(raw.get("y", []), dtype=float)
        sigma = np.asarray(raw.get("sigma", []), dtype=float)
        if y.ndim != 1 or y.shape != sigma.shape or y.size == 0:
            raise ValueError("eight_schools data needs matching 1-d y and sigma arrays")
        if np.any(sigma <= 0):
            raise ValueError("eight_schools sigma values must be positive")
        return {"y": y, "sigma": sigma}
    if name == "normal100":
        rho = float(raw.get("rho", float("nan")))
        if not 0.0 < rho < 1.0:
            raise ValueError("normal100 rho must lie strictly inside (0, 1)")
        return {"rho": rho}
    if name == "stoch_vol":
        y = np.asarray(raw.get("y", []), dtype=float)
        if y.ndim != 1 or y.size < 2 or not np.all(np.isfinite(y)):
            raise ValueError("stoch_vol data needs a finite 1-d returns array")
        return {"y": y}
    if name == "irt_2pl":
        y = np.asarray(raw.get("y", []), dtype=float)
        n_students = int(raw.get("I", 0))
        n_questions = int(raw.get("J", 0))
        if y.shape != (n_students, n_questions):
            raise ValueError("irt_2pl response matrix shape must match I and J")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("irt_2pl responses must be 0/1")
        return {"I": n_students, "J": n_questions, "y": y}
    raise ValueError(f"unknown dataset {name!r}")


def _half_cauchy(rng, scale):
    return abs(scale * rng.standard_cauchy())


def generate_stoch_vol_data(seed: int = STOCH_VOL_SEED, length: int = STOCH_VOL_LENGTH):
    """Draw returns from the volatility model, screening degenerate draws."""
    for attempt in range(1000):
        rng = np.random.default_rng([seed, attempt])
        phi = rng.uniform(-1.0, 1.0)
        sigma = _half_cauchy(rng, 5.0)
        mu = 10.0 * rng.standard_cauchy()
        if abs(mu) > 3.0 or sigma > 1.0 or abs(phi) > 0.98:
            continue
        h = np.empty(length)
        h[0] = mu + sigma / np.sqrt(1.0 - phi * phi) * rng.standard_normal()
        for t in range(1, length):
            h[t] = mu + phi * (h[t - 1] - mu) + sigma * rng.standard_normal()
        if np.max(np.abs(h)) > 8.0:
            continue
        y = np.exp(0.5 * h) * rng.standard_normal(length)
        return {"y": y.tolist(), "seed": seed, "attempt": attempt}
    raise RuntimeError("could not draw a plausible volatility dataset")


def generate_irt_data(
    seed: int = IRT_SEED, n_students: int = IRT_STUDENTS, n_questions: int = IRT_QUESTIONS
):
    """Draw a response matrix from the item response model, screened."""
    for attempt in range(1000):
        rng = np.random.default_rng([seed, attempt])
        sigma_theta = _half_cauchy(rng, 2.0)
        sigma_a = _half_cauchy(rng, 2.0)
        mu_b = 5.0 * rng.standard_normal()
        sigma_b = _half_cauchy(rng, 2.0)
        if max(sigma_theta, sigma_a, sigma_b) > 2.5 or abs(mu_b) > 3.0:
            continue
        ability = sigma_theta * rng.standard_normal(n_students)
        disc = np.exp(sigma_a * rng.standard_normal(n_questions))
        diff = mu_b + sigma_b * rng.standard_normal(n_questions)
        eta = disc[None, :] * (ability[:, None] - diff[None, :])
        y = (rng.random((n_students, n_questions)) < 1.0 / (1.0 + np.exp(-eta))).astype(int)
        rate = y.mean()
        per_question = y.mean(axis=0)
        if not 0.1 < rate < 0.9:
            continue
        if np.any(per_question == 0.0) or np.any(per_question == 1.0):
            continue
        return {
            "I": n_students,
            "J": n_questions,
            "y": y.tolist(),
            "seed": seed,
            "attempt": attempt,
        }
    raise RuntimeError("could not draw a plausible response matrix")


def generate_all(out_dir) -> None:
    """Regenerate every synthetic data file into ``out_dir``."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payloads = {
        "normal100": {"rho": NORMAL100_RHO},
        "stoch_vol": generate_stoch_vol_data(),
        "irt_2pl": generate_irt_data(),
    }
    for name, payload in payloads.items():
        with open(out / f"{name}.json", "w") as handle:
            json.dump(payload, handle, indent=1, sort_keys=True)
            handle.write("\n")
