"""Benchmark target densities with analytic gradients."""

from __future__ import annotations

from .base import Model
from .data import load_dataset
from .eight_schools import EightSchools
from .funnel import Funnel, embed_grid_point
from .gaussian import CorrelatedGaussian, StandardGaussian, make_normal100
from .irt import ItemResponse
from .stoch_vol import StochasticVolatility

MODEL_NAMES = ("funnel", "gaussian", "eight_schools", "normal100", "stoch_vol", "irt_2pl")


def build_model(name: str, data=None, dim: int | None = None, data_path=None) -> Model:
    """Construct a bundled model by name.

    ``data`` overrides the bundled dataset for the four data-backed
    posteriors; ``dim`` configures the synthetic targets (funnel defaults
    to 10, gaussian to 1).
    """
    if name == "funnel":
        return Funnel(10 if dim is None else dim)
    if name == "gaussian":
        return StandardGaussian(1 if dim is None else dim)
    if name in ("eight_schools", "normal100", "stoch_vol", "irt_2pl"):
        if dim is not None:
            raise ValueError(f"{name} has a fixed dimension set by its data")
        if data is None:
            data = load_dataset(name, path=data_path)
        if name == "eight_schools":
            return EightSchools(data["y"], data["sigma"])
        if name == "normal100":
            return make_normal100(data["rho"])
        if name == "stoch_vol":
            return StochasticVolatility(data["y"])
        return ItemResponse(data["y"])
    raise ValueError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")


__all__ = [
    "Model",
    "Funnel",
    "StandardGaussian",
    "CorrelatedGaussian",
    "EightSchools",
    "StochasticVolatility",
    "ItemResponse",
    "MODEL_NAMES",
    "build_model",
    "embed_grid_point",
    "load_dataset",
    "make_normal100",
]
