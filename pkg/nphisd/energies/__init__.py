# nphisd/energies/__init__.py
"""Registry of named energy models usable from run configurations."""

from dataclasses import dataclass
from typing import Any, Callable, Dict, Mapping, Type

from pydantic import BaseModel

from ..model_api import EnergyModel
from ..schemas import (
    DegenerateParams,
    DoubleWellParams,
    GrossPitaevskiiParams,
    LennardJonesParams,
    LifshitzPetrichParams,
    QuadraticParams,
    RotatingParams,
)
from .gross_pitaevskii import GrossPitaevskiiModel
from .lennard_jones import LennardJonesCluster, pentagonal_bipyramid
from .lifshitz_petrich import LifshitzPetrichModel
from .synthetic import DegenerateModel, DoubleWellModel, QuadraticModel, RotatingNullspaceModel, rotation


@dataclass(frozen=True)
class ModelEntry:
    params: Type[BaseModel]
    factory: Callable[..., EnergyModel]
    summary: str


MODEL_REGISTRY: Dict[str, ModelEntry] = {
    "lj": ModelEntry(LennardJonesParams, LennardJonesCluster, "Lennard-Jones cluster in reduced coordinates"),
    "lj7": ModelEntry(LennardJonesParams, LennardJonesCluster, "alias of lj with seven particles"),
    "lp": ModelEntry(LifshitzPetrichParams, LifshitzPetrichModel, "2-D Lifshitz-Petrich quasicrystal energy"),
    "gp": ModelEntry(GrossPitaevskiiParams, GrossPitaevskiiModel, "2-D Gross-Pitaevskii energy on the unit sphere"),
    "quadratic": ModelEntry(QuadraticParams, QuadraticModel, "diagonal quadratic with prescribed spectrum"),
    "double_well": ModelEntry(DoubleWellParams, lambda: DoubleWellModel(), "1/4 (x^2-1)^2 + 1/2 y^2"),
    "degenerate": ModelEntry(DegenerateParams, DegenerateModel, "double well with exactly free coordinates"),
    "rotating": ModelEntry(RotatingParams, RotatingNullspaceModel, "quadratic with a rotated nullspace"),
}


def build_model(name: str, params: Mapping[str, Any] = None) -> EnergyModel:
    """Instantiate a registered model from (possibly unvalidated) parameters."""
    if name not in MODEL_REGISTRY:
        raise ValueError(f"unknown model {name!r}; known: {', '.join(sorted(MODEL_REGISTRY))}")
    entry = MODEL_REGISTRY[name]
    validated = entry.params(**dict(params or {})).dict()
    return entry.factory(**validated)


__all__ = [
    "MODEL_REGISTRY",
    "ModelEntry",
    "build_model",
    "DegenerateModel",
    "DoubleWellModel",
    "GrossPitaevskiiModel",
    "LennardJonesCluster",
    "LifshitzPetrichModel",
    "QuadraticModel",
    "RotatingNullspaceModel",
    "pentagonal_bipyramid",
    "rotation",
]
