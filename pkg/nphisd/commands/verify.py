# nphisd/commands/verify.py
"""
`nphisd verify MODEL|CONFIG`: finite-difference, symmetry, linearity, split
and invariance checks of an energy model at random states.
"""

import logging
from pathlib import Path
from typing import List

import numpy as np

from ..config import settings
from ..energies import MODEL_REGISTRY, build_model
from ..exporters import write_json
from ..model_api import ConstraintKind, EnergyModel, check_model
from ..schemas import CheckOutcome
from .common import EXIT_ERROR, EXIT_OK, load_config

logger = logging.getLogger(__name__)

STATES = 10
TOLERANCES = {
    "force": 1e-5,
    "symmetry": 1e-9,
    "linearity": 1e-8,
    "split": 1e-10,
    "invariance": 1e-10,
}


def resolve_model(target: str) -> EnergyModel:
    """A registry name, or the model section of a config file."""
    if target in MODEL_REGISTRY:
        return build_model(target)
    if Path(target).suffix == ".json" or Path(target).exists():
        cfg, _ = load_config(target)
        return build_model(cfg.model.name, cfg.model.params)
    raise ValueError(f"unknown model {target!r}; known: {', '.join(sorted(MODEL_REGISTRY))}")


def _state(model: EnergyModel, rng: np.random.Generator) -> np.ndarray:
    phi = model.random_state(rng)
    if model.constraint_kind is ConstraintKind.UNIT_SPHERE:
        phi = phi / np.linalg.norm(phi)
    return phi


def verify_model(model: EnergyModel, seed: int = 0, states: int = STATES) -> List[CheckOutcome]:
    """Worst value of every check over `states` random states."""
    rng = np.random.default_rng(seed)
    worst = {}
    for _ in range(states):
        result = check_model(model, _state(model, rng), rng)
        values = {
            "force": result.force_error,
            "symmetry": result.symmetry_error,
            "linearity": result.linearity_error,
        }
        if result.split_error is not None:
            values["split"] = result.split_error
        for name, error in result.invariance.items():
            values[f"invariance:{name}"] = error
        for name, value in values.items():
            worst[name] = max(worst.get(name, 0.0), value)

    outcomes = []
    for name, value in worst.items():
        tolerance = TOLERANCES[name.split(":")[0]]
        outcomes.append(CheckOutcome(name=name, value=value, tolerance=tolerance, passed=value <= tolerance))
    return outcomes


def run(args) -> int:
    model = resolve_model(args.config)
    seed = args.seed if args.seed is not None else settings.SEED
    outcomes = verify_model(model, seed)

    print(f"model {model.name} (dim {model.dim}), {STATES} random states")
    for outcome in outcomes:
        status = "ok" if outcome.passed else "FAIL"
        print(f"  {outcome.name:<28} {outcome.value:10.3e}  (tol {outcome.tolerance:.0e})  {status}")
    if args.out:
        write_json(Path(args.out) / "verify.json", {
            "model": model.describe(),
            "checks": [outcome.dict() for outcome in outcomes],
        })

    failed = [o.name for o in outcomes if not o.passed]
    if failed:
        logger.error("model %s failed: %s", model.name, ", ".join(failed))
        return EXIT_ERROR
    return EXIT_OK
