# nphisd/commands/common.py
"""Shared plumbing for the subcommands: config loading, output dirs, seed states."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from ..config import settings
from ..dynamics import config_with_k
from ..energies import build_model
from ..exceptions import ConfigError
from ..exporters import config_hash, write_json
from ..landscape import make_search, relax
from ..model_api import ConstraintKind, EnergyModel, StationaryPoint, ensure_state
from ..schemas import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def _line_of(text: str, loc: Sequence[Any]) -> Optional[int]:
    """Best-effort line number of the key path `loc` in the JSON text."""
    pos, found = 0, False
    for part in loc:
        if not isinstance(part, str) or part == "__root__":
            continue
        idx = text.find(f'"{part}"', pos)
        if idx < 0:
            break
        pos, found = idx, True
    return text.count("\n", 0, pos) + 1 if found else None


def load_config(path: str) -> Tuple[RunConfig, str]:
    """Parse and validate a run config; returns it with its config hash."""
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc

    try:
        cfg = RunConfig.parse_obj(raw)
    except ValidationError as exc:
        messages = []
        for err in exc.errors():
            where = ".".join(str(p) for p in err["loc"] if p != "__root__") or "<root>"
            line = _line_of(text, err["loc"])
            prefix = f"{path}:{line}" if line else str(path)
            messages.append(f"{prefix}: {where}: {err['msg']}")
        raise ConfigError("invalid config\n" + "\n".join(messages)) from exc
    return cfg, config_hash(cfg.dict())


def prepare_output(cfg: RunConfig, digest: str, command: str, out: Optional[str]) -> Path:
    """Output directory (created) with the validated config echoed into it."""
    directory = Path(out or cfg.output.directory or Path(settings.OUTPUT_DIR) / f"{command}-{digest[:12]}")
    directory.mkdir(parents=True, exist_ok=True)
    write_json(directory / "config.json", cfg.dict())
    return directory


def model_from(cfg: RunConfig) -> EnergyModel:
    return build_model(cfg.model.name, cfg.model.params)


def initial_state(model: EnergyModel, cfg: RunConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.model.initial_state is not None:
        phi = ensure_state(cfg.model.initial_state, model.dim)
    else:
        phi = model.seed_state(cfg.model.seed_state or "random", rng)
    if model.constraint_kind is ConstraintKind.UNIT_SPHERE:
        norm = float(np.linalg.norm(phi))
        if norm == 0.0:
            raise ValueError("initial state must be nonzero to lie on the sphere")
        phi = phi / norm
    return phi


def seed_point(model: EnergyModel, cfg: RunConfig, seed: int) -> StationaryPoint:
    """Configured start state, relaxed to a local minimum unless model.relax is false."""
    phi = initial_state(model, cfg, np.random.default_rng(seed))
    if not cfg.model.relax:
        point = make_search(model, config_with_k(cfg.search, 0)).classify(phi)
        point.converged = point.residual < cfg.search.force_tol
        return point
    result = relax(model, phi, cfg.search)
    logger.info(
        "relaxed seed: energy %.10g, index %d, nullspace dim %d, residual %.3e",
        result.point.energy, result.point.index, result.point.nullspace_dim, result.point.residual,
    )
    return result.point


def resolve_seed(cfg: RunConfig, seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    return cfg.landscape.seed if cfg.landscape.seed else settings.SEED


def report(lines: Dict[str, Any]) -> None:
    """Final report to stdout, one `key: value` per line."""
    width = max(len(k) for k in lines)
    for key, value in lines.items():
        print(f"{key.ljust(width)} : {value}")
