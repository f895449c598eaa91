# nphisd/commands/search.py
"""`nphisd search CONFIG`: one upward search from the (relaxed) seed to index k."""

import logging

from ..exporters import TrajectoryWriter, export_point, write_json
from ..landscape import find_stationary_point, upward_search
from ..model_api import StationaryPoint
from .common import (
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    load_config,
    model_from,
    prepare_output,
    report,
    resolve_seed,
    seed_point,
)

logger = logging.getLogger(__name__)


def run(args) -> int:
    cfg, digest = load_config(args.config)
    if cfg.search.k < 1:
        raise ValueError("search needs search.k >= 1; use k = 0 only through model.relax")
    out = prepare_output(cfg, digest, "search", args.out)
    model = model_from(cfg)
    seed = resolve_seed(cfg, args.seed)

    start = seed_point(model, cfg, seed)
    if not start.converged:
        logger.warning("seed relaxation did not converge (residual %.3e); searching from its best iterate", start.residual)

    trajectory = out / "trajectory.csv"
    with TrajectoryWriter(trajectory) as writer:
        callback = writer if cfg.output.trajectory else None
        if start.index < cfg.search.k:
            point: StationaryPoint = upward_search(
                model, start, cfg.search.k, cfg.search, cfg.landscape.delta, callback=callback,
            )
        else:
            logger.info("seed already has index %d >= %d; searching from it directly", start.index, cfg.search.k)
            point = find_stationary_point(model, start.phi, cfg.search, callback=callback).point
    if not cfg.output.trajectory:
        trajectory.unlink(missing_ok=True)

    point.label = point.label or f"index-{point.index}"
    snapshot = export_point(out, "point", model, point, cfg.output.formats)
    summary = {
        "config_hash": digest,
        "seed": seed,
        "model": model.describe(),
        "k": cfg.search.k,
        "start": start.summary(),
        "point": point.summary(),
        "phi_ref": snapshot,
    }
    write_json(out / "summary.json", summary)

    report({
        "output": out,
        "converged": point.converged,
        "index": point.index,
        "nullspace_dim": point.nullspace_dim,
        "energy": f"{point.energy:.10g}",
        "residual": f"{point.residual:.3e}",
    })
    return EXIT_OK if point.converged else EXIT_NOT_CONVERGED
