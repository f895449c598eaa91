# nphisd/commands/landscape.py
"""`nphisd landscape CONFIG`: solution landscape from the seed up to landscape.max_index."""

import logging
from pathlib import Path

from ..config import settings
from ..db import SessionLocal, init_db
from ..exporters import export_point, write_dot, write_json
from ..landscape import build_landscape
from ..records import save_landscape
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


def _mirror(payload, model_name: str, out: Path) -> None:
    init_db()
    db = SessionLocal()
    try:
        record = save_landscape(db, payload, model_name, str(out))
        logger.info("landscape stored as row %d in %s", record.id, settings.DATABASE_URL)
    finally:
        db.close()


def run(args) -> int:
    cfg, digest = load_config(args.config)
    out = prepare_output(cfg, digest, "landscape", args.out)
    model = model_from(cfg)
    seed = resolve_seed(cfg, args.seed)
    landscape = cfg.landscape.copy(update={"seed": seed})

    start = seed_point(model, cfg, seed)
    if not start.converged:
        logger.error("seed did not converge (residual %.3e); no landscape built", start.residual)
        write_json(out / "seed.json", start.summary())
        return EXIT_NOT_CONVERGED

    graph = build_landscape(
        model, start, landscape.max_index, cfg.search, landscape,
        config_hash=digest, jobs=args.jobs or settings.JOBS,
    )

    refs = {}
    for node_id, node in graph.nodes.items():
        refs[node_id] = export_point(out / "nodes", f"{node_id:04d}", model, node, cfg.output.formats)
    payload = graph.to_dict(phi_ref=lambda node_id: f"nodes/{refs[node_id]}")
    write_json(out / "landscape.json", payload)
    if "dot" in cfg.output.formats:
        write_dot(out / "landscape.dot", payload)
    if settings.DATABASE_URL:
        _mirror(payload, cfg.model.name, out)

    by_index = {}
    for node in graph.nodes.values():
        by_index[node.index] = by_index.get(node.index, 0) + 1
    report({
        "output": out,
        "nodes": len(graph.nodes),
        "edges": len(graph.edges),
        "by_index": ", ".join(f"{i}: {n}" for i, n in sorted(by_index.items())),
        "unconverged": len(graph.unconverged),
        "anomalies": len(graph.anomalies),
    })
    if any(entry.get("kind") == "upward" for entry in graph.unconverged):
        return EXIT_NOT_CONVERGED
    return EXIT_OK
