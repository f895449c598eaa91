# nphisd/commands/convergence.py
"""`nphisd convergence CONFIG`: step-halving study of the semi-implicit scheme."""

import logging

from ..convergence import convergence_study
from ..exporters import write_convergence_csv, write_json
from .common import EXIT_OK, load_config, model_from, prepare_output, resolve_seed, seed_point

logger = logging.getLogger(__name__)


def run(args) -> int:
    cfg, digest = load_config(args.config)
    out = prepare_output(cfg, digest, "convergence", args.out)
    model = model_from(cfg)
    if not model.has_split:
        raise ValueError(f"model {model.name!r} has no linear/nonlinear split; the study needs semi_implicit")

    start = seed_point(model, cfg, resolve_seed(cfg, args.seed))
    rows = convergence_study(model, start.phi, cfg.search, cfg.convergence)

    write_convergence_csv(out / "convergence.csv", rows)
    write_json(out / "convergence.json", {"config_hash": digest, "rows": [row.dict() for row in rows]})

    print(f"{'tau':>12}  {'L2_error':>14}  {'order':>8}")
    for row in rows:
        order = "-" if row.order is None else f"{row.order:8.4f}"
        print(f"{row.tau:12.6g}  {row.l2_error:14.6e}  {order:>8}")
    return EXIT_OK
