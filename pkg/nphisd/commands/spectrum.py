# nphisd/commands/spectrum.py
"""`nphisd spectrum CONFIG`: smallest Hessian eigenvalues at the (relaxed) seed."""

import logging

import numpy as np

from ..dynamics import config_with_k
from ..exporters import write_json, write_spectrum_csv
from ..landscape import make_search
from ..linalg import count_spectrum, effective_threshold, smallest_eigenpairs
from .common import EXIT_OK, load_config, model_from, prepare_output, report, resolve_seed, seed_point

logger = logging.getLogger(__name__)


def run(args) -> int:
    cfg, digest = load_config(args.config)
    out = prepare_output(cfg, digest, "spectrum", args.out)
    model = model_from(cfg)
    start = seed_point(model, cfg, resolve_seed(cfg, args.seed))

    search = make_search(model, config_with_k(cfg.search, 0))
    phi = start.phi
    fixed = search.fixed_directions(phi)
    gauge = model.gauge_directions()
    available = model.dim - fixed.shape[1] - (gauge.shape[1] if gauge is not None else 0)
    count = min(cfg.spectrum.count, available)
    eig = smallest_eigenpairs(
        model, phi, count, fixed, cfg.search.eig_tol, cfg.search.eig_max_iter,
        matvec=search.hessian_operator(phi),
    )
    if not eig.converged:
        logger.warning("eigensolver did not converge; residuals %s", eig.residual_norms)
    threshold = effective_threshold(model, eig.eigenvalues, cfg.search.zero_threshold)
    index, nullity = count_spectrum(eig.eigenvalues, threshold)

    write_spectrum_csv(out / "spectrum.csv", eig.eigenvalues, threshold)
    write_json(out / "spectrum.json", {
        "config_hash": digest,
        "point": start.summary(),
        "threshold": threshold,
        "eigenvalues": np.asarray(eig.eigenvalues),
        "index": index,
        "nullspace_dim": nullity,
    })
    report({
        "output": out,
        "energy": f"{start.energy:.10g}",
        "residual": f"{start.residual:.3e}",
        "index": index,
        "nullspace_dim": nullity,
        "threshold": f"{threshold:.3e}",
    })
    return EXIT_OK
