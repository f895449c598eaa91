# nphisd/convergence.py
"""
Self-convergence of the time discretization: integrate the same initial
state and frame to a fixed time T with successively halved steps and
compare against a run with a much finer step.
"""

import logging
import math
from typing import List, Optional

import numpy as np

from .dynamics import DynamicsState, SaddleSearch
from .landscape import make_search
from .model_api import EnergyModel, ensure_state
from .schemas import ConvergenceRow, ConvergenceSection, SearchConfig

logger = logging.getLogger(__name__)


def integrate(search: SaddleSearch, state: DynamicsState, tau: float, horizon: float) -> DynamicsState:
    """Fixed-step integration to t = horizon, without segment refreshes."""
    steps = int(round(horizon / tau))
    if steps < 1 or abs(steps * tau - horizon) > 1e-9 * horizon:
        raise ValueError(f"T = {horizon} is not a whole number of steps of size {tau}")
    for _ in range(steps):
        force = np.asarray(search.model.force(state.phi), dtype=float)
        state = search.step(state, tau, force)
    return state


def trajectory_error(state: DynamicsState, reference: DynamicsState) -> float:
    """||phi - phi_ref|| + sum_i ||v_i - v_ref_i||."""
    err = float(np.linalg.norm(state.phi - reference.phi))
    diff = state.frame.vectors - reference.frame.vectors
    if diff.size:
        err += float(np.sum(np.linalg.norm(diff, axis=0)))
    return err


def convergence_study(
    model: EnergyModel,
    seed_phi: np.ndarray,
    cfg: Optional[SearchConfig] = None,
    study: Optional[ConvergenceSection] = None,
) -> List[ConvergenceRow]:
    """
    Errors of the semi-implicit scheme at every step size in study.taus
    (largest first) against a reference at T / reference_divisor, with the
    observed order between consecutive rows.
    """
    cfg = (cfg or SearchConfig()).copy(update={"scheme": "semi_implicit", "step_rule": "fixed"})
    study = study or ConvergenceSection()
    search = make_search(model, cfg)

    seed_phi = ensure_state(seed_phi, model.dim)
    anchor = search.init_state(seed_phi)
    if anchor.frame.size:
        kick = anchor.frame.vectors[:, 0]
    else:
        kick = np.zeros(model.dim)
    initial = search.init_state(seed_phi + study.perturbation * kick, nullspace_hint=anchor.nullspace)

    reference = integrate(search, initial, study.T / study.reference_divisor, study.T)
    rows: List[ConvergenceRow] = []
    for tau in study.taus:
        error = trajectory_error(integrate(search, initial, tau, study.T), reference)
        order = None
        if rows and error > 0 and rows[-1].l2_error > 0:
            order = math.log(rows[-1].l2_error / error) / math.log(rows[-1].tau / tau)
        rows.append(ConvergenceRow(tau=tau, l2_error=error, order=order))
        logger.info("tau %.6g: error %.6e, order %s", tau, error, "-" if order is None else f"{order:.4f}")
    return rows
