# nphisd/sphere.py
"""
Saddle dynamics on the unit sphere ||phi|| = 1.

Forces, Hessians and nullspaces live in the tangent space T_phi = phi^perp.
A step updates phi and the frame explicitly (or with L implicit), retracts
phi by renormalization, re-tangentializes the frozen nullspace basis at the
new phi and Gram-Schmidts the frame against [phi, N].
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Optional

import numpy as np

from .dynamics import (
    Callback,
    DynamicsState,
    SaddleSearch,
    SearchResult,
    config_with_k,
    require_finite,
)
from .exceptions import NonFiniteValueError
from .linalg import FrameLike, Matvec, NullspaceBasis, OrthonormalFrame, gram_schmidt
from .model_api import EnergyModel, StationaryPoint, ensure_state
from .schemas import SearchConfig

logger = logging.getLogger(__name__)

SPHERE_TOL = 1e-8


def tangent_project(phi: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """(I - phi phi^T) psi, column-wise for 2-D psi."""
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if psi.ndim == 2:
        return psi - np.outer(phi, phi @ psi)
    return psi - phi * float(phi @ psi)


def riemannian_hessian_operator(model: EnergyModel, phi: np.ndarray) -> Matvec:
    """v -> P_phi(H v) + <phi, F> v, for tangent v."""
    mu = float(phi @ require_finite(model.force(phi)))
    return lambda v: tangent_project(phi, model.hessian_vec(phi, v)) + mu * np.asarray(v, dtype=float)


def riemannian_hessian_vec(model: EnergyModel, phi: np.ndarray, v: np.ndarray) -> np.ndarray:
    phi = ensure_state(phi, model.dim)
    v = np.asarray(v, dtype=float)
    if abs(float(np.linalg.norm(phi)) - 1.0) > SPHERE_TOL:
        raise ValueError("phi must lie on the unit sphere")
    if abs(float(phi @ v)) > SPHERE_TOL * (1.0 + float(np.linalg.norm(v))):
        raise ValueError("v must be tangent at phi")
    return riemannian_hessian_operator(model, phi)(v)


def tangent_basis(phi: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Orthonormal basis of P_phi span(vectors), in the given order."""
    if vectors.shape[1] == 0:
        return np.zeros((phi.shape[0], 0))
    return gram_schmidt(vectors, against=phi[:, None]).vectors


# ---------- State ----------

@dataclass(eq=False)
class SphereState(DynamicsState):
    # anchor nullspace re-tangentialized at the current phi
    tangent_nullspace: Optional[np.ndarray] = None

    @property
    def null_vectors(self) -> np.ndarray:
        if self.tangent_nullspace is not None:
            return self.tangent_nullspace
        return self.nullspace.vectors.vectors

    def invariant_errors(self) -> Dict[str, float]:
        errors = super().invariant_errors()
        v = self.frame.vectors
        errors["tangency_drift"] = float(np.max(np.abs(v.T @ self.phi))) if v.shape[1] else 0.0
        errors["norm_drift"] = abs(float(np.linalg.norm(self.phi)) - 1.0)
        return errors


def sphere_step(
    state: SphereState,
    model: EnergyModel,
    tau: float,
    scheme: str = "explicit",
    beta: float = 1.0,
    gamma: float = 1.0,
    *,
    force: Optional[np.ndarray] = None,
) -> SphereState:
    phi = state.phi
    f = require_finite(model.force(phi)) if force is None else force
    v = state.frame.vectors
    null = state.null_vectors
    implicit = scheme == "semi_implicit"
    mu = float(phi @ f)

    projected = -phi * mu - 2.0 * v @ (v.T @ f)
    if null.shape[1]:
        projected -= null @ (null.T @ f)
    if implicit:
        rhs = phi + tau * beta * (require_finite(model.nonlinear_force(phi, ref=phi)) + projected)
        phi_trial = require_finite(model.solve_linear(rhs, tau * beta, ref=phi), "linear solve")
    else:
        phi_trial = require_finite(phi + tau * beta * (f + projected), "step")

    cols = np.empty_like(v)
    for i in range(v.shape[1]):
        vi = v[:, i]
        hv = require_finite(model.hessian_vec(phi, vi))
        back = phi * float(phi @ hv) + vi * float(vi @ hv)
        if i:
            back += 2.0 * v[:, :i] @ (v[:, :i].T @ hv)
        if null.shape[1]:
            back += null @ (null.T @ hv)
        coupling = tau * gamma * phi * float(vi @ f)
        if implicit:
            lv = require_finite(model.linear_apply(vi, ref=phi))
            rhs_v = vi - tau * gamma * (hv + lv) + tau * gamma * back + coupling
            cols[:, i] = require_finite(model.solve_linear(rhs_v, tau * gamma, ref=phi), "linear solve")
        else:
            cols[:, i] = vi - tau * gamma * (hv - back) + coupling

    norm = float(np.linalg.norm(phi_trial))
    if norm == 0.0:
        raise NonFiniteValueError("cannot retract a zero state onto the sphere")
    phi_new = phi_trial / norm
    tangent_null = tangent_basis(phi_new, state.nullspace.vectors.vectors)
    frame = gram_schmidt(cols, against=np.hstack([phi_new[:, None], tangent_null]))
    return replace(
        state,
        phi=phi_new,
        frame=frame,
        tangent_nullspace=tangent_null,
        step=state.step + 1,
        t=state.t + tau,
    )


# ---------- Search driver ----------

class SphereSearch(SaddleSearch):
    def hessian_operator(self, phi: np.ndarray) -> Matvec:
        return riemannian_hessian_operator(self.model, phi)

    def fixed_directions(self, phi: np.ndarray) -> np.ndarray:
        return phi[:, None]

    def residual_force(self, phi: np.ndarray, force: np.ndarray) -> np.ndarray:
        return tangent_project(phi, force)

    def modified_force(self, state: DynamicsState, force: np.ndarray) -> np.ndarray:
        phi, v, null = state.phi, state.frame.vectors, state.null_vectors
        g = force - phi * float(phi @ force) - 2.0 * v @ (v.T @ force)
        if null.shape[1]:
            g -= null @ (null.T @ force)
        return g

    def step(self, state: DynamicsState, tau: float, force: np.ndarray) -> DynamicsState:
        return sphere_step(state, self.model, tau, self.cfg.scheme, self.cfg.beta, self.cfg.gamma, force=force)

    def active_nullspace(self, phi: np.ndarray, nullspace: NullspaceBasis) -> np.ndarray:
        return tangent_basis(phi, nullspace.vectors.vectors)

    def make_state(self, phi: np.ndarray, frame: OrthonormalFrame, nullspace: NullspaceBasis, **kw) -> SphereState:
        return SphereState(
            phi=phi,
            frame=frame,
            nullspace=nullspace,
            tangent_nullspace=self.active_nullspace(phi, nullspace),
            **kw,
        )

    def init_state(
        self,
        phi0: np.ndarray,
        nullspace_hint: Optional[NullspaceBasis] = None,
        initial_frame: FrameLike = None,
    ) -> SphereState:
        phi = ensure_state(phi0, self.model.dim)
        norm = float(np.linalg.norm(phi))
        if norm == 0.0:
            raise ValueError("initial state must be nonzero to lie on the sphere")
        return super().init_state(phi / norm, nullspace_hint, initial_frame)

    def classify(self, phi: np.ndarray, residual: Optional[float] = None, converged: bool = True) -> StationaryPoint:
        if residual is None:
            residual = float(np.linalg.norm(tangent_project(phi, self.model.force(phi))))
        return super().classify(phi, residual=residual, converged=converged)


def classify_sphere_point(
    model: EnergyModel,
    phi: np.ndarray,
    k: int = 0,
    cfg: Optional[SearchConfig] = None,
    *,
    converged: bool = True,
) -> StationaryPoint:
    """Index and nullity from the Riemannian Hessian on the tangent space at phi."""
    phi = ensure_state(phi, model.dim)
    if abs(float(np.linalg.norm(phi)) - 1.0) > SPHERE_TOL:
        raise ValueError("phi must lie on the unit sphere")
    return SphereSearch(model, config_with_k(cfg, k)).classify(phi, converged=converged)


def run_sphere_search(
    model: EnergyModel,
    phi0: np.ndarray,
    cfg: Optional[SearchConfig] = None,
    *,
    nullspace_hint: Optional[NullspaceBasis] = None,
    initial_frame: FrameLike = None,
    callback: Optional[Callback] = None,
) -> SearchResult:
    return SphereSearch(model, cfg, callback=callback).run(phi0, nullspace_hint, initial_frame)
