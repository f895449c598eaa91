# nphisd/dynamics.py
"""
Nullspace-preserving high-index saddle dynamics in R^M.

One search owns a DynamicsState (phi, ascent frame V, frozen nullspace basis
of the current segment) and advances it with

    phi' = beta (I - 2 V V^T) F(phi)
    v_i' = -gamma (I - v_i v_i^T - 2 sum_{j<i} v_j v_j^T - N N^T) H(phi) v_i

discretized explicitly or semi-implicitly. Segment checks decide when the
frozen nullspace basis no longer describes H(phi) and a new anchor is taken.
With an empty nullspace this is plain HiSD.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Deque, Dict, List, Optional, Tuple

import numpy as np

from .config import settings
from .exceptions import (
    EigensolverError,
    InvariantViolationError,
    NonFiniteValueError,
    SingularConfigurationError,
)
from .linalg import (
    RADIUS_DENSE_LIMIT,
    FrameLike,
    Matvec,
    NullspaceBasis,
    OrthonormalFrame,
    as_columns,
    count_spectrum,
    detect_nullspace,
    effective_threshold,
    gram_schmidt,
    sin_theta_frobenius,
    smallest_eigenpairs,
    spectral_radius,
)
from .model_api import ConstraintKind, EnergyModel, StationaryPoint, ensure_state
from .schemas import SearchConfig, SegmentPolicy

logger = logging.getLogger(__name__)

INVARIANT_TOL = 1e-10
# frame/nullspace leak above this triggers a corrective projection
DRIFT_TOL = 1e-8
BB_DENOMINATOR_FLOOR = 1e-14
# fraction of a frame vector that must survive projection at a refresh
KEEP_TOL = 1e-3
ORACLE_RANK_TOL = 1e-8
# bound on tau * max(beta, gamma) * rho(H) for explicit steps with k > 0
EXPLICIT_CFL = 1.0

History = Deque[Tuple[np.ndarray, np.ndarray]]
Callback = Callable[[Dict[str, float]], None]


def require_finite(values, what: str = "model") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError(f"{what} returned non-finite value")
    return arr


# ---------- State ----------

@dataclass(eq=False)
class DynamicsState:
    phi: np.ndarray
    frame: OrthonormalFrame
    nullspace: NullspaceBasis
    step: int = 0
    t: float = 0.0
    segment_id: int = 0
    segment_start: int = 0
    last_force_norm: float = math.inf
    # smallest nonzero |Rayleigh quotient| of the first frame
    rayleigh_scale: float = 1.0
    # spectral radius of H at the last estimate; 0 means unknown
    hessian_radius: float = 0.0
    history: History = field(default_factory=lambda: deque(maxlen=1))

    @property
    def k(self) -> int:
        return self.frame.size

    @property
    def null_vectors(self) -> np.ndarray:
        """Nullspace directions the frame must stay orthogonal to."""
        return self.nullspace.vectors.vectors

    def invariant_errors(self) -> Dict[str, float]:
        return {
            "orthonormality_error": self.frame.orthonormality_error(),
            "nullspace_leak": self.frame.leak(OrthonormalFrame(self.null_vectors)),
        }


class SegmentAction(str, Enum):
    CONTINUE = "continue"
    REFRESH = "refresh_nullspace"


@dataclass(frozen=True)
class SegmentDecision:
    action: SegmentAction
    reason: str = ""

    @property
    def refresh(self) -> bool:
        return self.action is SegmentAction.REFRESH


CONTINUE = SegmentDecision(SegmentAction.CONTINUE)


@dataclass(eq=False)
class SearchResult:
    point: StationaryPoint
    converged: bool
    steps: int
    segments: int
    trajectory: List[Dict[str, float]]
    final_state: DynamicsState


# ---------- Steppers ----------

def step_explicit(
    state: DynamicsState,
    model: EnergyModel,
    tau: float,
    beta: float = 1.0,
    gamma: float = 1.0,
    *,
    force: Optional[np.ndarray] = None,
) -> DynamicsState:
    """One explicit Euler step of the phi and frame equations, then Gram-Schmidt."""
    phi = state.phi
    f = require_finite(model.force(phi)) if force is None else force
    v = state.frame.vectors
    null = state.null_vectors

    phi_new = require_finite(phi + tau * beta * (f - 2.0 * v @ (v.T @ f)), "step")

    cols = np.empty_like(v)
    for i in range(v.shape[1]):
        vi = v[:, i]
        hv = require_finite(model.hessian_vec(phi, vi))
        rhs = hv - vi * (vi @ hv)
        if i:
            rhs -= 2.0 * v[:, :i] @ (v[:, :i].T @ hv)
        if null.shape[1]:
            rhs -= null @ (null.T @ hv)
        cols[:, i] = vi - tau * gamma * rhs

    frame = gram_schmidt(cols)
    drift = frame.leak(OrthonormalFrame(null))
    if drift > DRIFT_TOL:
        logger.warning("frame drifted %.3e into the nullspace at step %d; re-projecting", drift, state.step)
        frame = gram_schmidt(cols, against=null)

    return replace(state, phi=phi_new, frame=frame, step=state.step + 1, t=state.t + tau)


def step_semi_implicit(
    state: DynamicsState,
    model: EnergyModel,
    tau: float,
    beta: float = 1.0,
    gamma: float = 1.0,
    *,
    force: Optional[np.ndarray] = None,
) -> DynamicsState:
    """
    Linear part L implicit, everything else explicit:

        (I - tau beta L) phi_n = phi + tau beta N(phi) - 2 tau beta V V^T F(phi)
        (I - tau gamma L) v~   = v - tau gamma (H(phi_n) + L) v
                                 + tau gamma (v v^T + 2 sum_{j<i} v_j v_j^T + N N^T) H(phi_n) v

    followed by projection off the nullspace and Gram-Schmidt. State-dependent
    parts of L are frozen at phi.
    """
    phi = state.phi
    f = require_finite(model.force(phi)) if force is None else force
    v = state.frame.vectors
    null = state.null_vectors

    rhs = phi + tau * beta * require_finite(model.nonlinear_force(phi, ref=phi)) - 2.0 * tau * beta * v @ (v.T @ f)
    phi_new = require_finite(model.solve_linear(rhs, tau * beta, ref=phi), "linear solve")

    cols = np.empty_like(v)
    for i in range(v.shape[1]):
        vi = v[:, i]
        hv = require_finite(model.hessian_vec(phi_new, vi))
        lv = require_finite(model.linear_apply(vi, ref=phi))
        back = vi * (vi @ hv)
        if i:
            back += 2.0 * v[:, :i] @ (v[:, :i].T @ hv)
        if null.shape[1]:
            back += null @ (null.T @ hv)
        rhs_v = vi - tau * gamma * (hv + lv) + tau * gamma * back
        cols[:, i] = require_finite(model.solve_linear(rhs_v, tau * gamma, ref=phi), "linear solve")

    if null.shape[1]:
        cols -= null @ (null.T @ cols)
    frame = gram_schmidt(cols, against=null)
    return replace(state, phi=phi_new, frame=frame, step=state.step + 1, t=state.t + tau)


def bb_step_size(history: History, base_tau: float, tau_min: float, tau_max: float) -> float:
    """
    BB1 step |<dphi, dphi> / <dphi, dg>| from the latest pair of modified-force
    differences, clamped to [tau_min, tau_max]; base_tau without usable history.
    """
    if not history:
        return base_tau
    dphi, dg = history[-1]
    denom = float(dphi @ dg)
    scale = float(np.linalg.norm(dphi) * np.linalg.norm(dg))
    if scale == 0.0 or abs(denom) < BB_DENOMINATOR_FLOOR * scale:
        return base_tau
    return float(np.clip(abs(float(dphi @ dphi) / denom), tau_min, tau_max))


# ---------- Segments ----------

def segment_check(
    state: DynamicsState,
    model: EnergyModel,
    policy: SegmentPolicy,
    *,
    matvec: Optional[Matvec] = None,
) -> SegmentDecision:
    apply_h = matvec if matvec is not None else (lambda x: model.hessian_vec(state.phi, x))

    v = state.frame.vectors
    if v.shape[1]:
        quotients = np.array([float(col @ apply_h(col)) for col in v.T])
        smallest = float(np.min(np.abs(quotients)))
        limit = policy.rayleigh_zero_tol * state.rayleigh_scale
        logger.debug("step %d: frame Rayleigh quotients %s", state.step, quotients)
        if smallest < limit:
            return SegmentDecision(
                SegmentAction.REFRESH,
                f"frame Rayleigh quotient {smallest:.3e} below {limit:.3e}",
            )

    null = state.null_vectors
    if null.shape[1]:
        curvature = max(abs(float(col @ apply_h(col))) for col in null.T)
        # anchor eigenvalues are only certified below the detection threshold
        limit = max(policy.anchor_curvature_tol, state.nullspace.zero_threshold)
        logger.debug("step %d: nullspace curvature %.3e", state.step, curvature)
        if curvature > limit:
            return SegmentDecision(
                SegmentAction.REFRESH,
                f"nullspace curvature {curvature:.3e} above {limit:.3e}",
            )

    if state.step - state.segment_start >= policy.max_segment_steps:
        return SegmentDecision(
            SegmentAction.REFRESH,
            f"segment reached {policy.max_segment_steps} steps",
        )
    return CONTINUE


def _keep_independent(cols: np.ndarray, against: np.ndarray) -> np.ndarray:
    """Columns of `cols` projected off `against` and each other, dropping those mostly removed."""
    kept: List[np.ndarray] = []
    for col in cols.T:
        w = np.array(col, dtype=float)
        for _ in range(2):
            if against.shape[1]:
                w -= against @ (against.T @ w)
            for u in kept:
                w -= u * (u @ w)
        norm = float(np.linalg.norm(w))
        if norm >= KEEP_TOL * max(float(np.linalg.norm(col)), 1e-300):
            kept.append(w / norm)
    if not kept:
        return np.zeros((cols.shape[0], 0))
    return np.column_stack(kept)


# ---------- Classification ----------

def classify_point(
    model: EnergyModel,
    phi: np.ndarray,
    k: int = 0,
    cfg: Optional[SearchConfig] = None,
    *,
    matvec: Optional[Matvec] = None,
    deflate: FrameLike = None,
    residual: Optional[float] = None,
    converged: bool = True,
) -> StationaryPoint:
    """Index and nullity from the smallest eigenvalues of H(phi) (or of `matvec`)."""
    cfg = cfg or SearchConfig()
    phi = ensure_state(phi, model.dim)
    defl = as_columns(deflate, model.dim)
    gauge = model.gauge_directions()
    available = model.dim - defl.shape[1] - (gauge.shape[1] if gauge is not None else 0)
    count = min(k + (model.expected_nullity if model.expected_nullity is not None else 4) + 4, available)

    while True:
        eig = smallest_eigenpairs(model, phi, count, defl, cfg.eig_tol, cfg.eig_max_iter, matvec=matvec)
        threshold = effective_threshold(model, eig.eigenvalues, cfg.zero_threshold)
        index, nullity = count_spectrum(eig.eigenvalues, threshold)
        # a window without a positive entry may cut the index or nullity short
        if index + nullity < count or count >= available:
            break
        logger.debug("classification window of %d eigenvalues has no positive entry; widening", count)
        count = min(2 * count, available)

    if residual is None:
        residual = float(np.linalg.norm(model.force(phi)))
    return StationaryPoint(
        phi=phi.copy(),
        energy=float(model.energy(phi)),
        index=index,
        nullspace_dim=nullity,
        smallest_eigenvalues=[float(x) for x in eig.eigenvalues],
        residual=float(residual),
        converged=converged,
    )


# ---------- Search driver ----------

class SaddleSearch:
    """
    Index-k saddle search on an unconstrained model.

    The constrained variant (sphere.SphereSearch) overrides the hooks block:
    Hessian operator, fixed directions, residual, modified force, step and
    state construction.
    """

    def __init__(
        self,
        model: EnergyModel,
        cfg: Optional[SearchConfig] = None,
        *,
        callback: Optional[Callback] = None,
    ) -> None:
        self.model = model
        self.cfg = cfg or SearchConfig()
        self.callback = callback
        self.debug = self.cfg.debug_invariants or settings.DEBUG_INVARIANTS

    @property
    def preserving(self) -> bool:
        # k = 0 is gradient flow: no frame, so nothing to keep off the nullspace
        return self.cfg.nullspace == "preserve" and self.cfg.k > 0

    # ---------- hooks ----------

    def hessian_operator(self, phi: np.ndarray) -> Matvec:
        return lambda v: self.model.hessian_vec(phi, v)

    def fixed_directions(self, phi: np.ndarray) -> np.ndarray:
        return np.zeros((self.model.dim, 0))

    def residual_force(self, phi: np.ndarray, force: np.ndarray) -> np.ndarray:
        return force

    def modified_force(self, state: DynamicsState, force: np.ndarray) -> np.ndarray:
        v = state.frame.vectors
        return force - 2.0 * v @ (v.T @ force)

    def step(self, state: DynamicsState, tau: float, force: np.ndarray) -> DynamicsState:
        stepper = step_semi_implicit if self.cfg.scheme == "semi_implicit" else step_explicit
        return stepper(state, self.model, tau, self.cfg.beta, self.cfg.gamma, force=force)

    def active_nullspace(self, phi: np.ndarray, nullspace: NullspaceBasis) -> np.ndarray:
        return nullspace.vectors.vectors

    def make_state(self, phi: np.ndarray, frame: OrthonormalFrame, nullspace: NullspaceBasis, **kw) -> DynamicsState:
        return DynamicsState(phi=phi, frame=frame, nullspace=nullspace, **kw)

    # ---------- setup ----------

    def detect(self, phi: np.ndarray) -> NullspaceBasis:
        return detect_nullspace(
            self.model,
            phi,
            self.cfg.probe_count,
            self.cfg.zero_threshold,
            matvec=self.hessian_operator(phi),
            deflate=self.fixed_directions(phi),
            tol=self.cfg.eig_tol,
            max_iter=self.cfg.eig_max_iter,
        )

    def _fill_frame(self, phi: np.ndarray, start: np.ndarray, against: np.ndarray, warm: Optional[np.ndarray]):
        k = self.cfg.k
        missing = k - start.shape[1]
        cols = start[:, :k]
        if missing > 0:
            eig = smallest_eigenpairs(
                self.model,
                phi,
                missing,
                np.hstack([against, start]),
                self.cfg.eig_tol,
                self.cfg.eig_max_iter,
                matvec=self.hessian_operator(phi),
                warm_start=warm,
            )
            if not eig.converged:
                raise EigensolverError(
                    f"eigensolver did not converge for {missing} frame vectors "
                    f"(eigenvalues {eig.eigenvalues}, residuals {eig.residual_norms})"
                )
            cols = np.hstack([cols, eig.eigenvectors.vectors])
        return gram_schmidt(cols, against=against)

    def estimate_radius(self, phi: np.ndarray) -> float:
        """rho(H) on the complement of the fixed directions; 0 when no step cap applies."""
        if self.cfg.scheme != "explicit" or self.cfg.k == 0:
            return 0.0
        apply_h = self.hessian_operator(phi)
        fixed = self.fixed_directions(phi)

        def apply(v: np.ndarray) -> np.ndarray:
            if fixed.shape[1]:
                v = v - fixed @ (fixed.T @ v)
            out = np.asarray(apply_h(v), dtype=float)
            if fixed.shape[1]:
                out = out - fixed @ (fixed.T @ out)
            return out

        return spectral_radius(apply, self.model.dim)

    def limit_step(self, state: DynamicsState, tau: float) -> float:
        """Cap explicit saddle steps at EXPLICIT_CFL / (max(beta, gamma) rho(H))."""
        if state.hessian_radius <= 0.0:
            return tau
        cap = EXPLICIT_CFL / (max(self.cfg.beta, self.cfg.gamma) * state.hessian_radius)
        return min(tau, cap)

    def rayleigh_quotients(self, phi: np.ndarray, frame: OrthonormalFrame) -> np.ndarray:
        apply_h = self.hessian_operator(phi)
        return np.array([float(v @ apply_h(v)) for v in frame.vectors.T])

    def init_state(
        self,
        phi0: np.ndarray,
        nullspace_hint: Optional[NullspaceBasis] = None,
        initial_frame: FrameLike = None,
    ) -> DynamicsState:
        model, k = self.model, self.cfg.k
        phi = ensure_state(phi0, model.dim).copy()

        if not self.preserving:
            threshold = self.cfg.zero_threshold or model.zero_threshold
            nullspace = NullspaceBasis.empty(phi, threshold)
        elif nullspace_hint is not None:
            nullspace = nullspace_hint
        else:
            nullspace = self.detect(phi)

        against = np.hstack([self.fixed_directions(phi), self.active_nullspace(phi, nullspace)])
        gauge = model.gauge_directions()
        available = model.dim - against.shape[1] - (gauge.shape[1] if gauge is not None else 0)
        if k > available:
            raise ValueError(
                f"k = {k} with nullspace dim {nullspace.size} leaves no room: "
                f"only {available} directions available"
            )

        start = np.zeros((model.dim, 0))
        if initial_frame is not None:
            start = _keep_independent(as_columns(initial_frame, model.dim), against)
        frame = self._fill_frame(phi, start, against, None)

        quotients = self.rayleigh_quotients(phi, frame)
        nonzero = np.abs(quotients)[np.abs(quotients) > nullspace.zero_threshold]
        scale = float(nonzero.min()) if nonzero.size else 1.0
        return self.make_state(
            phi,
            frame,
            nullspace,
            rayleigh_scale=scale,
            hessian_radius=self.estimate_radius(phi),
            last_force_norm=math.inf,
        )

    # ---------- segments ----------

    def check(self, state: DynamicsState) -> SegmentDecision:
        return segment_check(state, self.model, self.cfg.segment, matvec=self.hessian_operator(state.phi))

    def refresh(self, state: DynamicsState) -> DynamicsState:
        phi = state.phi
        nullspace = self.detect(phi)
        against = np.hstack([self.fixed_directions(phi), self.active_nullspace(phi, nullspace)])
        kept = _keep_independent(state.frame.vectors, against)
        frame = self._fill_frame(phi, kept, against, state.frame.vectors)
        logger.info(
            "segment %d -> %d at step %d: nullspace dim %d -> %d, %d frame vectors refilled",
            state.segment_id, state.segment_id + 1, state.step,
            state.nullspace.size, nullspace.size, self.cfg.k - kept.shape[1],
        )
        return self.make_state(
            phi,
            frame,
            nullspace,
            step=state.step,
            t=state.t,
            segment_id=state.segment_id + 1,
            segment_start=state.step,
            last_force_norm=state.last_force_norm,
            rayleigh_scale=state.rayleigh_scale,
            hessian_radius=self.estimate_radius(phi),
            history=state.history,
        )

    # ---------- results ----------

    def classify(self, phi: np.ndarray, residual: Optional[float] = None, converged: bool = True) -> StationaryPoint:
        return classify_point(
            self.model,
            phi,
            self.cfg.k,
            self.cfg,
            matvec=self.hessian_operator(phi),
            deflate=self.fixed_directions(phi),
            residual=residual,
            converged=converged,
        )

    def record(self, state: DynamicsState, residual: float, tau: float) -> Dict[str, float]:
        row: Dict[str, float] = {
            "step": state.step,
            "t": state.t,
            "energy": float(self.model.energy(state.phi)),
            "force_norm": residual,
            "tau": tau,
            "segment_id": state.segment_id,
        }
        for i, q in enumerate(self.rayleigh_quotients(state.phi, state.frame), start=1):
            row[f"rayleigh_{i}"] = q
        row.update(state.invariant_errors())
        return row

    def assert_invariants(self, state: DynamicsState) -> None:
        errors = state.invariant_errors()
        bad = {name: value for name, value in errors.items() if value > INVARIANT_TOL}
        if bad:
            raise InvariantViolationError(f"step {state.step}: invariants violated {bad}")

    def run(
        self,
        phi0: np.ndarray,
        nullspace_hint: Optional[NullspaceBasis] = None,
        initial_frame: FrameLike = None,
    ) -> SearchResult:
        cfg = self.cfg
        state = self.init_state(phi0, nullspace_hint, initial_frame)
        logger.info(
            "search start: model=%s k=%d scheme=%s step_rule=%s nullspace dim %d",
            self.model.name, cfg.k, cfg.scheme, cfg.step_rule, state.nullspace.size,
        )

        trajectory: List[Dict[str, float]] = []
        best_phi, best_residual = state.phi, math.inf
        previous: Optional[Tuple[np.ndarray, np.ndarray]] = None
        tau = 0.0
        converged = False

        try:
            while True:
                force = require_finite(self.model.force(state.phi))
                residual = float(np.linalg.norm(self.residual_force(state.phi, force)))
                state.last_force_norm = residual

                row = self.record(state, residual, tau)
                trajectory.append(row)
                if self.callback is not None:
                    self.callback(row)

                if residual < best_residual:
                    best_phi, best_residual = state.phi, residual
                if residual < cfg.force_tol:
                    defect = self.model.defect(state.phi)
                    if defect is None:
                        converged = True
                    else:
                        logger.warning("step %d: force below tolerance but configuration rejected: %s", state.step, defect)
                    break
                if state.step >= cfg.max_steps:
                    break

                if state.step > 0 and state.step % cfg.segment.check_every == 0:
                    refreshed = False
                    if self.preserving:
                        decision = self.check(state)
                        if decision.refresh:
                            logger.info("step %d: refreshing nullspace (%s)", state.step, decision.reason)
                            state = self.refresh(state)
                            refreshed = True
                    if not refreshed and state.hessian_radius > 0.0 and self.model.dim <= RADIUS_DENSE_LIMIT:
                        state.hessian_radius = self.estimate_radius(state.phi)

                g = self.modified_force(state, force)
                if previous is not None:
                    state.history.append((state.phi - previous[0], g - previous[1]))
                previous = (state.phi, g)

                if cfg.step_rule == "bb":
                    tau = bb_step_size(state.history, cfg.tau, cfg.tau_min, cfg.tau_max)
                else:
                    tau = cfg.tau
                tau = self.limit_step(state, tau)
                state = self.step(state, tau, force)
                if self.debug:
                    self.assert_invariants(state)
        except (NonFiniteValueError, SingularConfigurationError) as exc:
            logger.warning("search aborted at step %d: %s", state.step, exc)

        if converged:
            logger.info("search converged in %d steps, residual %.3e", state.step, best_residual)
        else:
            logger.warning("search did not converge after %d steps, best residual %.3e", state.step, best_residual)

        point = self.classify(best_phi, residual=best_residual, converged=converged)
        return SearchResult(
            point=point,
            converged=converged,
            steps=state.step,
            segments=state.segment_id + 1,
            trajectory=trajectory,
            final_state=state,
        )


# ---------- Module-level entry points ----------

def config_with_k(cfg: Optional[SearchConfig], k: int) -> SearchConfig:
    cfg = cfg or SearchConfig()
    return cfg if cfg.k == k else cfg.copy(update={"k": k})


def init_search(
    model: EnergyModel,
    phi0: np.ndarray,
    k: int,
    nullspace_hint: Optional[NullspaceBasis] = None,
    cfg: Optional[SearchConfig] = None,
    *,
    initial_frame: FrameLike = None,
) -> DynamicsState:
    return SaddleSearch(model, config_with_k(cfg, k)).init_state(phi0, nullspace_hint, initial_frame)


def refresh_segment(state: DynamicsState, model: EnergyModel, cfg: Optional[SearchConfig] = None) -> DynamicsState:
    return SaddleSearch(model, config_with_k(cfg, state.k)).refresh(state)


def run_search(
    model: EnergyModel,
    phi0: np.ndarray,
    cfg: Optional[SearchConfig] = None,
    *,
    nullspace_hint: Optional[NullspaceBasis] = None,
    initial_frame: FrameLike = None,
    callback: Optional[Callback] = None,
) -> SearchResult:
    if model.constraint_kind is ConstraintKind.UNIT_SPHERE:
        raise ValueError(f"model {model.name!r} is sphere-constrained; use sphere.run_sphere_search")
    return SaddleSearch(model, cfg, callback=callback).run(phi0, nullspace_hint, initial_frame)


# ---------- Frame-preservation oracle ----------

@dataclass(frozen=True)
class PreservationReport:
    c_theta: float
    rho_k: float
    dim_intersection: int
    k: int

    @property
    def predicate(self) -> bool:
        """C_theta^2 + rho_k < 1."""
        return self.c_theta ** 2 + self.rho_k < 1.0

    @property
    def preserved(self) -> bool:
        return self.dim_intersection == self.k


def frame_preservation_oracle(
    model: EnergyModel,
    anchor: NullspaceBasis,
    phi: np.ndarray,
    frame: OrthonormalFrame,
) -> PreservationReport:
    """
    Dense check of whether a frame kept orthogonal to a frozen nullspace still
    spans k directions of the true complement W^c(phi).

    c_theta  sin-theta distance between W^n(phi) and the anchor nullspace
    rho_k    sum_j sin^2 of the angle between v_j and the j-th eigenvector of W^c
    dim      rank of the frame projected onto W^c
    """
    phi = ensure_state(phi, model.dim)
    h = model.dense_hessian(phi)
    try:
        values, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"dense eigendecomposition failed: {exc}") from exc

    zero = np.abs(values) <= anchor.zero_threshold
    w_null = vectors[:, zero]
    w_comp = vectors[:, ~zero]
    anchor_vectors = anchor.vectors.vectors

    if w_null.shape[1] <= anchor_vectors.shape[1]:
        c_theta = sin_theta_frobenius(w_null, anchor_vectors)
    else:
        c_theta = sin_theta_frobenius(anchor_vectors, w_null)

    v = frame.vectors
    k = v.shape[1]
    if k > w_comp.shape[1]:
        raise ValueError("frame is larger than the complement of the nullspace")
    overlaps = np.einsum("ij,ij->j", v, w_comp[:, :k])
    rho_k = float(np.sum(1.0 - overlaps ** 2))
    dim = int(np.linalg.matrix_rank(w_comp.T @ v, tol=ORACLE_RANK_TOL)) if k else 0
    return PreservationReport(c_theta=float(c_theta), rho_k=rho_k, dim_intersection=dim, k=k)
