# nphisd/schemas.py
import math
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Extra, Field, root_validator, validator


class _Strict(BaseModel):
    class Config:
        extra = Extra.forbid


# ---------- Search ----------

class SegmentPolicy(_Strict):
    # relative to the smallest nonzero |Rayleigh quotient| of the initial frame
    rayleigh_zero_tol: float = Field(1e-6, gt=0)
    # absolute bound on max |<n, H n>| over the frozen nullspace basis
    anchor_curvature_tol: float = Field(1e-6, gt=0)
    check_every: int = Field(10, gt=0)
    max_segment_steps: int = Field(500, gt=0)


class SearchConfig(_Strict):
    k: int = Field(1, ge=0)
    beta: float = Field(1.0, gt=0)
    gamma: float = Field(1.0, gt=0)
    tau: float = Field(0.01, gt=0)
    step_rule: Literal["fixed", "bb"] = "bb"
    tau_min: float = Field(1e-4, gt=0)
    tau_max: float = Field(1.0, gt=0)
    scheme: Literal["explicit", "semi_implicit"] = "explicit"
    force_tol: float = Field(1e-7, gt=0)
    max_steps: int = Field(20000, ge=1)
    # "ignore" runs plain HiSD: empty nullspace, no segment refresh
    nullspace: Literal["preserve", "ignore"] = "preserve"
    probe_count: Optional[int] = Field(None, gt=0)
    zero_threshold: Optional[float] = Field(None, gt=0)
    eig_tol: float = Field(1e-8, gt=0)
    eig_max_iter: int = Field(500, gt=0)
    debug_invariants: bool = False
    segment: SegmentPolicy = SegmentPolicy()

    @root_validator(skip_on_failure=True)
    def check_bb_bounds(cls, values):
        if values["tau_min"] > values["tau_max"]:
            raise ValueError("tau_min must not exceed tau_max")
        return values


# ---------- Landscape ----------

class DedupPolicy(_Strict):
    # on ||phi_a - phi_b|| / sqrt(M)
    distance_tol: float = Field(1e-4, gt=0)
    energy_tol: float = Field(1e-8, gt=0)


class LandscapeSection(_Strict):
    max_index: int = Field(1, ge=1)
    # perturbation size; None means 1e-2 * (1 + ||phi||_inf)
    delta: Optional[float] = Field(None, gt=0)
    seed: int = 0
    verify: bool = True
    dedup: DedupPolicy = DedupPolicy()


# ---------- Studies ----------

class ConvergenceSection(_Strict):
    T: float = Field(0.8, gt=0)
    taus: List[float] = [0.8, 0.4, 0.2, 0.1, 0.05, 0.025]
    reference_divisor: int = Field(1024, gt=1)
    # size of the kick along the first ascent direction before integrating
    perturbation: float = Field(1e-2, gt=0)

    @validator("taus")
    def check_taus(cls, taus):
        if len(taus) < 3:
            raise ValueError("need ≥ 3 step sizes")
        if any(t <= 0 for t in taus):
            raise ValueError("step sizes must be positive")
        return sorted(taus, reverse=True)


class SpectrumSection(_Strict):
    count: int = Field(8, gt=0)


# ---------- Output ----------

class OutputSection(_Strict):
    directory: Optional[str] = None
    # optional views; JSON documents and binary snapshots are always written
    formats: List[Literal["csv", "dot", "xyz"]] = ["csv", "dot", "xyz"]
    trajectory: bool = True


# ---------- Model parameters ----------

class LennardJonesParams(_Strict):
    n_particles: int = Field(7, ge=2)
    # rotational modes sit at O(||F||) away from exact stationarity
    zero_threshold: float = Field(1e-5, gt=0)


class LifshitzPetrichParams(_Strict):
    n: int = Field(128, ge=8)
    # domain is [-half_length*pi, half_length*pi)^2
    half_length: float = Field(8.0, gt=0)
    q: float = Field(2 * math.cos(math.pi / 4), gt=0)
    eps: float = -0.03
    alpha: float = 0.1
    stabilizer: float = Field(0.0, ge=0)
    zero_threshold: float = Field(1e-6, gt=0)


class GrossPitaevskiiParams(_Strict):
    n: int = Field(64, ge=8)
    half_length: float = Field(2.0, gt=0)
    omega: float = 1.0
    eta: float = Field(300.0, ge=0)
    stabilizer: float = Field(0.0, ge=0)
    # multiple of eta Re(conj(psi) w) psi taken implicitly in semi-implicit steps
    density_stabilizer: float = Field(4.0, ge=0)
    zero_threshold: float = Field(1e-6, gt=0)


class QuadraticParams(_Strict):
    eigenvalues: List[float]
    sphere: bool = False
    zero_threshold: float = Field(1e-9, gt=0)

    @validator("eigenvalues")
    def check_nonempty(cls, eigenvalues):
        if not eigenvalues:
            raise ValueError("at least one eigenvalue is required")
        return eigenvalues


class DoubleWellParams(_Strict):
    pass


class DegenerateParams(_Strict):
    active: int = Field(2, ge=1)
    free: int = Field(1, ge=0)
    stiffness: float = Field(1.0, gt=0)


class RotatingParams(_Strict):
    theta: float = 0.0
    lambda_c: float = Field(1.0, gt=0)
    lambda_3: float = Field(2.0, gt=0)


# ---------- Run configuration ----------

class ModelSection(_Strict):
    name: str
    params: Dict[str, Any] = {}
    # named seed understood by the model (e.g. "oc4", "pbp"); default "random"
    seed_state: Optional[str] = None
    initial_state: Optional[List[float]] = None
    relax: bool = True

    @root_validator(skip_on_failure=True)
    def check_params(cls, values):
        from .energies import MODEL_REGISTRY

        name = values["name"]
        if name not in MODEL_REGISTRY:
            raise ValueError(f"unknown model {name!r}; known: {', '.join(sorted(MODEL_REGISTRY))}")
        params_schema = MODEL_REGISTRY[name].params
        values["params"] = params_schema(**values["params"]).dict()
        return values


class RunConfig(_Strict):
    model: ModelSection
    search: SearchConfig = SearchConfig()
    landscape: LandscapeSection = LandscapeSection()
    convergence: ConvergenceSection = ConvergenceSection()
    spectrum: SpectrumSection = SpectrumSection()
    output: OutputSection = OutputSection()


# ---------- Reports ----------

class CheckOutcome(BaseModel):
    name: str
    value: float
    tolerance: float
    passed: bool


class ConvergenceRow(BaseModel):
    tau: float
    l2_error: float
    order: Optional[float] = None
