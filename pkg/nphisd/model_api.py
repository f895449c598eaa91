# nphisd/model_api.py
"""
Energy-model interface and the core state types.

Every model works on a flat real vector phi of fixed length M. Complex
fields are stored as stacked [Re; Im] vectors so that one real inner
product serves all models.
"""

import logging
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional

import numpy as np

from .exceptions import NonFiniteValueError, SplitUnavailableError

logger = logging.getLogger(__name__)

FD_STEP = 1e-5

StateVector = np.ndarray


class ConstraintKind(str, Enum):
    UNCONSTRAINED = "unconstrained"
    UNIT_SPHERE = "unit_sphere"


def ensure_state(phi, dim: Optional[int] = None) -> StateVector:
    """Return phi as a finite 1-D float64 array, checking its length."""
    arr = np.asarray(phi, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"state must be a 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"state has length {arr.shape[0]}, model expects {dim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError("state contains non-finite entries")
    return arr


@dataclass
class StationaryPoint:
    phi: StateVector
    energy: float
    index: int
    nullspace_dim: int
    smallest_eigenvalues: List[float]
    residual: float
    converged: bool = True
    label: str = ""

    def summary(self) -> Dict[str, object]:
        return {
            "label": self.label,
            "energy": float(self.energy),
            "index": int(self.index),
            "nullspace_dim": int(self.nullspace_dim),
            "residual": float(self.residual),
            "converged": bool(self.converged),
            "smallest_eigenvalues": [float(x) for x in self.smallest_eigenvalues],
        }


class EnergyModel(ABC):
    """
    Base class for energy landscapes E: R^M -> R.

    Subclasses supply energy() and force() = -grad E. hessian_vec() falls back
    to central differences of the force; production models override it.
    Models are immutable after construction and safe to share across threads.
    """

    name: str = "model"
    constraint_kind: ConstraintKind = ConstraintKind.UNCONSTRAINED
    zero_threshold: float = 1e-9
    spectral_scale_known: bool = True
    # hint used to size the nullspace probe window
    expected_nullity: Optional[int] = None
    has_split: bool = False
    seed_names: tuple = ("random",)

    @property
    @abstractmethod
    def dim(self) -> int:
        ...

    @abstractmethod
    def energy(self, phi: StateVector) -> float:
        ...

    @abstractmethod
    def force(self, phi: StateVector) -> np.ndarray:
        ...

    def hessian_vec(self, phi: StateVector, v: np.ndarray) -> np.ndarray:
        return hessian_vec_fd_fallback(self, phi, v)

    # ---------- linear / nonlinear split, F = L phi + N(phi) ----------
    # L may depend on a reference state `ref`, frozen over one step; the split
    # F(phi) = L_ref phi + N_ref(phi) holds for every ref, and None means no
    # state-dependent part.

    def linear_apply(self, v: np.ndarray, ref: Optional[StateVector] = None) -> np.ndarray:
        raise SplitUnavailableError("semi-implicit requires split")

    def nonlinear_force(self, phi: StateVector, ref: Optional[StateVector] = None) -> np.ndarray:
        raise SplitUnavailableError("semi-implicit requires split")

    def solve_linear(self, rhs: np.ndarray, shift: float, ref: Optional[StateVector] = None) -> np.ndarray:
        """Solve (I - shift * L_ref) x = rhs."""
        raise SplitUnavailableError("semi-implicit requires split")

    # ---------- spectral helpers ----------

    def preconditioner(self) -> Optional[Callable[[np.ndarray], np.ndarray]]:
        """Optional approximate inverse of H, applied column-wise."""
        return None

    def gauge_directions(self) -> Optional[np.ndarray]:
        """
        Orthonormal columns spanning directions removed from the state space
        (e.g. the constant mode of a mean-zero field). They are never part of
        a reported spectrum.
        """
        return None

    def dense_hessian(self, phi: StateVector) -> np.ndarray:
        phi = ensure_state(phi, self.dim)
        cols = [self.hessian_vec(phi, e) for e in np.eye(self.dim)]
        h = np.column_stack(cols)
        return 0.5 * (h + h.T)

    # ---------- states ----------

    def random_state(self, rng: np.random.Generator) -> StateVector:
        return rng.standard_normal(self.dim)

    def seed_state(self, name: str, rng: np.random.Generator) -> StateVector:
        if name == "random":
            return self.random_state(rng)
        raise ValueError(f"model {self.name!r} has no seed state {name!r}; known: {self.seed_names}")

    def defect(self, phi: StateVector) -> Optional[str]:
        """Why phi cannot count as a stationary point despite a small force, or None."""
        return None

    def invariance_checks(self, phi: StateVector, rng: np.random.Generator) -> Dict[str, float]:
        """Model-specific symmetry/consistency errors at phi, name -> error."""
        return {}

    def describe(self) -> Dict[str, object]:
        return {"name": self.name, "dim": self.dim}


# ---------- finite-difference oracles ----------

def _checked_energy(model: EnergyModel, phi: np.ndarray) -> float:
    value = float(model.energy(phi))
    if not np.isfinite(value):
        raise NonFiniteValueError("model returned non-finite value")
    return value


def _probe_directions(model: EnergyModel, rng: np.random.Generator, count: int) -> np.ndarray:
    gauge = model.gauge_directions()
    if model.dim <= 64 and gauge is None:
        return np.eye(model.dim)
    dirs = rng.standard_normal((count, model.dim))
    if gauge is not None:
        dirs -= (dirs @ gauge) @ gauge.T
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def finite_difference_force_check(
    model: EnergyModel,
    phi: StateVector,
    h: float = FD_STEP,
    directions: int = 10,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """
    Max relative error between F and central differences of -E.

    Coordinates are probed one by one for M <= 64; larger models (and models
    with gauge directions) are probed along random unit directions.
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    phi = ensure_state(phi, model.dim)
    rng = rng if rng is not None else np.random.default_rng(0)

    force = np.asarray(model.force(phi), dtype=float)
    if not np.all(np.isfinite(force)):
        raise NonFiniteValueError("model returned non-finite value")

    worst = 0.0
    for d in _probe_directions(model, rng, directions):
        e_plus = _checked_energy(model, phi + h * d)
        e_minus = _checked_energy(model, phi - h * d)
        fd = -(e_plus - e_minus) / (2.0 * h)
        exact = float(force @ d)
        worst = max(worst, abs(fd - exact) / (1.0 + abs(exact)))
    return worst


def hessian_vec_fd_fallback(
    model: EnergyModel,
    phi: StateVector,
    v: np.ndarray,
    h: float = FD_STEP,
) -> np.ndarray:
    """H v from central differences of the force, [F(phi - s v^) - F(phi + s v^)] / 2s * ||v||."""
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("direction v must be nonzero")
    phi = np.asarray(phi, dtype=float)
    step = h * (1.0 + (float(np.max(np.abs(phi))) if phi.size else 0.0))
    vhat = v / norm

    forward = phi + step * vhat
    backward = phi - step * vhat
    result = (np.asarray(model.force(backward)) - np.asarray(model.force(forward))) / (2.0 * step) * norm

    if not np.any(result) and np.array_equal(forward, phi) and np.array_equal(backward, phi):
        logger.warning("finite-difference Hessian: step %.3e vanished against phi", step)
        warnings.warn("step underflow", RuntimeWarning, stacklevel=2)
    return result


@dataclass
class ModelCheckReport:
    force_error: float
    symmetry_error: float
    linearity_error: float
    split_error: Optional[float]
    invariance: Dict[str, float] = field(default_factory=dict)


def symmetry_error(model: EnergyModel, phi: StateVector, rng: np.random.Generator) -> float:
    """|<u, Hv> - <v, Hu>| / (1 + ||Hu|| ||v||) for random u, v."""
    u = _random_admissible(model, rng)
    v = _random_admissible(model, rng)
    hu = model.hessian_vec(phi, u)
    hv = model.hessian_vec(phi, v)
    return abs(float(u @ hv) - float(v @ hu)) / (1.0 + float(np.linalg.norm(hu) * np.linalg.norm(v)))


def linearity_error(model: EnergyModel, phi: StateVector, rng: np.random.Generator) -> float:
    u = _random_admissible(model, rng)
    v = _random_admissible(model, rng)
    a, b = rng.standard_normal(2)
    combined = model.hessian_vec(phi, a * u + b * v)
    separate = a * model.hessian_vec(phi, u) + b * model.hessian_vec(phi, v)
    return float(np.linalg.norm(combined - separate)) / (1.0 + float(np.linalg.norm(separate)))


def split_error(model: EnergyModel, phi: StateVector, ref: Optional[StateVector] = None) -> Optional[float]:
    if not model.has_split:
        return None
    force = model.force(phi)
    recombined = model.linear_apply(phi, ref=ref) + model.nonlinear_force(phi, ref=ref)
    return float(np.linalg.norm(recombined - force)) / (1.0 + float(np.linalg.norm(force)))


def check_model(model: EnergyModel, phi: StateVector, rng: np.random.Generator) -> ModelCheckReport:
    phi = ensure_state(phi, model.dim)
    return ModelCheckReport(
        force_error=finite_difference_force_check(model, phi, rng=rng),
        symmetry_error=symmetry_error(model, phi, rng),
        linearity_error=linearity_error(model, phi, rng),
        split_error=split_error(model, phi),
        invariance=model.invariance_checks(phi, rng),
    )


def _random_admissible(model: EnergyModel, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(model.dim)
    gauge = model.gauge_directions()
    if gauge is not None:
        v -= gauge @ (gauge.T @ v)
    return v
