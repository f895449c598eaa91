# nphisd/energies/synthetic.py
"""
Small closed-form landscapes used as oracles:

- QuadraticModel: E = 1/2 phi^T A phi with a prescribed spectrum (zeros allowed)
- RotatingNullspaceModel: quadratic whose nullspace is e_1 rotated by theta
- DoubleWellModel: E = 1/4 (x^2 - 1)^2 + 1/2 y^2
- DegenerateModel: smooth non-quadratic energy that ignores its last coordinates
"""

from typing import Dict, Optional, Sequence

import numpy as np

from ..model_api import ConstraintKind, EnergyModel, StateVector, ensure_state


class QuadraticModel(EnergyModel):
    name = "quadratic"
    has_split = True

    def __init__(
        self,
        eigenvalues: Sequence[float],
        basis: Optional[np.ndarray] = None,
        sphere: bool = False,
        zero_threshold: float = 1e-9,
    ) -> None:
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        m = self.eigenvalues.size
        self.basis = np.eye(m) if basis is None else np.asarray(basis, dtype=float)
        self.matrix = (self.basis * self.eigenvalues) @ self.basis.T
        self.matrix = 0.5 * (self.matrix + self.matrix.T)
        self.zero_threshold = zero_threshold
        if sphere:
            self.constraint_kind = ConstraintKind.UNIT_SPHERE

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def energy(self, phi: StateVector) -> float:
        phi = ensure_state(phi, self.dim)
        return 0.5 * float(phi @ self.matrix @ phi)

    def force(self, phi: StateVector) -> np.ndarray:
        phi = ensure_state(phi, self.dim)
        return -self.matrix @ phi

    def hessian_vec(self, phi: StateVector, v: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)

    def dense_hessian(self, phi: StateVector) -> np.ndarray:
        return self.matrix.copy()

    # F = L phi with L = -A, N = 0
    def linear_apply(self, v: np.ndarray, ref: Optional[StateVector] = None) -> np.ndarray:
        return -self.matrix @ v

    def nonlinear_force(self, phi: StateVector, ref: Optional[StateVector] = None) -> np.ndarray:
        return np.zeros(self.dim)

    def solve_linear(self, rhs: np.ndarray, shift: float, ref: Optional[StateVector] = None) -> np.ndarray:
        return np.linalg.solve(np.eye(self.dim) + shift * self.matrix, rhs)

    def random_state(self, rng: np.random.Generator) -> StateVector:
        phi = rng.standard_normal(self.dim)
        if self.constraint_kind is ConstraintKind.UNIT_SPHERE:
            phi /= np.linalg.norm(phi)
        return phi

    def describe(self) -> Dict[str, object]:
        return {"name": self.name, "dim": self.dim, "eigenvalues": self.eigenvalues.tolist()}


def rotation(theta: float, dim: int = 3) -> np.ndarray:
    """Rotation by theta in the (e_1, e_2) plane."""
    r = np.eye(dim)
    c, s = np.cos(theta), np.sin(theta)
    r[:2, :2] = [[c, -s], [s, c]]
    return r


class RotatingNullspaceModel(QuadraticModel):
    """
    H(theta) = R diag(0, lambda_c, lambda_3) R^T. The nullspace is
    (cos theta, sin theta, 0), so the frozen e_1 direction has curvature
    <e_1, H e_1> = lambda_c sin^2 theta.
    """

    name = "rotating"

    def __init__(self, theta: float = 0.0, lambda_c: float = 1.0, lambda_3: float = 2.0) -> None:
        self.theta = float(theta)
        self.lambda_c = float(lambda_c)
        super().__init__([0.0, lambda_c, lambda_3], basis=rotation(theta))

    def nullspace_direction(self) -> np.ndarray:
        return self.basis[:, 0].copy()

    def anchor_curvature(self) -> float:
        return self.lambda_c * np.sin(self.theta) ** 2


class DoubleWellModel(EnergyModel):
    name = "double_well"
    seed_names = ("random", "minimum", "saddle")

    @property
    def dim(self) -> int:
        return 2

    def energy(self, phi: StateVector) -> float:
        x, y = ensure_state(phi, 2)
        return 0.25 * (x * x - 1.0) ** 2 + 0.5 * y * y

    def force(self, phi: StateVector) -> np.ndarray:
        x, y = ensure_state(phi, 2)
        return np.array([-(x * x - 1.0) * x, -y])

    def hessian_vec(self, phi: StateVector, v: np.ndarray) -> np.ndarray:
        x, _ = ensure_state(phi, 2)
        return np.array([3.0 * x * x - 1.0, 1.0]) * np.asarray(v, dtype=float)

    def seed_state(self, name: str, rng: np.random.Generator) -> StateVector:
        if name == "minimum":
            return np.array([1.0, 0.0])
        if name == "saddle":
            return np.array([0.0, 0.0])
        return super().seed_state(name, rng)


class DegenerateModel(EnergyModel):
    """
    E(phi) = 1/4 (x_1^2 - 1)^2 + sum_{i>1} (s/2 x_i^2 + 1/4 x_i^4) + 1/2 x_1^2 x_2^2
    on the first `active` coordinates; the last `free` coordinates never
    enter, so every Hessian has them as an exact nullspace.
    """

    name = "degenerate"
    seed_names = ("random", "minimum", "saddle")

    def __init__(self, active: int = 2, free: int = 1, stiffness: float = 1.0) -> None:
        self.active = active
        self.free = free
        self.stiffness = stiffness
        self.expected_nullity = free

    @property
    def dim(self) -> int:
        return self.active + self.free

    def _split(self, phi: StateVector):
        phi = ensure_state(phi, self.dim)
        return phi[: self.active]

    def energy(self, phi: StateVector) -> float:
        x = self._split(phi)
        rest = x[1:]
        value = 0.25 * (x[0] ** 2 - 1.0) ** 2
        value += float(np.sum(0.5 * self.stiffness * rest ** 2 + 0.25 * rest ** 4))
        if rest.size:
            value += 0.5 * x[0] ** 2 * rest[0] ** 2
        return float(value)

    def force(self, phi: StateVector) -> np.ndarray:
        x = self._split(phi)
        grad = np.zeros(self.dim)
        grad[0] = (x[0] ** 2 - 1.0) * x[0]
        if self.active > 1:
            rest = x[1:]
            grad[1 : self.active] = self.stiffness * rest + rest ** 3
            grad[0] += x[0] * rest[0] ** 2
            grad[1] += x[0] ** 2 * rest[0]
        return -grad

    def hessian_vec(self, phi: StateVector, v: np.ndarray) -> np.ndarray:
        x = self._split(phi)
        v = np.asarray(v, dtype=float)
        h = np.zeros((self.active, self.active))
        h[0, 0] = 3.0 * x[0] ** 2 - 1.0
        if self.active > 1:
            rest = x[1:]
            idx = np.arange(1, self.active)
            h[idx, idx] = self.stiffness + 3.0 * rest ** 2
            h[0, 0] += rest[0] ** 2
            h[1, 1] += x[0] ** 2
            h[0, 1] = h[1, 0] = 2.0 * x[0] * rest[0]
        out = np.zeros(self.dim)
        out[: self.active] = h @ v[: self.active]
        return out

    def seed_state(self, name: str, rng: np.random.Generator) -> StateVector:
        if name == "minimum":
            phi = np.zeros(self.dim)
            phi[0] = 1.0
            return phi
        if name == "saddle":
            return np.zeros(self.dim)
        return super().seed_state(name, rng)
