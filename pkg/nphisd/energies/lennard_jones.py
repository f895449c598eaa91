# nphisd/energies/lennard_jones.py
"""
Lennard-Jones cluster with pair potential nu(r) = r^-12 - 2 r^-6
(well depth 1 at r = 1).

The state is the reduced coordinate xi of length 3N - 3: particle
positions are x = J xi with J an orthonormal basis of the zero
center-of-mass subspace, so translations are removed and only the three
rotations remain as Hessian zero modes at a stationary point.
"""

from typing import Dict, Optional

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform
from scipy.spatial.transform import Rotation

from ..exceptions import SingularConfigurationError
from ..model_api import EnergyModel, StateVector, ensure_state

MIN_DISTANCE = 1e-6
# particles closer than this are bonded; a stationary point must be one cluster
BOND_CUTOFF = 2.0
RANDOM_DENSITY = 0.5
RANDOM_MIN_DISTANCE = 0.7
RANDOM_ATTEMPTS = 10000


class LennardJonesCluster(EnergyModel):
    name = "lj"
    seed_names = ("random", "pbp")

    def __init__(self, n_particles: int = 7, zero_threshold: float = 1e-5) -> None:
        if n_particles < 2:
            raise ValueError("a cluster needs at least two particles")
        self.n_particles = n_particles
        self.zero_threshold = zero_threshold
        self.expected_nullity = 3 if n_particles > 2 else 2
        com = np.kron(np.ones((1, n_particles)), np.eye(3))
        self.gauge = scipy.linalg.null_space(com)

    @property
    def dim(self) -> int:
        return 3 * self.n_particles - 3

    # ---------- coordinates ----------

    def positions(self, xi: StateVector) -> np.ndarray:
        xi = ensure_state(xi, self.dim)
        return (self.gauge @ xi).reshape(self.n_particles, 3)

    def reduce(self, positions: np.ndarray) -> StateVector:
        x = np.asarray(positions, dtype=float).reshape(self.n_particles, 3)
        x = x - x.mean(axis=0)
        return self.gauge.T @ x.ravel()

    def _pairs(self, xi: StateVector):
        x = self.positions(xi)
        diff = x[:, None, :] - x[None, :, :]
        r = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(r, np.inf)
        if r.min() < MIN_DISTANCE:
            raise SingularConfigurationError("singular configuration")
        return diff, r

    # ---------- energy and derivatives ----------

    def energy(self, xi: StateVector) -> float:
        _, r = self._pairs(xi)
        inv6 = r ** -6
        return 0.5 * float(np.sum(inv6 * inv6 - 2.0 * inv6))

    def force(self, xi: StateVector) -> np.ndarray:
        diff, r = self._pairs(xi)
        # nu'(r) / r
        scale = -12.0 * r ** -14 + 12.0 * r ** -8
        grad = np.sum(scale[..., None] * diff, axis=1)
        return -self.gauge.T @ grad.ravel()

    def hessian_vec(self, xi: StateVector, v: np.ndarray) -> np.ndarray:
        diff, r = self._pairs(xi)
        u = (self.gauge @ np.asarray(v, dtype=float)).reshape(self.n_particles, 3)
        du = u[:, None, :] - u[None, :, :]
        unit = diff / r[..., None]
        along = np.sum(unit * du, axis=-1)

        radial = 156.0 * r ** -14 - 84.0 * r ** -8
        transverse = -12.0 * r ** -14 + 12.0 * r ** -8
        block = (radial * along)[..., None] * unit + transverse[..., None] * (du - along[..., None] * unit)
        return self.gauge.T @ np.sum(block, axis=1).ravel()

    # ---------- states ----------

    def random_state(self, rng: np.random.Generator) -> StateVector:
        """Uniform positions in a cube at number density RANDOM_DENSITY, no pair closer than RANDOM_MIN_DISTANCE."""
        side = (self.n_particles / RANDOM_DENSITY) ** (1.0 / 3.0)
        for _ in range(RANDOM_ATTEMPTS):
            x = rng.uniform(0.0, side, (self.n_particles, 3))
            if pdist(x).min() >= RANDOM_MIN_DISTANCE:
                return self.reduce(x)
        raise ValueError(f"no admissible random configuration in {RANDOM_ATTEMPTS} attempts")

    def fragments(self, xi: StateVector) -> int:
        """Connected components of the graph joining particles closer than BOND_CUTOFF."""
        close = squareform(pdist(self.positions(xi))) < BOND_CUTOFF
        count, _ = connected_components(csr_matrix(close), directed=False)
        return int(count)

    def defect(self, xi: StateVector) -> Optional[str]:
        count = self.fragments(xi)
        if count > 1:
            return f"cluster fell apart into {count} fragments"
        return None

    def seed_state(self, name: str, rng: np.random.Generator) -> StateVector:
        if name == "pbp":
            if self.n_particles != 7:
                raise ValueError("the pentagonal bipyramid seed needs seven particles")
            return self.reduce(pentagonal_bipyramid())
        return super().seed_state(name, rng)

    def invariance_checks(self, xi: StateVector, rng: np.random.Generator) -> Dict[str, float]:
        rot = Rotation.random(random_state=int(rng.integers(2**31))).as_matrix()
        rotated = self.reduce(self.positions(xi) @ rot.T)
        return {"rotation": abs(self.energy(rotated) - self.energy(xi))}

    def describe(self) -> Dict[str, object]:
        return {"name": self.name, "dim": self.dim, "n_particles": self.n_particles}


def pentagonal_bipyramid() -> np.ndarray:
    """Seven particles: a unit-edge pentagon plus two apexes at unit distance."""
    radius = 1.0 / (2.0 * np.sin(np.pi / 5.0))
    height = np.sqrt(1.0 - radius ** 2)
    angles = 2.0 * np.pi * np.arange(5) / 5.0
    ring = np.column_stack([radius * np.cos(angles), radius * np.sin(angles), np.zeros(5)])
    return np.vstack([ring, [[0.0, 0.0, height], [0.0, 0.0, -height]]])
