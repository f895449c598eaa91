# nphisd/energies/gross_pitaevskii.py
"""
Two-dimensional Gross-Pitaevskii energy with an optical-lattice trap,

    E[psi] = mean( 1/2 |grad psi|^2 + V |psi|^2 + eta/2 |psi|^4 ),
    V(x, y) = omega/2 (x^2 + y^2) + 2 cos x + 2 cos y,

constrained to mean(|psi|^2) = 1. The state vector is [Re psi; Im psi] / sqrt(N),
so the constraint is the unit sphere ||phi|| = 1.
"""

import math
from typing import Callable, Dict, Optional

import numpy as np
from scipy import fft
from scipy.sparse.linalg import LinearOperator, cg

from ..exceptions import LinearSolveError
from ..model_api import ConstraintKind, EnergyModel, StateVector, ensure_state

CG_RTOL = 1e-12
CG_MAXITER = 2000


class GrossPitaevskiiModel(EnergyModel):
    name = "gp"
    constraint_kind = ConstraintKind.UNIT_SPHERE
    has_split = True
    # global phase
    expected_nullity = 1
    seed_names = ("random", "gaussian")

    def __init__(
        self,
        n: int = 64,
        half_length: float = 2.0,
        omega: float = 1.0,
        eta: float = 300.0,
        stabilizer: float = 0.0,
        density_stabilizer: float = 4.0,
        zero_threshold: float = 1e-6,
    ) -> None:
        self.n = n
        self.half_length = half_length
        self.omega = omega
        self.eta = eta
        self.stabilizer = stabilizer
        # c in the implicit c eta Re(conj(psi_ref) w) psi_ref; 4 covers the whole
        # density-density part of the Hessian
        self.density_stabilizer = density_stabilizer
        self.zero_threshold = zero_threshold

        self.size = n * n
        self.scale = math.sqrt(self.size)
        dx = 2.0 * math.pi * half_length / n
        self.x = -math.pi * half_length + dx * np.arange(n)
        xx, yy = np.meshgrid(self.x, self.x, indexing="ij")
        self.mesh = (xx, yy)
        self.potential = 0.5 * omega * (xx ** 2 + yy ** 2) + 2.0 * np.cos(xx) + 2.0 * np.cos(yy)

        k = 2.0 * np.pi * fft.fftfreq(n, d=dx)
        self.k2 = k[:, None] ** 2 + k[None, :] ** 2

    @property
    def dim(self) -> int:
        return 2 * self.size

    # ---------- field helpers ----------

    def wavefunction(self, phi: StateVector) -> np.ndarray:
        phi = ensure_state(phi, self.dim)
        return self._complex(phi) * self.scale

    def _complex(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return (v[: self.size] + 1j * v[self.size :]).reshape(self.n, self.n)

    def _stack(self, z: np.ndarray) -> np.ndarray:
        return np.concatenate([z.real.ravel(), z.imag.ravel()])

    def state(self, psi: np.ndarray) -> StateVector:
        phi = self._stack(np.asarray(psi, dtype=complex))
        return phi / np.linalg.norm(phi)

    def _kinetic(self, z: np.ndarray) -> np.ndarray:
        """-Lap z."""
        return fft.ifft2(self.k2 * fft.fft2(z))

    # ---------- energy and derivatives ----------

    def energy(self, phi: StateVector) -> float:
        psi = self.wavefunction(phi)
        density = np.abs(psi) ** 2
        kinetic = 0.5 * float(np.real(np.mean(np.conj(psi) * self._kinetic(psi))))
        return kinetic + float(np.mean(self.potential * density)) + 0.5 * self.eta * float(np.mean(density ** 2))

    def force(self, phi: StateVector) -> np.ndarray:
        psi = self.wavefunction(phi)
        out = self._kinetic(psi) + 2.0 * self.potential * psi + 2.0 * self.eta * np.abs(psi) ** 2 * psi
        return -self._stack(out) / self.scale

    def hessian_vec(self, phi: StateVector, v: np.ndarray) -> np.ndarray:
        psi = self.wavefunction(phi)
        w = self._complex(v)
        out = (
            self._kinetic(w)
            + 2.0 * self.potential * w
            + 2.0 * self.eta * np.abs(psi) ** 2 * w
            + 4.0 * self.eta * np.real(np.conj(psi) * w) * psi
        )
        return self._stack(out)

    # F = L_ref phi + N_ref(phi), L_ref = Lap - 2V - s - c eta D_ref with the
    # density coupling D_ref w = Re(conj(psi_ref) w) psi_ref frozen at ref
    def _density_coupling(self, w: np.ndarray, ref: Optional[StateVector]) -> np.ndarray:
        if ref is None or self.density_stabilizer == 0.0:
            return np.zeros_like(w)
        psi = self.wavefunction(ref)
        return self.density_stabilizer * self.eta * np.real(np.conj(psi) * w) * psi

    def linear_apply(self, v: np.ndarray, ref: Optional[StateVector] = None) -> np.ndarray:
        w = self._complex(v)
        out = self._kinetic(w) + (2.0 * self.potential + self.stabilizer) * w + self._density_coupling(w, ref)
        return -self._stack(out)

    def nonlinear_force(self, phi: StateVector, ref: Optional[StateVector] = None) -> np.ndarray:
        psi = self.wavefunction(phi)
        out = -2.0 * self.eta * self._stack(np.abs(psi) ** 2 * psi) / self.scale + self.stabilizer * phi
        return out + self._stack(self._density_coupling(self._complex(phi), ref))

    def solve_linear(self, rhs: np.ndarray, shift: float, ref: Optional[StateVector] = None) -> np.ndarray:
        """
        (I + shift (-Lap + 2V + s + c eta D_ref)) x = rhs by preconditioned CG.

        Without a density coupling the real and imaginary halves decouple and
        are solved separately.
        """
        if shift < 0:
            raise LinearSolveError("negative shift makes the implicit operator indefinite")
        rhs = np.asarray(rhs, dtype=float)
        diagonal = 2.0 * self.potential + self.stabilizer
        mean_diag = float(diagonal.mean())

        if ref is None or self.density_stabilizer == 0.0:
            shape = (self.n, self.n)

            def apply_half(x):
                f = x.reshape(shape)
                return (f + shift * (np.real(fft.ifft2(self.k2 * fft.fft2(f))) + diagonal * f)).ravel()

            def precondition_half(x):
                f = x.reshape(shape)
                return np.real(fft.ifft2(fft.fft2(f) / (1.0 + shift * (self.k2 + mean_diag)))).ravel()

            halves = []
            for part in (rhs[: self.size], rhs[self.size :]):
                if not np.any(part):
                    halves.append(np.zeros(self.size))
                    continue
                halves.append(self._cg(apply_half, precondition_half, part))
            return np.concatenate(halves)

        psi = self.wavefunction(ref)
        # D_ref averages to |psi|^2 / 2 over the two real directions at a point
        mean_coupling = 0.5 * self.density_stabilizer * self.eta * float(np.mean(np.abs(psi) ** 2))

        def apply_full(x):
            w = self._complex(x)
            out = w + shift * (self._kinetic(w) + diagonal * w + self._density_coupling(w, ref))
            return self._stack(out)

        def precondition_full(x):
            w = self._complex(x)
            return self._stack(fft.ifft2(fft.fft2(w) / (1.0 + shift * (self.k2 + mean_diag + mean_coupling))))

        if not np.any(rhs):
            return np.zeros(self.dim)
        return self._cg(apply_full, precondition_full, rhs)

    def _cg(self, apply, precondition, rhs: np.ndarray) -> np.ndarray:
        size = rhs.shape[0]
        operator = LinearOperator((size, size), matvec=apply, dtype=float)
        preconditioner = LinearOperator((size, size), matvec=precondition, dtype=float)
        x, info = cg(operator, rhs, rtol=CG_RTOL, atol=0.0, maxiter=CG_MAXITER, M=preconditioner)
        if info != 0:
            raise LinearSolveError(f"conjugate gradient did not converge (info={info})")
        return x

    def preconditioner(self) -> Callable[[np.ndarray], np.ndarray]:
        inverse = 1.0 / (1.0 + self.k2 + 2.0 * float(self.potential.mean()))

        # real symbol: acts on Re and Im parts independently
        def apply(x: np.ndarray) -> np.ndarray:
            return self._stack(fft.ifft2(inverse * fft.fft2(self._complex(x))))

        return apply

    # ---------- states ----------

    def random_state(self, rng: np.random.Generator) -> StateVector:
        xx, yy = self.mesh
        envelope = np.exp(-0.5 * (xx ** 2 + yy ** 2))
        noise = rng.standard_normal((2, self.n, self.n))
        return self.state(envelope * (1.0 + 0.1 * noise[0] + 0.1j * noise[1]))

    def seed_state(self, name: str, rng: np.random.Generator) -> StateVector:
        if name == "gaussian":
            xx, yy = self.mesh
            return self.state(np.exp(-0.5 * (xx ** 2 + yy ** 2)).astype(complex))
        return super().seed_state(name, rng)

    def invariance_checks(self, phi: StateVector, rng: np.random.Generator) -> Dict[str, float]:
        psi = self.wavefunction(phi)
        angle = float(rng.uniform(0.0, 2.0 * np.pi))
        rotated = self._stack(np.exp(1j * angle) * psi) / self.scale
        return {"phase_rotation": abs(self.energy(rotated) - self.energy(phi))}

    def describe(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "dim": self.dim,
            "n": self.n,
            "domain": [-math.pi * self.half_length, math.pi * self.half_length],
            "omega": self.omega,
            "eta": self.eta,
            "stabilizer": self.stabilizer,
            "density_stabilizer": self.density_stabilizer,
        }
