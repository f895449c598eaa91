# nphisd/energies/lifshitz_petrich.py
"""
Two-dimensional Lifshitz-Petrich free energy on a periodic square,

    E[u] = mean( 1/2 [(1+Lap)(q^2+Lap) u]^2 + eps/2 u^2 - alpha/3 u^3 + 1/4 u^4 )

with mean-zero u, discretized by a Fourier pseudo-spectral method.

The state vector is phi = u / sqrt(N) on an n x n grid (N = n^2), so the
Euclidean inner product of states is the normalized spatial average and
Hessian eigenvalues are those of the continuum operator.
"""

import math
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import fft, optimize

from ..exceptions import LinearSolveError
from ..model_api import EnergyModel, StateVector, ensure_state

MEAN_TOL = 1e-10
# RMS of the random perturbation added to the oc4 seed, relative to random_state
OC4_NOISE = 0.02


class LifshitzPetrichModel(EnergyModel):
    name = "lp"
    has_split = True
    expected_nullity = 2
    seed_names = ("random", "lam", "oc4")

    def __init__(
        self,
        n: int = 128,
        half_length: float = 8.0,
        q: float = 2 * math.cos(math.pi / 4),
        eps: float = -0.03,
        alpha: float = 0.1,
        stabilizer: float = 0.0,
        zero_threshold: float = 1e-6,
    ) -> None:
        self.n = n
        self.half_length = half_length
        self.q = q
        self.eps = eps
        self.alpha = alpha
        self.stabilizer = stabilizer
        self.zero_threshold = zero_threshold

        self.size = n * n
        self.scale = math.sqrt(self.size)
        dx = 2.0 * math.pi * half_length / n
        self.x = -math.pi * half_length + dx * np.arange(n)

        kx = 2.0 * np.pi * fft.fftfreq(n, d=dx)
        ky = 2.0 * np.pi * fft.rfftfreq(n, d=dx)
        k2 = kx[:, None] ** 2 + ky[None, :] ** 2
        self.symbol = (1.0 - k2) * (q * q - k2)
        self.stiffness = self.symbol ** 2
        # F = L phi + N(phi): L = -(stiffness + eps) - s, diagonal in Fourier space
        self.linear_symbol = -(self.stiffness + eps) - stabilizer
        kfull = kx[:, None] ** 2 + kx[None, :] ** 2
        self._full_stiffness = ((1.0 - kfull) * (q * q - kfull)) ** 2
        self._gauge = np.full((self.size, 1), 1.0 / self.scale)

    @property
    def dim(self) -> int:
        return self.size

    # ---------- grid helpers ----------

    def _spectral(self, symbol: np.ndarray, f: np.ndarray) -> np.ndarray:
        return fft.irfft2(symbol * fft.rfft2(f), s=f.shape)

    def field(self, phi: StateVector) -> np.ndarray:
        """Grid values u (n x n) of a state vector."""
        phi = ensure_state(phi, self.dim)
        u = phi.reshape(self.n, self.n) * self.scale
        mean = float(u.mean())
        if abs(mean) > MEAN_TOL * max(1.0, float(np.max(np.abs(u)))):
            raise ValueError(f"field is not mean-zero (mean {mean:.3e})")
        return u

    def state(self, u: np.ndarray) -> StateVector:
        u = np.asarray(u, dtype=float)
        return ((u - u.mean()) / self.scale).ravel()

    def mesh(self):
        return np.meshgrid(self.x, self.x, indexing="ij")

    # ---------- energy and derivatives ----------

    def energy(self, phi: StateVector) -> float:
        u = self.field(phi)
        w = self._spectral(self.symbol, u)
        density = 0.5 * w ** 2 + 0.5 * self.eps * u ** 2 - self.alpha / 3.0 * u ** 3 + 0.25 * u ** 4
        return float(density.mean())

    def force(self, phi: StateVector) -> np.ndarray:
        u = self.field(phi)
        variation = self._spectral(self.stiffness, u) + self.eps * u - self.alpha * u ** 2 + u ** 3
        variation -= variation.mean()
        return -(variation / self.scale).ravel()

    def hessian_vec(self, phi: StateVector, v: np.ndarray) -> np.ndarray:
        u = self.field(phi)
        w = np.asarray(v, dtype=float).reshape(self.n, self.n)
        w = w - w.mean()
        out = self._spectral(self.stiffness, w) + (self.eps - 2.0 * self.alpha * u + 3.0 * u ** 2) * w
        out -= out.mean()
        return out.ravel()

    def linear_apply(self, v: np.ndarray, ref: Optional[StateVector] = None) -> np.ndarray:
        w = np.asarray(v, dtype=float).reshape(self.n, self.n)
        return self._spectral(self.linear_symbol, w).ravel()

    def nonlinear_force(self, phi: StateVector, ref: Optional[StateVector] = None) -> np.ndarray:
        u = self.field(phi)
        nl = self.alpha * u ** 2 - u ** 3
        nl -= nl.mean()
        return (nl / self.scale).ravel() + self.stabilizer * phi

    def solve_linear(self, rhs: np.ndarray, shift: float, ref: Optional[StateVector] = None) -> np.ndarray:
        denom = 1.0 - shift * self.linear_symbol
        if float(denom.min()) <= 1e-12:
            raise LinearSolveError(f"(I - {shift:.3e} L) is singular for this step size")
        r = np.asarray(rhs, dtype=float).reshape(self.n, self.n)
        return fft.irfft2(fft.rfft2(r) / denom, s=r.shape).ravel()

    def preconditioner(self) -> Callable[[np.ndarray], np.ndarray]:
        inverse = 1.0 / (1.0 + self.stiffness)

        def apply(x: np.ndarray) -> np.ndarray:
            return self._spectral(inverse, x.reshape(self.n, self.n)).ravel()

        return apply

    def gauge_directions(self) -> np.ndarray:
        return self._gauge

    # ---------- states ----------

    def random_state(self, rng: np.random.Generator) -> StateVector:
        dx = self.x[1] - self.x[0]
        kx = 2.0 * np.pi * fft.fftfreq(self.n, d=dx)
        ky = 2.0 * np.pi * fft.rfftfreq(self.n, d=dx)
        k2 = kx[:, None] ** 2 + ky[None, :] ** 2
        noise = rng.standard_normal((self.n, self.n))
        # keep the modes between the two critical rings
        u = fft.irfft2(np.exp(-4.0 * (k2 - 1.0) * (k2 - self.q ** 2)) ** 2 * fft.rfft2(noise), s=noise.shape)
        u -= u.mean()
        u *= 0.05 / max(float(np.sqrt(np.mean(u ** 2))), 1e-300)
        return self.state(u)

    def square_amplitudes(self) -> Tuple[float, float]:
        """
        (a, b) minimizing the energy of a (cos x + cos y) + b (cos(x+y) + cos(x-y)),
        whose modes all sit on the critical rings when q = sqrt(2):

            f(a, b) = eps/2 (a^2 + b^2) - alpha a^2 b + 9/16 (a^4 + b^4) + 9/4 a^2 b^2
        """
        eps, alpha = self.eps, self.alpha

        def reduced(x):
            a, b = x
            value = 0.5 * eps * (a * a + b * b) - alpha * a * a * b
            value += 9.0 / 16.0 * (a ** 4 + b ** 4) + 2.25 * a * a * b * b
            grad = np.array([
                eps * a - 2.0 * alpha * a * b + 2.25 * a ** 3 + 4.5 * a * b * b,
                eps * b - alpha * a * a + 2.25 * b ** 3 + 4.5 * a * a * b,
            ])
            return value, grad

        result = optimize.minimize(reduced, np.array([0.1, 0.1]), jac=True, method="BFGS", options={"gtol": 1e-10})
        a, b = result.x
        return float(a), float(b)

    def seed_state(self, name: str, rng: Optional[np.random.Generator]) -> StateVector:
        xx, yy = self.mesh()
        if name == "lam":
            return self.state(0.2 * np.cos(xx))
        if name == "oc4":
            a, b = self.square_amplitudes()
            u = a * (np.cos(xx) + np.cos(yy)) + b * (np.cos(xx + yy) + np.cos(xx - yy))
            # the exactly symmetric pattern relaxes onto a symmetric saddle
            rng = rng if rng is not None else np.random.default_rng(0)
            u += OC4_NOISE * self.field(self.random_state(rng))
            return self.state(u)
        return super().seed_state(name, rng)

    def _complex_force(self, u: np.ndarray) -> np.ndarray:
        """The force from full complex FFTs, without the real-input transforms."""
        variation = fft.ifft2(self._full_stiffness * fft.fft2(u.astype(complex)))
        variation += self.eps * u - self.alpha * u ** 2 + u ** 3
        variation -= variation.mean()
        return -variation / self.scale

    def invariance_checks(self, phi: StateVector, rng: np.random.Generator) -> Dict[str, float]:
        u = self.field(phi)
        force = self.force(phi).reshape(self.n, self.n)
        full = self._complex_force(u)
        shift = int(rng.integers(1, self.n))
        shifted = self.state(np.roll(u, shift, axis=int(rng.integers(2))))
        return {
            "force_mean": abs(float(force.sum())) / self.scale,
            "reality": float(max(np.max(np.abs(full.imag)), np.max(np.abs(full.real - force)))),
            "grid_translation": abs(self.energy(shifted) - self.energy(phi)),
        }

    def describe(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "dim": self.dim,
            "n": self.n,
            "domain": [-math.pi * self.half_length, math.pi * self.half_length],
            "q": self.q,
            "eps": self.eps,
            "alpha": self.alpha,
            "stabilizer": self.stabilizer,
        }
