# nphisd/linalg.py
"""
Frames, deflated smallest-eigenpair solves, nullspace detection and
subspace geometry.

Frames are stored column-wise: an (M, m) array whose columns are the
vectors v_1 ... v_m.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, lobpcg

from .exceptions import EigensolverError, FrameCollapseError, ProbeWindowError
from .model_api import EnergyModel, ensure_state

logger = logging.getLogger(__name__)

RANK_TOL = 1e-12
ORTHONORMAL_TOL = 1e-8
# above this dimension the eigensolver switches from dense eigh to LOBPCG
DENSE_LIMIT = 1200
# spectral radius estimates assemble H densely up to this dimension
RADIUS_DENSE_LIMIT = 200

Matvec = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class OrthonormalFrame:
    vectors: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.vectors, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"frame must be an (M, m) array, got shape {arr.shape}")
        object.__setattr__(self, "vectors", arr)

    @classmethod
    def empty(cls, dim: int) -> "OrthonormalFrame":
        return cls(np.zeros((dim, 0)))

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.size

    def orthonormality_error(self) -> float:
        if self.size == 0:
            return 0.0
        gram = self.vectors.T @ self.vectors
        return float(np.max(np.abs(gram - np.eye(self.size))))

    def project_out(self, x: np.ndarray) -> np.ndarray:
        if self.size == 0:
            return np.array(x, dtype=float, copy=True)
        return x - self.vectors @ (self.vectors.T @ x)

    def leak(self, other: "OrthonormalFrame") -> float:
        """max |<u, w>| over u in self, w in other."""
        if self.size == 0 or other.size == 0:
            return 0.0
        return float(np.max(np.abs(self.vectors.T @ other.vectors)))


@dataclass(eq=False)
class NullspaceBasis:
    vectors: OrthonormalFrame
    anchor_phi: np.ndarray
    zero_threshold: float
    anchor_eigenvalues: np.ndarray

    @classmethod
    def empty(cls, anchor_phi: np.ndarray, zero_threshold: float) -> "NullspaceBasis":
        return cls(OrthonormalFrame.empty(anchor_phi.shape[0]), anchor_phi.copy(), zero_threshold, np.zeros(0))

    @property
    def size(self) -> int:
        return self.vectors.size


@dataclass(eq=False)
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: OrthonormalFrame
    iterations: int
    converged: bool
    residual_norms: np.ndarray


FrameLike = Union[OrthonormalFrame, np.ndarray, Sequence[np.ndarray], None]


def as_columns(vectors: FrameLike, dim: Optional[int] = None) -> np.ndarray:
    if vectors is None:
        if dim is None:
            raise ValueError("dimension needed for an empty frame")
        return np.zeros((dim, 0))
    if isinstance(vectors, OrthonormalFrame):
        return vectors.vectors
    if isinstance(vectors, np.ndarray):
        arr = vectors.astype(float)
        return arr[:, None] if arr.ndim == 1 else arr
    vectors = list(vectors)
    if not vectors:
        if dim is None:
            raise ValueError("dimension needed for an empty frame")
        return np.zeros((dim, 0))
    return np.column_stack([np.asarray(v, dtype=float) for v in vectors])


def gram_schmidt(vectors: FrameLike, against: FrameLike = None, rank_tol: float = RANK_TOL) -> OrthonormalFrame:
    """
    Orthonormalize `vectors` in order, after removing their components
    along the (orthonormal) `against` set.

    v_i depends only on inputs 1..i. A second projection sweep cleans up
    round-off; the normalization constant is measured after the first.
    """
    cols = as_columns(vectors)
    fixed = as_columns(against, cols.shape[0])
    out = np.empty_like(cols)

    for i in range(cols.shape[1]):
        w = cols[:, i].copy()
        norm_first = 0.0
        for sweep in range(2):
            if fixed.shape[1]:
                w -= fixed @ (fixed.T @ w)
            if i:
                w -= out[:, :i] @ (out[:, :i].T @ w)
            if sweep == 0:
                norm_first = float(np.linalg.norm(w))
        if norm_first < rank_tol:
            raise FrameCollapseError(i, norm_first)
        out[:, i] = w / np.linalg.norm(w)
    return OrthonormalFrame(out)


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so that each one's largest-magnitude entry is positive."""
    if vectors.size == 0:
        return vectors
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _constraint_basis(deflate: np.ndarray, gauge: Optional[np.ndarray]) -> np.ndarray:
    if gauge is None or gauge.shape[1] == 0:
        return deflate
    if deflate.shape[1] == 0:
        return gauge
    return scipy.linalg.orth(np.hstack([deflate, gauge]))


def _residual_floor(h_norm: float) -> float:
    return 1e3 * np.finfo(float).eps * max(h_norm, 1.0)


def smallest_eigenpairs(
    model: EnergyModel,
    phi: np.ndarray,
    count: int,
    deflate: FrameLike = None,
    tol: float = 1e-8,
    max_iter: int = 500,
    *,
    matvec: Optional[Matvec] = None,
    warm_start: Optional[np.ndarray] = None,
    rng: Optional[np.random.Generator] = None,
    dense_limit: int = DENSE_LIMIT,
) -> EigenResult:
    """
    The `count` algebraically smallest eigenpairs of H(phi) on the orthogonal
    complement of `deflate` (and of the model's gauge directions).

    `matvec` replaces v -> H(phi) v, e.g. by a Riemannian Hessian.
    """
    phi = ensure_state(phi, model.dim)
    dim = model.dim
    apply_h = matvec if matvec is not None else (lambda v: model.hessian_vec(phi, v))

    defl = as_columns(deflate, dim)
    if defl.shape[1] and OrthonormalFrame(defl).orthonormality_error() > ORTHONORMAL_TOL:
        raise ValueError("deflate frame is not orthonormal")
    constraint = _constraint_basis(defl, model.gauge_directions())
    available = dim - constraint.shape[1]
    if count < 0 or count > available:
        raise ValueError(f"cannot compute {count} eigenpairs: only {available} directions remain after deflation")
    if count == 0:
        return EigenResult(np.zeros(0), OrthonormalFrame.empty(dim), 0, True, np.zeros(0))

    def project(x: np.ndarray) -> np.ndarray:
        if constraint.shape[1] == 0:
            return x
        return x - constraint @ (constraint.T @ x)

    def operator(v: np.ndarray) -> np.ndarray:
        return project(np.asarray(apply_h(project(v)), dtype=float))

    if dim <= dense_limit:
        return _dense_eigenpairs(operator, dim, count, constraint, tol)
    return _lobpcg_eigenpairs(model, operator, project, dim, count, constraint, tol, max_iter, warm_start, rng)


def _dense_eigenpairs(operator: Matvec, dim: int, count: int, constraint: np.ndarray, tol: float) -> EigenResult:
    h = np.column_stack([operator(e) for e in np.eye(dim)])
    h = 0.5 * (h + h.T)
    basis = scipy.linalg.null_space(constraint.T) if constraint.shape[1] else np.eye(dim)
    reduced = basis.T @ h @ basis
    values, coeffs = scipy.linalg.eigh(reduced, subset_by_index=[0, count - 1])
    vectors = fix_signs(basis @ coeffs)

    residuals = np.linalg.norm(h @ vectors - vectors * values, axis=0)
    floor = _residual_floor(float(np.linalg.norm(h, 2)))
    converged = bool(np.all(residuals <= np.maximum(tol * (1.0 + np.abs(values)), floor)))
    return EigenResult(values, OrthonormalFrame(vectors), 1, converged, residuals)


def _lobpcg_eigenpairs(
    model: EnergyModel,
    operator: Matvec,
    project: Matvec,
    dim: int,
    count: int,
    constraint: np.ndarray,
    tol: float,
    max_iter: int,
    warm_start: Optional[np.ndarray],
    rng: Optional[np.random.Generator],
) -> EigenResult:
    rng = rng if rng is not None else np.random.default_rng(0)
    block = min(count + max(2, count // 2), dim - constraint.shape[1])

    x0 = rng.standard_normal((dim, block))
    if warm_start is not None:
        start = as_columns(warm_start, dim)[:, :block]
        x0[:, : start.shape[1]] = start
    x0 = np.column_stack([project(x) for x in x0.T])

    def matmat(x: np.ndarray) -> np.ndarray:
        return np.column_stack([operator(col) for col in x.T])

    a_op = LinearOperator((dim, dim), matvec=operator, matmat=matmat, dtype=float)
    m_op = None
    precond = model.preconditioner()
    if precond is not None:
        def apply_precond(x: np.ndarray) -> np.ndarray:
            x = x if x.ndim == 2 else x[:, None]
            out = np.column_stack([project(precond(col)) for col in x.T])
            return out
        m_op = LinearOperator(
            (dim, dim),
            matvec=lambda x: apply_precond(x)[:, 0],
            matmat=apply_precond,
            dtype=float,
        )

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, vecs, history = lobpcg(
                a_op,
                x0,
                M=m_op,
                Y=constraint if constraint.shape[1] else None,
                tol=tol,
                maxiter=max_iter,
                largest=False,
                retLambdaHistory=True,
            )
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"LOBPCG failed: {exc}") from exc

    # Rayleigh-Ritz on the returned block, inside the constraint complement
    q, _ = np.linalg.qr(np.column_stack([project(v) for v in vecs.T]))
    aq = matmat(q)
    ritz = 0.5 * (q.T @ aq + aq.T @ q)
    values, coeffs = scipy.linalg.eigh(ritz)
    values, coeffs = values[:count], coeffs[:, :count]
    vectors = fix_signs(q @ coeffs)

    residuals = np.linalg.norm(matmat(vectors) - vectors * values, axis=0)
    floor = _residual_floor(float(np.max(np.abs(values))) if values.size else 1.0)
    converged = bool(np.all(residuals <= np.maximum(tol * (1.0 + np.abs(values)), floor)))
    if not converged:
        logger.warning(
            "LOBPCG did not reach tol %.1e in %d iterations (max residual %.3e)",
            tol, max_iter, float(np.max(residuals)),
        )
    return EigenResult(values, OrthonormalFrame(vectors), len(history), converged, residuals)


def spectral_radius(matvec: Matvec, dim: int, tol: float = 1e-3, dense_limit: int = RADIUS_DENSE_LIMIT) -> float:
    """max |lambda| of a symmetric operator: dense for small dim, ARPACK otherwise."""
    if dim <= dense_limit:
        h = np.column_stack([np.asarray(matvec(e), dtype=float) for e in np.eye(dim)])
        values = scipy.linalg.eigvalsh(0.5 * (h + h.T))
        return float(np.max(np.abs(values)))
    op = LinearOperator((dim, dim), matvec=lambda x: np.asarray(matvec(x), dtype=float), dtype=float)
    try:
        values = eigsh(op, k=1, which="LM", tol=tol, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        if exc.eigenvalues.size == 0:
            raise EigensolverError("spectral radius estimate did not converge") from exc
        values = exc.eigenvalues
    return float(np.max(np.abs(values)))


def effective_threshold(model: EnergyModel, eigenvalues: np.ndarray, zero_threshold: Optional[float] = None) -> float:
    """Absolute zero threshold, relative-scaled when the model's spectral scale is unknown."""
    threshold = zero_threshold if zero_threshold is not None else model.zero_threshold
    if not model.spectral_scale_known and eigenvalues.size:
        scale = float(np.max(np.abs(eigenvalues)))
        if scale > 0:
            threshold *= scale
    return threshold


def count_spectrum(eigenvalues: np.ndarray, threshold: float) -> tuple:
    """(index, nullity) of a spectrum window."""
    eigenvalues = np.asarray(eigenvalues)
    return int(np.sum(eigenvalues < -threshold)), int(np.sum(np.abs(eigenvalues) <= threshold))


def default_probe_count(model: EnergyModel) -> int:
    return model.expected_nullity + 4 if model.expected_nullity is not None else 8


def detect_nullspace(
    model: EnergyModel,
    phi: np.ndarray,
    probe_count: Optional[int] = None,
    zero_threshold: Optional[float] = None,
    *,
    matvec: Optional[Matvec] = None,
    deflate: FrameLike = None,
    tol: float = 1e-8,
    max_iter: int = 500,
) -> NullspaceBasis:
    """
    Eigenvectors with |lambda| <= threshold among the smallest probe_count
    eigenpairs. The window is widened by the number of negative eigenvalues
    so that unstable directions do not crowd out the zero cluster.
    """
    phi = ensure_state(phi, model.dim)
    defl = as_columns(deflate, model.dim)
    gauge = model.gauge_directions()
    available = model.dim - defl.shape[1] - (gauge.shape[1] if gauge is not None else 0)
    probe = min(probe_count or default_probe_count(model), available)

    def solve(count: int) -> EigenResult:
        return smallest_eigenpairs(model, phi, count, defl, tol, max_iter, matvec=matvec)

    result = solve(probe)
    threshold = effective_threshold(model, result.eigenvalues, zero_threshold)
    negatives = int(np.sum(result.eigenvalues < -threshold))
    if negatives and probe + negatives <= available:
        result = solve(probe + negatives)
        threshold = effective_threshold(model, result.eigenvalues, zero_threshold)

    zero = np.abs(result.eigenvalues) <= threshold
    if zero.all():
        raise ProbeWindowError(
            f"probe window too small: all {zero.size} probed eigenvalues are below {threshold:.3e}"
        )
    basis = NullspaceBasis(
        vectors=OrthonormalFrame(result.eigenvectors.vectors[:, zero]),
        anchor_phi=phi.copy(),
        zero_threshold=threshold,
        anchor_eigenvalues=result.eigenvalues[zero],
    )
    logger.debug("nullspace dim %d, threshold %.3e, window %s", basis.size, threshold, result.eigenvalues)
    return basis


def _checked_frame(frame: FrameLike) -> np.ndarray:
    cols = as_columns(frame)
    if cols.shape[1] and OrthonormalFrame(cols).orthonormality_error() > ORTHONORMAL_TOL:
        raise ValueError("principal angles need orthonormal frames")
    return cols


def principal_angles(w: FrameLike, w_hat: FrameLike) -> np.ndarray:
    """
    sin of the principal angles between span(w) and span(w_hat), ascending in angle.

    Small angles (cos^2 >= 1/2) take their sines from the singular values of
    (I - w_hat w_hat^T) w; sqrt(1 - cos^2) loses them below sqrt(eps).
    """
    a = _checked_frame(w)
    b = _checked_frame(w_hat)
    if a.shape[1] > b.shape[1]:
        raise ValueError("first subspace must not be larger than the second")
    if a.shape[1] == 0:
        return np.zeros(0)
    cosines = np.clip(scipy.linalg.svdvals(a.T @ b), 0.0, 1.0)
    direct = np.clip(scipy.linalg.svdvals(a - b @ (b.T @ a)), 0.0, 1.0)[::-1]
    sines = np.where(cosines ** 2 >= 0.5, direct, np.sqrt(1.0 - cosines ** 2))
    return np.sort(sines)


def sin_theta_frobenius(w: FrameLike, w_hat: FrameLike) -> float:
    return float(np.linalg.norm(principal_angles(w, w_hat)))
