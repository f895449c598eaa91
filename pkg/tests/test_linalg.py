# tests/test_linalg.py
import numpy as np
import pytest
from numpy.testing import assert_allclose

from nphisd.energies import QuadraticModel
from nphisd.exceptions import FrameCollapseError, ProbeWindowError
from nphisd.linalg import (
    OrthonormalFrame,
    count_spectrum,
    detect_nullspace,
    gram_schmidt,
    principal_angles,
    sin_theta_frobenius,
    smallest_eigenpairs,
    spectral_radius,
)


# ---------- Gram-Schmidt ----------

def test_gram_schmidt_is_orthonormal_and_ordered(rng):
    vectors = rng.standard_normal((6, 3))
    frame = gram_schmidt(vectors)
    assert frame.orthonormality_error() < 1e-14
    # v_1 depends only on the first input
    assert_allclose(frame.vectors[:, 0], vectors[:, 0] / np.linalg.norm(vectors[:, 0]))


def test_gram_schmidt_against_fixed_set(rng):
    fixed = gram_schmidt(rng.standard_normal((5, 2))).vectors
    frame = gram_schmidt(rng.standard_normal((5, 2)), against=fixed)
    assert frame.leak(OrthonormalFrame(fixed)) < 1e-14


def test_gram_schmidt_detects_dependence():
    v = np.array([[1.0, 2.0], [0.0, 0.0], [1.0, 2.0]])
    with pytest.raises(FrameCollapseError) as info:
        gram_schmidt(v)
    assert info.value.position == 1


def test_gram_schmidt_vector_inside_fixed_span_collapses():
    with pytest.raises(FrameCollapseError):
        gram_schmidt(np.array([[1.0], [0.0]]), against=np.array([[1.0], [0.0]]))


# ---------- Eigenpairs ----------

def test_smallest_eigenpairs_dense():
    model = QuadraticModel([3.0, -2.0, 0.0, 5.0])
    eig = smallest_eigenpairs(model, np.zeros(4), 2)
    assert eig.converged
    assert_allclose(eig.eigenvalues, [-2.0, 0.0], atol=1e-12)
    assert_allclose(np.abs(eig.eigenvectors.vectors[1]), [1.0, 0.0], atol=1e-12)


def test_smallest_eigenpairs_with_deflation():
    model = QuadraticModel([1.0, 2.0, 3.0])
    deflate = np.array([[1.0], [0.0], [0.0]])
    eig = smallest_eigenpairs(model, np.zeros(3), 2, deflate)
    assert_allclose(eig.eigenvalues, [2.0, 3.0], atol=1e-12)


def test_smallest_eigenpairs_rejects_oversized_request():
    model = QuadraticModel([1.0, 2.0])
    with pytest.raises(ValueError):
        smallest_eigenpairs(model, np.zeros(2), 2, np.array([[1.0], [0.0]]))


def test_smallest_eigenpairs_iterative_path():
    model = QuadraticModel(np.arange(1.0, 61.0))
    eig = smallest_eigenpairs(model, np.zeros(60), 3, tol=1e-10, dense_limit=10)
    assert_allclose(eig.eigenvalues, [1.0, 2.0, 3.0], atol=1e-6)
    assert eig.eigenvectors.orthonormality_error() < 1e-10


# ---------- Nullspace ----------

def test_detect_nullspace_finds_zero_cluster():
    model = QuadraticModel([0.0, 2.0, 0.0, 1.0, 3.0])
    basis = detect_nullspace(model, np.zeros(5))
    assert basis.size == 2
    # any rotation inside span(e_1, e_3) is a valid basis
    assert_allclose(np.linalg.norm(basis.vectors.vectors[[0, 2]], axis=0), [1.0, 1.0], atol=1e-12)
    assert basis.vectors.orthonormality_error() < 1e-12


def test_detect_nullspace_widens_past_negative_eigenvalues():
    model = QuadraticModel([-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0])
    basis = detect_nullspace(model, np.zeros(7), probe_count=3)
    assert basis.size == 1


def test_probe_window_too_small():
    model = QuadraticModel([0.0, 0.0, 0.0, 1.0])
    with pytest.raises(ProbeWindowError):
        detect_nullspace(model, np.zeros(4), probe_count=2)


@pytest.mark.parametrize("dense_limit", [200, 4])
def test_spectral_radius(rng, dense_limit):
    eigenvalues = np.array([-30.0, -1.0, 0.0, 2.0, 5.0, 12.0, 20.0, 25.0])
    basis = np.linalg.qr(rng.standard_normal((8, 8)))[0]
    matrix = (basis * eigenvalues) @ basis.T
    radius = spectral_radius(lambda v: matrix @ v, 8, tol=1e-10, dense_limit=dense_limit)
    assert radius == pytest.approx(30.0, rel=1e-6)


def test_count_spectrum():
    assert count_spectrum(np.array([-1.0, -1e-12, 0.0, 1e-12, 2.0]), 1e-9) == (1, 3)


# ---------- Subspace geometry ----------

def test_principal_angles():
    e = np.eye(3)
    assert_allclose(principal_angles(e[:, :1], e[:, :2]), [0.0], atol=1e-12)
    assert_allclose(principal_angles(e[:, 2:], e[:, :2]), [1.0], atol=1e-12)
    c, s = np.cos(0.3), np.sin(0.3)
    tilted = np.array([[c], [s], [0.0]])
    assert_allclose(sin_theta_frobenius(tilted, e[:, :1]), s, atol=1e-12)


def test_principal_angles_resolve_tiny_angles(rng):
    q, _ = np.linalg.qr(rng.standard_normal((20, 4)))
    mix, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    # same span, different basis
    assert sin_theta_frobenius(q, q @ mix) < 1e-13

    e = np.eye(3)
    tilted = np.array([[np.cos(1e-9)], [np.sin(1e-9)], [0.0]])
    assert principal_angles(tilted, e[:, :1])[0] == pytest.approx(1e-9, rel=1e-6)


def test_principal_angles_need_orthonormal_frames():
    with pytest.raises(ValueError):
        principal_angles(np.array([[2.0], [0.0]]), np.eye(2))
