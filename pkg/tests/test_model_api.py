# tests/test_model_api.py
import numpy as np
import pytest
from numpy.testing import assert_allclose

from nphisd.energies import DegenerateModel, DoubleWellModel, QuadraticModel
from nphisd.exceptions import NonFiniteValueError, SplitUnavailableError
from nphisd.model_api import (
    check_model,
    ensure_state,
    finite_difference_force_check,
    hessian_vec_fd_fallback,
    split_error,
)


def test_ensure_state_rejects_bad_input():
    with pytest.raises(ValueError):
        ensure_state(np.zeros(3), 2)
    with pytest.raises(ValueError):
        ensure_state(np.zeros((2, 2)))
    with pytest.raises(NonFiniteValueError):
        ensure_state([1.0, np.nan])


def test_force_matches_finite_differences(rng):
    for model in (DoubleWellModel(), DegenerateModel(active=3, free=2)):
        phi = rng.standard_normal(model.dim)
        assert finite_difference_force_check(model, phi, rng=rng) <= 1e-5


def test_force_check_rejects_nonpositive_step(double_well):
    with pytest.raises(ValueError):
        finite_difference_force_check(double_well, np.array([0.3, 0.1]), h=0.0)


def test_fd_hessian_matches_analytic(rng):
    model = DegenerateModel(active=3, free=1)
    phi = rng.standard_normal(model.dim)
    v = rng.standard_normal(model.dim)
    assert_allclose(hessian_vec_fd_fallback(model, phi, v), model.hessian_vec(phi, v), rtol=1e-6, atol=1e-6)


def test_fd_hessian_rejects_zero_direction(double_well):
    with pytest.raises(ValueError):
        hessian_vec_fd_fallback(double_well, np.array([0.5, 0.5]), np.zeros(2))
    with pytest.raises(ValueError):
        hessian_vec_fd_fallback(double_well, np.array([0.5, 0.5]), np.ones(2), h=-1.0)


def test_models_without_split_refuse_split_calls(double_well):
    with pytest.raises(SplitUnavailableError, match="semi-implicit requires split"):
        double_well.linear_apply(np.ones(2))
    with pytest.raises(SplitUnavailableError):
        double_well.solve_linear(np.ones(2), 0.1)
    assert split_error(double_well, np.ones(2)) is None


def test_check_model_report(rng):
    model = QuadraticModel([-1.0, 0.0, 2.0])
    report = check_model(model, rng.standard_normal(3), rng)
    assert report.force_error <= 1e-8
    assert report.symmetry_error <= 1e-12
    assert report.linearity_error <= 1e-12
    assert report.split_error <= 1e-14
    assert report.invariance == {}


def test_dense_hessian_is_symmetric(rng):
    model = DegenerateModel(active=2, free=2)
    h = model.dense_hessian(rng.standard_normal(model.dim))
    assert_allclose(h, h.T)
    # free coordinates never enter the energy
    assert_allclose(h[2:], 0.0)
