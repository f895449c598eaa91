# tests/test_gross_pitaevskii.py
import numpy as np
import pytest
from numpy.testing import assert_allclose

from nphisd.energies import GrossPitaevskiiModel
from nphisd.exceptions import LinearSolveError
from nphisd.landscape import upward_search
from nphisd.model_api import ConstraintKind, check_model, split_error
from nphisd.schemas import SearchConfig
from nphisd.sphere import classify_sphere_point, run_sphere_search, tangent_project


@pytest.fixture
def small_gp():
    return GrossPitaevskiiModel(n=16)


def test_lattice_potential():
    model = GrossPitaevskiiModel(n=16, omega=0.0)
    # grid index 8 is x = 0, index 12 is x = pi
    assert model.potential[8, 8] == pytest.approx(4.0)
    assert model.potential[12, 8] == pytest.approx(0.0, abs=1e-12)


def test_uniform_density_energy():
    model = GrossPitaevskiiModel(n=16, omega=0.0, eta=300.0)
    phi = model.state(np.ones((16, 16), dtype=complex))
    assert np.linalg.norm(phi) == pytest.approx(1.0)
    assert_allclose(np.abs(model.wavefunction(phi)), 1.0)
    assert model.energy(phi) == pytest.approx(150.0, rel=1e-12)


def test_state_is_on_the_unit_sphere(small_gp, rng):
    assert small_gp.constraint_kind is ConstraintKind.UNIT_SPHERE
    for name in ("random", "gaussian"):
        assert np.linalg.norm(small_gp.seed_state(name, rng)) == pytest.approx(1.0)


def test_oracles_and_phase_invariance(small_gp, rng):
    for _ in range(10):
        phi = small_gp.random_state(rng)
        report = check_model(small_gp, phi, rng)
        assert report.force_error <= 1e-5
        assert report.symmetry_error <= 1e-9
        assert report.split_error <= 1e-10
        assert report.invariance["phase_rotation"] <= 1e-10


def test_solve_linear_inverts_implicit_operator(small_gp, rng):
    x = rng.standard_normal(small_gp.dim)
    shift = 0.01
    rhs = x - shift * small_gp.linear_apply(x)
    assert_allclose(small_gp.solve_linear(rhs, shift), x, atol=1e-8)


def test_solve_linear_rejects_negative_shift(small_gp):
    with pytest.raises(LinearSolveError):
        small_gp.solve_linear(np.ones(small_gp.dim), -0.1)


def test_global_phase_is_a_tangent_zero_mode(small_gp, rng):
    phi = small_gp.random_state(rng)
    # i psi: the generator of the global phase rotation
    psi = small_gp.wavefunction(phi)
    mode = small_gp._stack(1j * psi) / small_gp.scale
    assert abs(float(mode @ phi)) < 1e-12
    assert_allclose(small_gp.force(phi) @ mode, 0.0, atol=1e-9)


def test_split_holds_for_any_frozen_density(small_gp, rng):
    phi = small_gp.random_state(rng)
    ref = small_gp.random_state(rng)
    assert split_error(small_gp, phi, ref=ref) <= 1e-10
    assert split_error(small_gp, phi, ref=phi) <= 1e-10
    # the frozen coupling moves force between the linear and nonlinear parts
    moved = small_gp.linear_apply(phi, ref=phi) - small_gp.linear_apply(phi)
    assert np.linalg.norm(moved) > 0.0


def test_solve_linear_with_frozen_density(small_gp, rng):
    ref = small_gp.random_state(rng)
    x = rng.standard_normal(small_gp.dim)
    shift = 0.02
    rhs = x - shift * small_gp.linear_apply(x, ref=ref)
    assert_allclose(small_gp.solve_linear(rhs, shift, ref=ref), x, atol=1e-8)
    assert_allclose(small_gp.solve_linear(np.zeros(small_gp.dim), shift, ref=ref), 0.0)


def test_density_stabilizer_off_matches_plain_split(rng):
    model = GrossPitaevskiiModel(n=16, density_stabilizer=0.0)
    phi = model.random_state(rng)
    assert_allclose(model.linear_apply(phi, ref=phi), model.linear_apply(phi))
    assert_allclose(model.nonlinear_force(phi, ref=phi), model.nonlinear_force(phi))


@pytest.mark.slow
def test_ground_state_and_index4_search():
    model = GrossPitaevskiiModel(n=64)
    rng = np.random.default_rng(0)
    cfg = SearchConfig(k=0, tau=1e-3, tau_min=1e-4, tau_max=0.02, scheme="semi_implicit", max_steps=40000)

    ground = run_sphere_search(model, model.seed_state("gaussian", rng), cfg)
    assert ground.converged
    assert ground.point.residual < 1e-7
    assert ground.point.index == 0
    assert ground.point.nullspace_dim >= 1
    residual = tangent_project(ground.point.phi, model.force(ground.point.phi))
    assert np.linalg.norm(residual) < 1e-7

    saddle = upward_search(model, ground.point, 4, cfg)
    assert saddle.converged
    assert saddle.index == 4
    assert saddle.energy > ground.point.energy
    check = classify_sphere_point(model, saddle.phi, 4, cfg)
    assert check.index == 4
