# tests/test_lennard_jones.py
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.spatial.distance import pdist

from nphisd.dynamics import classify_point, run_search
from nphisd.energies import LennardJonesCluster, pentagonal_bipyramid
from nphisd.energies.lennard_jones import RANDOM_MIN_DISTANCE
from nphisd.exceptions import SingularConfigurationError
from nphisd.landscape import build_landscape, random_minima, relax, upward_search
from nphisd.model_api import finite_difference_force_check, symmetry_error
from nphisd.schemas import LandscapeSection, SearchConfig


def test_pair_at_unit_distance():
    model = LennardJonesCluster(n_particles=2)
    xi = model.reduce([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    assert model.energy(xi) == pytest.approx(-1.0)
    assert_allclose(model.force(xi), 0.0, atol=1e-12)


def test_unit_triangle():
    model = LennardJonesCluster(n_particles=3)
    h = np.sqrt(3.0) / 2.0
    xi = model.reduce([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]])
    assert model.energy(xi) == pytest.approx(-3.0)
    assert_allclose(model.force(xi), 0.0, atol=1e-12)


def test_reduced_coordinates_drop_translations(rng):
    model = LennardJonesCluster()
    assert model.dim == 18
    x = pentagonal_bipyramid()
    xi = model.reduce(x)
    assert_allclose(model.positions(xi), x - x.mean(axis=0), atol=1e-12)
    assert model.energy(model.reduce(x + rng.standard_normal(3))) == pytest.approx(model.energy(xi), abs=1e-12)


def test_derivative_oracles(rng):
    model = LennardJonesCluster()
    for _ in range(10):
        xi = model.random_state(rng)
        assert finite_difference_force_check(model, xi, rng=rng) <= 1e-5
        assert symmetry_error(model, xi, rng) <= 1e-9


def test_rotation_leaves_energy_unchanged(rng):
    model = LennardJonesCluster()
    checks = model.invariance_checks(model.random_state(rng), rng)
    assert checks["rotation"] <= 1e-10


def test_coincident_particles_are_singular():
    model = LennardJonesCluster(n_particles=2)
    with pytest.raises(SingularConfigurationError):
        model.energy(model.reduce(np.zeros((2, 3))))


def test_pbp_seed_needs_seven_particles(rng):
    with pytest.raises(ValueError):
        LennardJonesCluster(n_particles=6).seed_state("pbp", rng)


def test_random_state_keeps_particles_apart(rng):
    model = LennardJonesCluster()
    for _ in range(20):
        x = model.positions(model.random_state(rng))
        assert pdist(x).min() >= RANDOM_MIN_DISTANCE - 1e-12


def test_fragments_and_defect():
    model = LennardJonesCluster()
    x = pentagonal_bipyramid()
    assert model.fragments(model.reduce(x)) == 1
    assert model.defect(model.reduce(x)) is None
    x[6] += [0.0, 0.0, 10.0]
    assert model.fragments(model.reduce(x)) == 2
    assert "2 fragments" in model.defect(model.reduce(x))


def test_dissociated_pair_is_not_converged():
    model = LennardJonesCluster(n_particles=2)
    xi = model.reduce([[0.0, 0.0, 0.0], [20.0, 0.0, 0.0]])
    # the tail force at r = 20 is already below force_tol
    assert np.linalg.norm(model.force(xi)) < 1e-7
    result = run_search(model, xi, SearchConfig(k=0, nullspace="ignore"))
    assert not result.converged
    assert not result.point.converged
    assert result.steps == 0


# ---------- LJ7 landscape ----------

LJ7_CFG = dict(k=3, tau=1e-3, tau_min=1e-5, tau_max=0.05, max_steps=100000,
               segment={"anchor_curvature_tol": 1e-2})


@pytest.mark.slow
def test_lj7_minimum_and_index3_saddle(rng):
    model = LennardJonesCluster()
    cfg = SearchConfig(**LJ7_CFG)
    minimum = relax(model, model.seed_state("pbp", rng), cfg).point
    assert minimum.converged
    assert minimum.energy == pytest.approx(-16.505, abs=0.01)
    assert (minimum.index, minimum.nullspace_dim) == (0, 3)

    saddle = upward_search(model, minimum, 3, cfg)
    assert saddle.converged
    assert saddle.residual < 1e-7
    assert saddle.index == 3
    assert saddle.energy > minimum.energy
    assert model.fragments(saddle.phi) == 1
    check = classify_point(model, saddle.phi, 3, cfg)
    assert check.index == 3


@pytest.mark.slow
def test_index3_saddle_above_bicapped_bipyramid():
    model = LennardJonesCluster()
    cfg = SearchConfig(**LJ7_CFG)
    minimum = None
    for point in random_minima(model, 200, cfg, np.random.default_rng(0)):
        if abs(point.energy + 15.533) < 0.05:
            minimum = point
            break
    assert minimum is not None, "no random start relaxed to the -15.53 minimum"
    assert (minimum.index, minimum.nullspace_dim) == (0, 3)

    saddle = upward_search(model, minimum, 3, cfg)
    assert saddle.converged
    assert saddle.index == 3
    assert saddle.residual < 1e-7
    assert saddle.energy == pytest.approx(-13.8, abs=0.05)


@pytest.mark.slow
def test_lj7_index3_landscape(rng):
    model = LennardJonesCluster()
    cfg = SearchConfig(**LJ7_CFG)
    minimum = relax(model, model.seed_state("pbp", rng), cfg).point
    graph = build_landscape(model, minimum, 3, cfg, LandscapeSection(max_index=3))
    for edge in graph.edges:
        parent, child = graph.nodes[edge.parent], graph.nodes[edge.child]
        if edge.kind == "downward":
            assert parent.index > child.index
        else:
            assert parent.index < child.index
    indices = [node.index for node in graph.nodes.values()]
    assert indices.count(0) >= 2
    assert indices.count(1) >= 2
    assert all(model.fragments(node.phi) == 1 for node in graph.nodes.values())
