# tests/test_landscape.py
import numpy as np
import pytest
from numpy.testing import assert_allclose

from nphisd.dynamics import classify_point
from nphisd.energies import DoubleWellModel, QuadraticModel
from nphisd.exceptions import VerificationError
from nphisd.exporters import canonical_json
from nphisd.landscape import (
    OFF_TARGET,
    LandscapeGraph,
    build_landscape,
    downward_search,
    upward_search,
    verify_landscape,
)
from nphisd.schemas import DedupPolicy, LandscapeSection, SearchConfig


@pytest.fixture
def saddle(double_well):
    return classify_point(double_well, np.zeros(2), k=1)


def double_well_landscape(model, saddle, fast_cfg, jobs=1):
    return build_landscape(model, saddle, 1, fast_cfg, LandscapeSection(max_index=1), config_hash="abc", jobs=jobs)


def test_downward_from_double_well_saddle(double_well, saddle, fast_cfg):
    children = downward_search(double_well, saddle, fast_cfg)
    assert len(children) == 2
    xs = sorted(float(child.phi[0]) for child in children)
    assert_allclose(xs, [-1.0, 1.0], atol=1e-8)
    assert all(child.index == 0 and child.converged for child in children)


def test_double_well_landscape_shape(double_well, saddle, fast_cfg):
    graph = double_well_landscape(double_well, saddle, fast_cfg)
    assert len(graph.nodes) == 3
    assert len(graph.edges) == 2
    assert sorted(node.index for node in graph.nodes.values()) == [0, 0, 1]
    assert {e.kind for e in graph.edges} == {"downward"}
    assert all(e.parent == 0 for e in graph.edges)
    labels = sorted(node.label for node in graph.nodes.values())
    assert labels == ["GLM-1", "GLM-2", "GSP1-1"]
    assert graph.unconverged == [] and graph.anomalies == []


def test_landscape_serialization_is_deterministic(double_well, saddle, fast_cfg):
    first = double_well_landscape(double_well, saddle, fast_cfg).to_dict()
    second = double_well_landscape(DoubleWellModel(), saddle, fast_cfg, jobs=2).to_dict()
    assert canonical_json(first) == canonical_json(second)
    assert first["metadata"]["config_hash"] == "abc"
    assert [n["energy"] for n in first["nodes"]] == sorted(n["energy"] for n in first["nodes"])


def test_verification_catches_tampering(double_well, saddle, fast_cfg):
    graph = double_well_landscape(double_well, saddle, fast_cfg)
    minimum = next(i for i, node in graph.nodes.items() if node.index == 0)
    graph.nodes[minimum].nullspace_dim = 1
    with pytest.raises(VerificationError):
        verify_landscape(double_well, graph, fast_cfg)


def test_non_monotone_edge_is_rejected(double_well, saddle, fast_cfg):
    graph = double_well_landscape(double_well, saddle, fast_cfg)
    edge = graph.edges[0]
    graph.connect(edge.child, edge.parent, 0, 1, "downward")
    with pytest.raises(VerificationError, match="index-monotone"):
        verify_landscape(double_well, graph, fast_cfg)


def test_graph_deduplicates_nodes(saddle):
    graph = LandscapeGraph()
    policy = DedupPolicy()
    first, is_new = graph.add(saddle, policy)
    again, is_new_again = graph.add(saddle, policy)
    assert (first, is_new) == (0, True)
    assert (again, is_new_again) == (0, False)
    graph.connect(0, 0, 0, 1, "downward")
    graph.connect(0, 0, 1, -1, "downward")
    assert len(graph.edges) == 1


def test_seed_must_be_converged(double_well, saddle, fast_cfg):
    saddle.converged = False
    with pytest.raises(ValueError):
        build_landscape(double_well, saddle, 1, fast_cfg)


def test_upward_search_needs_lower_index(double_well, saddle, fast_cfg):
    with pytest.raises(ValueError):
        upward_search(double_well, saddle, 1, fast_cfg)


def test_upward_search_labels_wrong_index_off_target():
    # strictly convex: no index-1 point to find
    model = QuadraticModel([1.0, 2.0])
    start = classify_point(model, np.zeros(2))
    point = upward_search(model, start, 1, SearchConfig(k=1, step_rule="fixed", tau=0.1, max_steps=50))
    assert not point.converged
    assert point.label == OFF_TARGET

