# tests/test_exporters.py
import csv
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from nphisd.db import SessionLocal, get_engine, init_db
from nphisd.dynamics import classify_point
from nphisd.energies import LennardJonesCluster, LifshitzPetrichModel, QuadraticModel
from nphisd.exporters import (
    TrajectoryWriter,
    canonical_json,
    config_hash,
    export_point,
    format_cell,
    landscape_dot,
    read_snapshot,
    write_convergence_csv,
    write_json,
    write_snapshot,
    write_xyz,
)
from nphisd.landscape import build_landscape
from nphisd.records import EdgeRecord, LandscapeRecord, NodeRecord, save_landscape
from nphisd.schemas import ConvergenceRow, LandscapeSection


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def payload(double_well, fast_cfg):
    seed = classify_point(double_well, np.zeros(2), k=1)
    graph = build_landscape(double_well, seed, 1, fast_cfg, LandscapeSection(max_index=1), config_hash="f00d")
    return graph.to_dict(phi_ref=lambda node_id: f"nodes/{node_id:04d}.bin")


# ---------- Formatting ----------

def test_format_cell():
    assert format_cell(0.1) == "0.10000000000000001"
    assert float(format_cell(1.0 / 3.0)) == 1.0 / 3.0
    assert format_cell(np.int64(7)) == "7"
    assert format_cell(True) == "true"
    assert format_cell(None) == ""


def test_canonical_json_and_hash():
    a = {"search": {"k": 1, "tau": 0.01}, "model": {"name": "lj"}}
    b = {"model": {"name": "lj"}, "search": {"tau": 0.01, "k": 1}}
    assert canonical_json(a) == canonical_json(b)
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({**a, "seed": 1})
    assert canonical_json({"x": np.float64(np.inf), "v": np.arange(2)}) == '{"v":[0,1],"x":null}'


def test_write_json_is_readable(tmp_path):
    path = write_json(tmp_path / "sub" / "doc.json", {"energy": np.float64(-16.5), "index": np.int32(3)})
    assert json.loads(path.read_text()) == {"energy": -16.5, "index": 3}


# ---------- Tables ----------

def test_trajectory_writer(tmp_path):
    path = tmp_path / "trajectory.csv"
    with TrajectoryWriter(path) as writer:
        writer({"step": 0, "energy": 0.5, "tau": 0.0})
        writer({"step": 1, "energy": 0.25, "tau": 0.1, "extra": 1.0})
    rows = read_rows(path)
    assert rows[0] == ["step", "energy", "tau"]
    assert rows[2] == ["1", "0.25", "0.10000000000000001"]
    assert writer.rows == 2
    with pytest.raises(RuntimeError):
        writer({"step": 2})


def test_convergence_csv(tmp_path):
    rows = [ConvergenceRow(tau=0.1, l2_error=0.02), ConvergenceRow(tau=0.05, l2_error=0.01, order=1.0)]
    table = read_rows(write_convergence_csv(tmp_path / "convergence.csv", rows))
    assert table == [["tau", "L2_error", "order"], ["0.10000000000000001", "0.02", ""], ["0.050000000000000003", "0.01", "1"]]


# ---------- Graphs and geometries ----------

def test_landscape_dot(payload):
    dot = landscape_dot(payload)
    assert dot.startswith("digraph landscape {")
    assert dot.count("->") == 2
    assert "GSP1-1" in dot and "GLM-2" in dot


def test_write_xyz(tmp_path):
    positions = np.array([[0.0, 0.0, 0.0], [1.0, 0.5, -0.25]])
    lines = write_xyz(tmp_path / "pair.xyz", positions, "two\natoms").read_text().splitlines()
    assert lines[:2] == ["2", "two atoms"]
    assert lines[3] == "Ar 1 0.5 -0.25"


# ---------- Snapshots ----------

def test_snapshot_of_grid_field(tmp_path, rng):
    model = LifshitzPetrichModel(n=16, half_length=2.0)
    phi = model.random_state(rng)
    path = write_snapshot(tmp_path / "u.bin", model, phi, {"label": "GLM-1"})
    header = json.loads(path.with_suffix(".json").read_text())
    assert header["shape"] == [16, 16]
    assert header["dtype"] == "<f8"
    assert header["label"] == "GLM-1"
    assert path.stat().st_size == 16 * 16 * 8
    assert_allclose(read_snapshot(path), phi, rtol=1e-15, atol=1e-15)


def test_snapshot_of_plain_vector_is_exact(tmp_path):
    model = QuadraticModel([1.0, 2.0, 3.0])
    phi = np.array([0.1, -2.5, 1e-300])
    assert_array_equal(read_snapshot(write_snapshot(tmp_path / "q.bin", model, phi)), phi)


def test_export_point_for_cluster(tmp_path):
    model = LennardJonesCluster(7)
    point = classify_point(model, model.seed_state("pbp", np.random.default_rng(0)), k=0)
    point.label = "GLM-1"
    ref = export_point(tmp_path, "point", model, point, ["xyz", "csv"])
    assert ref == "point.bin"
    lines = (tmp_path / "point.xyz").read_text().splitlines()
    assert lines[0] == "7" and len(lines) == 9
    assert lines[1].startswith("GLM-1 E=")
    # no grid, so no field CSV
    assert not (tmp_path / "point.csv").exists()


# ---------- Database mirror ----------

def test_save_landscape(tmp_path, payload):
    url = f"sqlite:///{tmp_path / 'landscapes.db'}"
    init_db(url)
    assert get_engine(url) is get_engine(url)
    db = SessionLocal(url)
    try:
        record = save_landscape(db, payload, "double_well", str(tmp_path))
        assert record.id is not None
        assert record.config_hash == "f00d"
        assert record.created_at is not None
        assert db.query(LandscapeRecord).count() == 1
        assert db.query(NodeRecord).count() == 3
        assert db.query(EdgeRecord).filter(EdgeRecord.kind == "downward").count() == 2
        labels = sorted(n.label for n in record.nodes)
        assert labels == ["GLM-1", "GLM-2", "GSP1-1"]
        assert all(n.phi_ref.startswith("nodes/") for n in record.nodes)
    finally:
        db.close()
