# nphisd/exporters.py
"""
Output writers: JSON documents, CSV tables and trajectories, Graphviz DOT,
XYZ cluster geometries and binary state snapshots with a JSON header.

Floats go to CSV with 17 significant digits; JSON uses Python's shortest
round-trip repr. Both read back bit-exactly.
"""

import csv
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .energies import GrossPitaevskiiModel, LennardJonesCluster, LifshitzPetrichModel
from .model_api import EnergyModel, StationaryPoint

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "{:.17g}"


# ---------- JSON ----------

def to_builtin(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays into JSON-serializable values."""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_builtin(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(to_builtin(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a config dict."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def write_json(path: Path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_builtin(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# ---------- CSV ----------

def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT.format(float(value))
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path


class TrajectoryWriter:
    """
    Streams per-step records to CSV as a search callback. The header is
    fixed by the first record.

        with TrajectoryWriter(out / "trajectory.csv") as writer:
            run_search(model, phi0, cfg, callback=writer)
    """

    def __init__(self, path: Path) -> None:
        self.path = Path(path)
        self.rows = 0
        self._fh = None
        self._writer = None
        self._header: List[str] = []

    def __enter__(self) -> "TrajectoryWriter":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh)
        return self

    def __call__(self, record: Dict[str, Any]) -> None:
        if self._writer is None:
            raise RuntimeError("TrajectoryWriter used outside its context")
        if not self._header:
            self._header = list(record)
            self._writer.writerow(self._header)
        self._writer.writerow([format_cell(record.get(name)) for name in self._header])
        self.rows += 1

    def __exit__(self, *exc) -> None:
        if self._fh is not None:
            self._fh.close()
        self._fh = self._writer = None


def write_convergence_csv(path: Path, rows) -> Path:
    return write_csv(path, ["tau", "L2_error", "order"], [(r.tau, r.l2_error, r.order) for r in rows])


def write_spectrum_csv(path: Path, eigenvalues: Sequence[float], threshold: float) -> Path:
    def kind(value: float) -> str:
        if value < -threshold:
            return "negative"
        return "zero" if abs(value) <= threshold else "positive"

    return write_csv(
        path,
        ["rank", "eigenvalue", "class"],
        [(i, float(v), kind(float(v))) for i, v in enumerate(eigenvalues, start=1)],
    )


# ---------- Graphs ----------

def landscape_dot(payload: Dict[str, Any]) -> str:
    lines = ["digraph landscape {", "  rankdir=TB;", "  node [shape=box, fontname=Helvetica];"]
    for node in payload["nodes"]:
        text = f"{node['label']}\\nE={node['energy']:.8g}\\nindex {node['index']}, null {node['nullspace_dim']}"
        style = ", style=dashed" if node.get("off_target") else ""
        lines.append(f'  n{node["id"]} [label="{text}"{style}];')
    for edge in payload["edges"]:
        colour = "blue" if edge["kind"] == "upward" else "black"
        lines.append(f'  n{edge["parent"]} -> n{edge["child"]} [color={colour}, label="{edge["sign"]:+d}w{edge["direction"]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(path: Path, payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(landscape_dot(payload), encoding="utf-8")
    return path


# ---------- Snapshots ----------

def write_xyz(path: Path, positions: np.ndarray, comment: str = "", element: str = "Ar") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [str(len(positions)), comment.replace("\n", " ")]
    for x, y, z in np.asarray(positions, dtype=float):
        lines.append(f"{element} {FLOAT_FORMAT.format(x)} {FLOAT_FORMAT.format(y)} {FLOAT_FORMAT.format(z)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _field_view(model: EnergyModel, phi: np.ndarray):
    """(array to store, state scale) for models with a grid representation."""
    if isinstance(model, LifshitzPetrichModel):
        return model.field(phi), model.scale
    if isinstance(model, GrossPitaevskiiModel):
        psi = model.wavefunction(phi)
        return np.stack([psi.real, psi.imag]), model.scale
    return np.asarray(phi, dtype=float), 1.0


def write_snapshot(path: Path, model: EnergyModel, phi: np.ndarray, extra: Optional[Dict[str, Any]] = None) -> Path:
    """
    Raw little-endian float64 data in C order at `path` (.bin) plus a JSON
    header next to it. Field models store grid values; read_snapshot turns
    them back into the state vector.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data, scale = _field_view(model, phi)
    data = np.ascontiguousarray(data, dtype="<f8")
    path.write_bytes(data.tobytes(order="C"))
    header = {
        "shape": list(data.shape),
        "dtype": "<f8",
        "order": "C",
        "state_scale": scale,
        "model": model.describe(),
    }
    if extra:
        header.update(extra)
    write_json(path.with_suffix(".json"), header)
    return path


def read_snapshot(path: Path) -> np.ndarray:
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    data = np.frombuffer(path.read_bytes(), dtype=header["dtype"]).reshape(header["shape"])
    return data.ravel(order="C") / float(header["state_scale"])


def write_field_csv(path: Path, model: EnergyModel, phi: np.ndarray) -> Optional[Path]:
    """x, y, value columns for plotting; None for models without a grid."""
    if isinstance(model, LifshitzPetrichModel):
        xx, yy = model.mesh()
        u = model.field(phi)
        rows = zip(xx.ravel(), yy.ravel(), u.ravel())
        return write_csv(path, ["x", "y", "u"], rows)
    if isinstance(model, GrossPitaevskiiModel):
        xx, yy = model.mesh
        psi = model.wavefunction(phi)
        rows = zip(xx.ravel(), yy.ravel(), psi.real.ravel(), psi.imag.ravel(), (np.abs(psi) ** 2).ravel())
        return write_csv(path, ["x", "y", "re", "im", "density"], rows)
    return None


def export_point(directory: Path, stem: str, model: EnergyModel, point: StationaryPoint, formats: Sequence[str]) -> str:
    """Write every requested view of one stationary point; returns the snapshot path relative to `directory`."""
    directory = Path(directory)
    snapshot = write_snapshot(directory / f"{stem}.bin", model, point.phi, {"label": point.label})
    if "xyz" in formats and isinstance(model, LennardJonesCluster):
        comment = f"{point.label} E={FLOAT_FORMAT.format(point.energy)} index={point.index}"
        write_xyz(directory / f"{stem}.xyz", model.positions(point.phi), comment)
    if "csv" in formats:
        write_field_csv(directory / f"{stem}.csv", model, point.phi)
    return snapshot.relative_to(directory).as_posix()
