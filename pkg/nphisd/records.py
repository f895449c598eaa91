# nphisd/records.py
"""Landscape graphs mirrored into SQL: one landscape row, its nodes and edges."""

from datetime import datetime, timezone
from typing import Any, Dict

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import Session, relationship

from .db import Base


class LandscapeRecord(Base):
    """
    SQLAlchemy ORM model for the 'landscapes' table.

    Fields:
    - id: integer primary key
    - model: registry name of the energy model
    - config_hash: SHA-256 of the canonical run config
    - seed: random seed of the run
    - created_at: UTC timestamp (the JSON export carries none)
    """
    __tablename__ = "landscapes"

    id = Column(Integer, primary_key=True, index=True)
    model = Column(String(64), nullable=False)
    config_hash = Column(String(64), nullable=False, index=True)
    seed = Column(Integer, nullable=False, default=0)
    output_dir = Column(Text, nullable=True)
    created_at = Column(DateTime, nullable=False, default=lambda: datetime.now(timezone.utc))

    nodes = relationship("NodeRecord", back_populates="landscape", cascade="all, delete-orphan")
    edges = relationship("EdgeRecord", back_populates="landscape", cascade="all, delete-orphan")


class NodeRecord(Base):
    __tablename__ = "landscape_nodes"

    id = Column(Integer, primary_key=True, index=True)
    landscape_id = Column(Integer, ForeignKey("landscapes.id"), nullable=False, index=True)
    node_id = Column(Integer, nullable=False)
    label = Column(String(32), nullable=False)
    index = Column(Integer, nullable=False)
    energy = Column(Float, nullable=False)
    nullspace_dim = Column(Integer, nullable=False)
    residual = Column(Float, nullable=False)
    off_target = Column(Boolean, nullable=False, default=False)
    phi_ref = Column(Text, nullable=True)

    landscape = relationship("LandscapeRecord", back_populates="nodes")


class EdgeRecord(Base):
    __tablename__ = "landscape_edges"

    id = Column(Integer, primary_key=True, index=True)
    landscape_id = Column(Integer, ForeignKey("landscapes.id"), nullable=False, index=True)
    parent = Column(Integer, nullable=False)
    child = Column(Integer, nullable=False)
    direction = Column(Integer, nullable=False)
    sign = Column(Integer, nullable=False)
    kind = Column(String(16), nullable=False)

    landscape = relationship("LandscapeRecord", back_populates="edges")


def save_landscape(db: Session, payload: Dict[str, Any], model_name: str, output_dir: str = "") -> LandscapeRecord:
    """Store a serialized landscape (LandscapeGraph.to_dict()) and return its row."""
    meta = payload.get("metadata", {})
    record = LandscapeRecord(
        model=model_name,
        config_hash=meta.get("config_hash", ""),
        seed=int(meta.get("seed", 0)),
        output_dir=output_dir or None,
    )
    for node in payload["nodes"]:
        record.nodes.append(
            NodeRecord(
                node_id=node["id"],
                label=node["label"],
                index=node["index"],
                energy=node["energy"],
                nullspace_dim=node["nullspace_dim"],
                residual=node["residual"],
                off_target=bool(node.get("off_target", False)),
                phi_ref=node.get("phi_ref"),
            )
        )
    for edge in payload["edges"]:
        record.edges.append(EdgeRecord(**edge))
    db.add(record)
    db.commit()
    db.refresh(record)
    return record
