# nphisd/landscape.py
"""
Solution landscapes: an upward search from a stable seed to an index-k
saddle, then a breadth-first cascade of downward searches, each parent of
index m spawning searches with target index m - 1 along +/- every unstable
direction.
"""

import logging
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Set, Tuple

import numpy as np

from .dynamics import Callback, SaddleSearch, SearchResult, config_with_k
from .exceptions import VerificationError
from .linalg import FrameLike, NullspaceBasis, smallest_eigenpairs
from .model_api import ConstraintKind, EnergyModel, StationaryPoint
from .schemas import DedupPolicy, LandscapeSection, SearchConfig
from .sphere import SphereSearch

logger = logging.getLogger(__name__)

OFF_TARGET = "off-target"


def make_search(model: EnergyModel, cfg: SearchConfig, callback: Optional[Callback] = None) -> SaddleSearch:
    if model.constraint_kind is ConstraintKind.UNIT_SPHERE:
        return SphereSearch(model, cfg, callback=callback)
    return SaddleSearch(model, cfg, callback=callback)


def find_stationary_point(
    model: EnergyModel,
    phi0: np.ndarray,
    cfg: Optional[SearchConfig] = None,
    *,
    nullspace_hint: Optional[NullspaceBasis] = None,
    initial_frame: FrameLike = None,
    callback: Optional[Callback] = None,
) -> SearchResult:
    """run_search or run_sphere_search, chosen by the model's constraint."""
    return make_search(model, cfg or SearchConfig(), callback).run(phi0, nullspace_hint, initial_frame)


def relax(
    model: EnergyModel,
    phi0: np.ndarray,
    cfg: Optional[SearchConfig] = None,
    *,
    callback: Optional[Callback] = None,
) -> SearchResult:
    """Gradient flow (projected on the sphere) to a generalized local minimum."""
    return find_stationary_point(model, phi0, config_with_k(cfg, 0), callback=callback)


def random_minima(
    model: EnergyModel,
    attempts: int,
    cfg: Optional[SearchConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> Iterator[StationaryPoint]:
    """Relax up to `attempts` random states, yielding each converged generalized minimum."""
    rng = rng if rng is not None else np.random.default_rng(0)
    for attempt in range(attempts):
        point = relax(model, model.random_state(rng), cfg).point
        if not point.converged or point.index != 0:
            logger.info(
                "random start %d: index %d, residual %.3e; skipped", attempt, point.index, point.residual,
            )
            continue
        yield point


def default_delta(phi: np.ndarray) -> float:
    return 1e-2 * (1.0 + float(np.max(np.abs(phi))))


# ---------- Graph ----------

@dataclass
class LandscapeEdge:
    parent: int
    child: int
    direction: int
    sign: int
    kind: str


@dataclass
class LandscapeGraph:
    nodes: Dict[int, StationaryPoint] = field(default_factory=dict)
    edges: List[LandscapeEdge] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    unconverged: List[Dict[str, Any]] = field(default_factory=list)
    anomalies: List[Dict[str, Any]] = field(default_factory=list)
    off_target: Set[int] = field(default_factory=set)

    def match(self, point: StationaryPoint, policy: DedupPolicy) -> Optional[int]:
        scale = math.sqrt(point.phi.size)
        for node_id, node in self.nodes.items():
            if abs(node.energy - point.energy) > policy.energy_tol:
                continue
            if float(np.linalg.norm(node.phi - point.phi)) / scale <= policy.distance_tol:
                return node_id
        return None

    def add(self, point: StationaryPoint, policy: DedupPolicy) -> Tuple[int, bool]:
        """Id of the matching node, or of a newly inserted one; and whether it is new."""
        existing = self.match(point, policy)
        if existing is not None:
            return existing, False
        node_id = len(self.nodes)
        self.nodes[node_id] = point
        if point.label == OFF_TARGET:
            self.off_target.add(node_id)
        logger.info("node %d: index %d, energy %.10g, nullspace dim %d", node_id, point.index, point.energy, point.nullspace_dim)
        return node_id, True

    def connect(self, parent: int, child: int, direction: int, sign: int, kind: str) -> None:
        if any(e.parent == parent and e.child == child for e in self.edges):
            return
        self.edges.append(LandscapeEdge(parent, child, direction, sign, kind))

    def relabel(self) -> None:
        """GLM-r for index 0, GSP{m}-r otherwise; r ranks by (energy, id) within an index."""
        by_index: Dict[int, List[int]] = {}
        for node_id, node in self.nodes.items():
            by_index.setdefault(node.index, []).append(node_id)
        for index, ids in by_index.items():
            ids.sort(key=lambda i: (self.nodes[i].energy, i))
            prefix = "GLM" if index == 0 else f"GSP{index}"
            for rank, node_id in enumerate(ids, start=1):
                self.nodes[node_id].label = f"{prefix}-{rank}"

    def ordered_ids(self) -> List[int]:
        return sorted(self.nodes, key=lambda i: (self.nodes[i].energy, i))

    def to_dict(self, phi_ref: Optional[Callable[[int], str]] = None) -> Dict[str, Any]:
        nodes = []
        for node_id in self.ordered_ids():
            node = self.nodes[node_id]
            entry = {"id": node_id, **node.summary()}
            entry["off_target"] = node_id in self.off_target
            entry["phi_ref"] = phi_ref(node_id) if phi_ref is not None else None
            nodes.append(entry)
        edges = [
            {"parent": e.parent, "child": e.child, "direction": e.direction, "sign": e.sign, "kind": e.kind}
            for e in sorted(self.edges, key=lambda e: (e.kind != "upward", e.parent, e.child))
        ]
        return {
            "nodes": nodes,
            "edges": edges,
            "metadata": dict(self.metadata),
            "unconverged": list(self.unconverged),
            "anomalies": list(self.anomalies),
        }


# ---------- Searches ----------

def upward_search(
    model: EnergyModel,
    start: StationaryPoint,
    k: int,
    cfg: Optional[SearchConfig] = None,
    delta: Optional[float] = None,
    *,
    callback: Optional[Callback] = None,
) -> StationaryPoint:
    """
    Index-k search from a copy of `start` kicked along its softest stable
    direction. An endpoint whose index is not k is kept and labelled off-target.
    """
    if start.index >= k:
        raise ValueError(f"upward search needs start index {start.index} < target index {k}")
    cfg = config_with_k(cfg, k)
    search = make_search(model, cfg, callback)
    phi = start.phi

    nullspace = search.detect(phi) if search.preserving else None
    against = search.fixed_directions(phi)
    if nullspace is not None:
        against = np.hstack([against, search.active_nullspace(phi, nullspace)])
    threshold = nullspace.zero_threshold if nullspace is not None else (cfg.zero_threshold or model.zero_threshold)
    eig = smallest_eigenpairs(
        model, phi, start.index + 1, against, cfg.eig_tol, cfg.eig_max_iter,
        matvec=search.hessian_operator(phi),
    )
    stable = np.flatnonzero(eig.eigenvalues > threshold)
    if stable.size == 0:
        raise ValueError("no stable direction to leave the start point along")
    direction = eig.eigenvectors.vectors[:, stable[0]]

    kick = delta if delta is not None else default_delta(phi)
    result = search.run(phi + kick * direction, nullspace_hint=nullspace)
    point = result.point
    if point.index != k:
        logger.warning("upward search to index %d ended at index %d (energy %.10g)", k, point.index, point.energy)
        point.label = OFF_TARGET
    return point


@dataclass
class Branch:
    point: StationaryPoint
    direction: int
    sign: int


def downward_branches(
    model: EnergyModel,
    start: StationaryPoint,
    cfg: Optional[SearchConfig] = None,
    delta: Optional[float] = None,
    jobs: int = 1,
) -> List[Branch]:
    """Every +/- kick along every unstable direction of `start`, searched at target index - 1."""
    if start.index < 1:
        raise ValueError("downward search needs a start point of index >= 1")
    k = start.index - 1
    cfg = config_with_k(cfg, k)
    search = make_search(model, cfg)
    phi = start.phi

    fixed = search.fixed_directions(phi)
    eig = smallest_eigenpairs(
        model, phi, start.index, fixed, cfg.eig_tol, cfg.eig_max_iter,
        matvec=search.hessian_operator(phi),
    )
    unstable = eig.eigenvectors.vectors
    nullspace = search.detect(phi) if search.preserving else None
    kick = delta if delta is not None else default_delta(phi)

    tasks = [(i, sign) for i in range(start.index) for sign in (1, -1)]

    def run_branch(task: Tuple[int, int]) -> Branch:
        i, sign = task
        others = np.delete(unstable, i, axis=1) if k else None
        result = search.run(phi + sign * kick * unstable[:, i], nullspace_hint=nullspace, initial_frame=others)
        return Branch(result.point, i, sign)

    if jobs > 1:
        # map() keeps task order, so results do not depend on completion order
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_branch, tasks))
    return [run_branch(task) for task in tasks]


def _accept(parent: StationaryPoint, branch: Branch) -> Optional[str]:
    """Reason to reject a branch, or None."""
    if not branch.point.converged:
        return "not converged"
    if branch.point.index >= parent.index:
        return f"child index {branch.point.index} >= parent index {parent.index}"
    return None


def downward_search(
    model: EnergyModel,
    start: StationaryPoint,
    cfg: Optional[SearchConfig] = None,
    delta: Optional[float] = None,
    dedup: Optional[DedupPolicy] = None,
    jobs: int = 1,
) -> List[StationaryPoint]:
    """Distinct converged children of `start`, lowest energy first."""
    dedup = dedup or DedupPolicy()
    children: List[StationaryPoint] = []
    for branch in downward_branches(model, start, cfg, delta, jobs):
        reason = _accept(start, branch)
        if reason is not None:
            if branch.point.converged:
                logger.warning("downward branch %+d*w%d: %s", branch.sign, branch.direction, reason)
            continue
        children.append(branch.point)

    children.sort(key=lambda p: p.energy)
    scale = math.sqrt(start.phi.size)
    distinct: List[StationaryPoint] = []
    for child in children:
        duplicate = any(
            abs(child.energy - other.energy) <= dedup.energy_tol
            and float(np.linalg.norm(child.phi - other.phi)) / scale <= dedup.distance_tol
            for other in distinct
        )
        if not duplicate:
            distinct.append(child)
    return distinct


# ---------- Landscape ----------

def build_landscape(
    model: EnergyModel,
    seed: StationaryPoint,
    max_index: int,
    cfg: Optional[SearchConfig] = None,
    landscape: Optional[LandscapeSection] = None,
    *,
    config_hash: str = "",
    jobs: int = 1,
) -> LandscapeGraph:
    if not seed.converged:
        raise ValueError("landscape seed must be a converged stationary point")
    cfg = cfg or SearchConfig()
    landscape = landscape or LandscapeSection(max_index=max_index)
    policy = landscape.dedup

    graph = LandscapeGraph(
        metadata={
            "model": model.describe(),
            "config_hash": config_hash,
            "seed": landscape.seed,
            "max_index": max_index,
        }
    )
    seed_id, _ = graph.add(seed, policy)
    queue = deque([seed_id])

    if seed.index < max_index:
        top = upward_search(model, seed, max_index, cfg, landscape.delta)
        if not top.converged:
            graph.unconverged.append({"parent": seed_id, "kind": "upward", "residual": top.residual})
            logger.warning("upward search from the seed did not converge; landscape holds the seed only")
        else:
            top_id, _ = graph.add(top, policy)
            if top.index > seed.index:
                graph.connect(seed_id, top_id, 0, 1, "upward")
            else:
                graph.anomalies.append({"parent": seed_id, "child": top_id, "kind": "upward", "index": top.index})
            queue = deque([top_id])

    expanded: Set[int] = set()
    while queue:
        parent_id = queue.popleft()
        parent = graph.nodes[parent_id]
        if parent.index < 1 or parent_id in expanded:
            continue
        expanded.add(parent_id)
        logger.info("expanding node %d (index %d, energy %.10g)", parent_id, parent.index, parent.energy)

        for branch in downward_branches(model, parent, cfg, landscape.delta, jobs):
            reason = _accept(parent, branch)
            if reason is not None:
                record = {
                    "parent": parent_id,
                    "direction": branch.direction,
                    "sign": branch.sign,
                    "index": branch.point.index,
                    "residual": branch.point.residual,
                    "reason": reason,
                }
                if branch.point.converged:
                    logger.warning("node %d branch %+d*w%d: %s", parent_id, branch.sign, branch.direction, reason)
                    graph.anomalies.append(record)
                else:
                    graph.unconverged.append(record)
                continue
            child_id, is_new = graph.add(branch.point, policy)
            graph.connect(parent_id, child_id, branch.direction, branch.sign, "downward")
            if is_new and branch.point.index >= 1:
                queue.append(child_id)

    graph.relabel()
    if landscape.verify:
        verify_landscape(model, graph, cfg)
    logger.info("landscape: %d nodes, %d edges, %d unconverged branches", len(graph.nodes), len(graph.edges), len(graph.unconverged))
    return graph


def verify_landscape(model: EnergyModel, graph: LandscapeGraph, cfg: Optional[SearchConfig] = None) -> None:
    """Re-classify every node independently; raise on any disagreement."""
    cfg = cfg or SearchConfig()
    for node_id in graph.ordered_ids():
        node = graph.nodes[node_id]
        check = make_search(model, config_with_k(cfg, node.index)).classify(node.phi)
        if (check.index, check.nullspace_dim) != (node.index, node.nullspace_dim):
            raise VerificationError(
                f"node {node_id} ({node.label}): reported index/nullity "
                f"({node.index}, {node.nullspace_dim}), re-classified ({check.index}, {check.nullspace_dim})"
            )
        if check.residual >= cfg.force_tol:
            raise VerificationError(f"node {node_id} ({node.label}): residual {check.residual:.3e} is not below force_tol")
    for edge in graph.edges:
        parent, child = graph.nodes[edge.parent], graph.nodes[edge.child]
        monotone = parent.index > child.index if edge.kind == "downward" else parent.index < child.index
        if not monotone:
            raise VerificationError(f"{edge.kind} edge {edge.parent} -> {edge.child} is not index-monotone")
