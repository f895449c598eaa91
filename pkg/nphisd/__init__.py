# nphisd/__init__.py
"""Nullspace-preserving high-index saddle dynamics and solution landscapes."""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    DynamicsState,
    SaddleSearch,
    SearchResult,
    frame_preservation_oracle,
    init_search,
    refresh_segment,
    run_search,
    segment_check,
    step_explicit,
    step_semi_implicit,
)
from .energies import MODEL_REGISTRY, build_model  # noqa: E402
from .landscape import (  # noqa: E402
    LandscapeGraph,
    build_landscape,
    downward_search,
    find_stationary_point,
    random_minima,
    relax,
    upward_search,
)
from .model_api import ConstraintKind, EnergyModel, StationaryPoint  # noqa: E402
from .schemas import RunConfig, SearchConfig  # noqa: E402
from .sphere import SphereSearch, classify_sphere_point, run_sphere_search  # noqa: E402

__all__ = [
    "__version__",
    "ConstraintKind",
    "DynamicsState",
    "EnergyModel",
    "LandscapeGraph",
    "MODEL_REGISTRY",
    "RunConfig",
    "SaddleSearch",
    "SearchConfig",
    "SearchResult",
    "SphereSearch",
    "StationaryPoint",
    "build_landscape",
    "build_model",
    "classify_sphere_point",
    "downward_search",
    "find_stationary_point",
    "frame_preservation_oracle",
    "init_search",
    "random_minima",
    "refresh_segment",
    "relax",
    "run_search",
    "run_sphere_search",
    "segment_check",
    "step_explicit",
    "step_semi_implicit",
    "upward_search",
]
