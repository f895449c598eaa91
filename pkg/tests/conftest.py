# tests/conftest.py
import json

import numpy as np
import pytest

from nphisd.energies import DoubleWellModel, QuadraticModel
from nphisd.schemas import SearchConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def double_well():
    return DoubleWellModel()


@pytest.fixture
def index1_quadratic():
    # saddle of index 1 at the origin
    return QuadraticModel([-1.0, 1.0, 2.0])


@pytest.fixture
def fast_cfg():
    return SearchConfig(k=1, tau=0.1, tau_min=1e-3, tau_max=1.0, force_tol=1e-9, max_steps=5000)


@pytest.fixture
def write_config(tmp_path):
    """Write a run config dict as JSON and return its path as a string."""

    def write(config, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(config, indent=2), encoding="utf-8")
        return str(path)

    return write
