import json

import numpy as np
import pytest

from opinionsim.runtime.network import EdgeParams
from opinionsim.runtime.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture
def np_rng():
    """Plain numpy generator for building random test instances."""
    return np.random.default_rng(20240501)


@pytest.fixture
def params():
    return EdgeParams(theta=7, eps_edge=0.001)


@pytest.fixture
def minimal_config():
    return {"n_standard": 50, "m": 3, "theta": 7, "steps": 180, "seed": 0, "controllers": []}


@pytest.fixture
def small_config(tmp_path):
    """Small run config on disk, with one controller of each archetype."""
    doc = {
        "n_standard": 12,
        "m": 3,
        "theta": 7,
        "eps_edge": 0.01,
        "steps": 15,
        "seed": 7,
        "controllers": [
            {"type": "stubborn", "count": 1, "opinion": [0, 0, 0]},
            {"type": "popular", "count": 2, "rho": -10},
            {"type": "strategic", "count": 1, "rho": 2, "goal": [0, 0, 0]},
        ],
        "stability": {"tol": 1e-4, "window": 5},
        "output": {"dir": str(tmp_path / "runs"), "formats": ["csv", "dot", "json"]},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path
