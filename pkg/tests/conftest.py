import os
import sys

import numpy as np
import pytest

SRC = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")
if SRC not in sys.path:
    sys.path.insert(0, SRC)

from modules.flow import PrNfModel  # noqa: E402
from utils.value_norm import NormalizationStats  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow reproduction tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def random_model(seed, d=1, s=1, hidden=8, lam=1.0, direction="forward"):
    """Glorot-initialized model with normalization stats of a random data cloud."""
    rng = np.random.default_rng([seed, 99])
    norm = NormalizationStats.from_data(rng.normal(0.3, 0.7, size=(50, d)), rng.normal(-0.2, 1.3, size=(50, s)))
    return PrNfModel.init(d, s, hidden, lam, norm, direction, seed=seed)


@pytest.fixture
def small_model():
    return random_model(0, d=2, s=2, hidden=6)
