"""
Shared pytest configuration: the slow marker and the --runslow switch
"""
import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False,
        help="run desk-scale acceptance experiments"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale Monte Carlo experiment (needs --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
