import os

import pytest

from blowup_profiles.config import SolverSettings
from blowup_profiles.core import ProblemParams
from blowup_profiles.profiles import ProfileProblemSpec, solve_profile

SLOW_ENV = "BLOWUP_RUN_SLOW"


def require_slow():
    if os.environ.get(SLOW_ENV) != "1":
        pytest.skip(f"slow solver test; set {SLOW_ENV}=1 to run it.")


def pytest_collection_modifyitems(config, items):
    if os.environ.get(SLOW_ENV) == "1":
        return
    skip = pytest.mark.skip(reason=f"slow; set {SLOW_ENV}=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def quick_settings():
    return SolverSettings.load("quick")


@pytest.fixture(scope="session")
def f0_profile(quick_settings):
    """F0 at n=1, p=2 on the quick preset; shared by every slow test that needs it."""
    require_slow()
    spec = ProfileProblemSpec(ProblemParams(1.0, 2.0), eps=quick_settings.eps, max_nodes=quick_settings.max_nodes)
    return solve_profile(spec, settings=quick_settings)
