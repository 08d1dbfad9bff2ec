# tests/conftest.py
import pytest

from chaosmap.lib.dynamics import ModelParams
from chaosmap.lib.integrate import IntegratorConfig
from chaosmap.lib.ld import LdConfig
from chaosmap.lib.sweep import EnergyRule, SweepPlan


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow end-to-end checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def unit_params() -> ModelParams:
    return ModelParams(1.0, 1.0)


# short horizon and loose tolerances: enough to exercise the machinery, not to classify well
FAST_LD = LdConfig(tau=2.0, integrator=IntegratorConfig(abs_tol=1e-6, rel_tol=1e-6))


@pytest.fixture
def fast_ld() -> LdConfig:
    return FAST_LD


@pytest.fixture(scope="session")
def tiny_plan() -> SweepPlan:
    return SweepPlan(
        alphas=(1.0,),
        sigmas=(1.0,),
        energies=EnergyRule(explicit=(-2.0, 5.0)),
        ensemble_size=100,
        master_seed=11,
        ld=FAST_LD,
    )
