import pytest

from cehpo.models.config import Direction
from cehpo.objectives.objective import FunctionObjective


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long end-to-end runs")


@pytest.fixture
def quadratic_objective():
    return FunctionObjective("quadratic", Direction.MINIMIZE, lambda v, seed: (v.value - 0.7) ** 2)


@pytest.fixture
def constant_objective():
    return FunctionObjective("constant", Direction.MINIMIZE, lambda v, seed: 1.0)
