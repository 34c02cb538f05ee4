import pytest

from chebiv.builder import build_surface
from chebiv.laplace import build_laplace_surface

_CACHE = {}


def surface(preset):
    if preset not in _CACHE:
        _CACHE[preset] = build_surface(preset)
    return _CACHE[preset]


@pytest.fixture(scope="session")
def model_low():
    return surface("low")


@pytest.fixture(scope="session")
def model_medium():
    return surface("medium")


@pytest.fixture(scope="session")
def model_high():
    return surface("high")


@pytest.fixture(scope="session", params=["low", "medium", "high"])
def any_model(request):
    return surface(request.param)


@pytest.fixture(scope="session")
def laplace50():
    return build_laplace_surface(50)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
