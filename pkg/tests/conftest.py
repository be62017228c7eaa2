import pytest

from plapflow.grid import build_grid
from plapflow.nonlinearity import one_plus_exp
from plapflow.spectral import thresholds


@pytest.fixture(scope="session")
def baseline_g():
    return one_plus_exp(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def grid255():
    return build_grid(1, 255)


@pytest.fixture(scope="session")
def th255(baseline_g, grid255):
    return thresholds(baseline_g, 3.0, grid255)


_CRITERIA = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line and fail the test when it did not pass."""

    def report(label, ok, detail):
        line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash.setdefault(_CRITERIA, []).append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
