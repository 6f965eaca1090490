import numpy as np
import pytest

from metasir import DEFAULT_SYSTEM, derive_params

_criterion_lines = []


@pytest.fixture(scope="session")
def reference_system():
    return DEFAULT_SYSTEM


@pytest.fixture(scope="session")
def reference_analytic():
    return derive_params(DEFAULT_SYSTEM)


@pytest.fixture()
def rng():
    return np.random.default_rng(20250809)


@pytest.fixture(scope="session")
def criterion_recorder():
    """Collects acceptance-criterion result lines for the terminal summary,
    so they are visible without -s."""

    def record(result):
        _criterion_lines.append(result.label)
        print(result.label)

    return record


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criterion_lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
