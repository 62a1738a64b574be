import numpy as np
import pytest

from purejump.sim import SamplePath, path_from_increments

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    """Print and remember one pass/fail line per acceptance check."""
    def _record(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok
    return _record


@pytest.fixture
def walk():
    """Small hand-checkable path built from explicit increments."""
    def _walk(*incs, T=1.0):
        return path_from_increments(np.asarray(incs, dtype=float), T=T)
    return _walk


@pytest.fixture
def flat():
    def _flat(n, T=1.0):
        return SamplePath(np.zeros(n + 1), T=T)
    return _flat
