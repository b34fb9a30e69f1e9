import numpy as np
import pytest

from relaybeam.config import ScenarioConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def default_config():
    return ScenarioConfig()


ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Print and keep one pass/fail line per acceptance criterion."""
    def record(number, title, passed, detail, seconds):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail} ({seconds:.1f} s)"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
