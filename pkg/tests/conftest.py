import numpy as np
import pytest

from predsub import generate_mmsb

# Populated by test_acceptance; echoed after the run so every criterion shows
# one visible pass/fail line even when pytest captures stdout.
ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def small_model():
    """Full-rank mixed-membership model reused across modules (n=200, d=3)."""
    return generate_mmsb(200, 3, 0.5, seed=101)


@pytest.fixture(scope="session")
def indefinite_model():
    """Model with a known indefinite signature (p=2, q=1)."""
    return generate_mmsb(180, 3, 0.5, seed=202, p=2)
