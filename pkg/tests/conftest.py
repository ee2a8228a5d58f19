"""Shared fixtures and the acceptance summary hook."""
import pytest

from bos_spectrum.eigensolver import matrix_spectrum
from bos_spectrum.recurrence import find_real_roots

ACCEPTANCE_LINES = []

INTERVALS = {0.5: (0.1, 45.0), 1.3: (0.1, 102.0)}


@pytest.fixture(scope="session")
def stable_spectra():
    """N=1000 versus N=2000 matrix pipeline, computed once per epsilon."""
    cache = {}

    def get(eps):
        if eps not in cache:
            cache[eps] = matrix_spectrum(eps, 1000)
        return cache[eps]
    return get


@pytest.fixture(scope="session")
def shooting_roots():
    """First ten shooting roots at epsilon 0.5 and 1.3."""
    cache = {}

    def get(eps):
        if eps not in cache:
            cache[eps] = find_real_roots(eps, INTERVALS[eps])[:10]
        return cache[eps]
    return get


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
