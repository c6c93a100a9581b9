import math

import pytest

from degenheat.coefficients import CoefficientProfile


@pytest.fixture
def unit():
    return CoefficientProfile.constant(1.0)


@pytest.fixture
def quarter_turn():
    """p(t) = exp(i pi t / 2) on [0, 1], then constant i."""
    return CoefficientProfile.phase_arc(0.0, math.pi / 2, 0.0, 1.0)


@pytest.fixture
def late_arc():
    """Phase arc 0 -> pi/2 on [1, 2]; becomes purely imaginary after t = 2."""
    return CoefficientProfile.phase_arc(0.0, math.pi / 2, 1.0, 2.0)


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, name, ok, detail)``.

    Lines are printed immediately and again in the terminal summary.
    """
    def record(n, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {name}" + (f" ({detail})" if detail else "")
        _CRITERIA[n] = line
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
