import numpy as np
import pytest

from nudoa.array_model import ArrayGeometry, NoiseProfile, SourceSet, population_covariance

EX1_Q = [1, 1, 1, 1, 1, 20, 30, 50]


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def proj(U):
    return U @ U.conj().T


@pytest.fixture
def s0():
    """M=4 ULA, one unit-power source at 30 deg, Q = diag(1, 2, 3, 4)."""
    g = ArrayGeometry(4)
    src = SourceSet([30.0], [1.0])
    noise = NoiseProfile([1, 2, 3, 4])
    return g, src, noise, population_covariance(g, src, noise)


@pytest.fixture
def ex1():
    """Example 1 geometry at population level with unit source power."""
    g = ArrayGeometry(8)
    src = SourceSet([-3.0, 6.0], [1.0, 1.0])
    noise = NoiseProfile(EX1_Q)
    return g, src, noise, population_covariance(g, src, noise)


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance verdict line; echoed now and in the terminal summary."""

    def _report(number, ok, detail, informational=False):
        verdict = "INFO" if informational else ("PASS" if ok else "FAIL")
        line = f"criterion {number}: {verdict}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
