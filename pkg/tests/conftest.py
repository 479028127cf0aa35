import math

import pytest

from zeno_dephase.bath import BathSpec, KernelSet


@pytest.fixture(scope="session")
def fig1_bath():
    return BathSpec.ohmic(0.01, 15.0, 1.0)


@pytest.fixture(scope="session")
def fig1_kernels(fig1_bath):
    return KernelSet(fig1_bath)


@pytest.fixture(scope="session")
def cold_bath():
    return BathSpec.ohmic(0.01, 15.0, math.inf)


@pytest.fixture(scope="session")
def wide_bath():
    """G = 0.01, omega_c = 50, beta = 1: the multi-peak collective family."""
    return BathSpec.ohmic(0.01, 50.0, 1.0)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
