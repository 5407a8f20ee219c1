import numpy as np
import pytest

from axygate.designer import DesignSpec, optimize_block
from axygate.physics import IonCrystal, QubitParams, coupling_constants

NU1 = 2 * np.pi * 120e3
RABI = 2 * np.pi * 31e3

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="session")
def crystal():
    return IonCrystal.from_trap(NU1)


@pytest.fixture(scope="session")
def qubits():
    return QubitParams.uniform(RABI)


@pytest.fixture(scope="session")
def couplings(crystal, qubits):
    return coupling_constants(crystal, qubits)


@pytest.fixture(scope="session")
def design_spec(crystal, qubits):
    return DesignSpec(crystal, qubits)


@pytest.fixture(scope="session")
def solution(design_spec):
    return optimize_block(design_spec)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
