from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qdd.circuit import Gate, QuantumCircuit  # noqa: E402
from qdd.mapper import load_coupling_map  # noqa: E402

CORPUS = Path(__file__).parent / "corpus"
ONE_Q = ("H", "X", "Y", "Z", "S", "SDG", "T", "TDG", "RX", "RY", "RZ", "P")
TWO_Q = ("CX", "CZ", "SWAP")

ACCEPTANCE_LINES: list[str] = []


def random_circuit(rng: np.random.Generator, n: int, layers: int, two_qubit_ratio: float = 0.35) -> QuantumCircuit:
    """Random unitary circuit of at most ``layers`` depth over the full gate set."""
    qc = QuantumCircuit(n, name="random")
    for _ in range(layers):
        free = list(rng.permutation(n))
        while free:
            q = int(free.pop())
            if free and rng.random() < two_qubit_ratio:
                other = int(free.pop())
                qc.append(Gate(str(rng.choice(TWO_Q)), (q, other)))
                continue
            if rng.random() < 0.3:
                continue
            kind = str(rng.choice(ONE_Q))
            angle = float(rng.uniform(-2 * math.pi, 2 * math.pi)) if kind in ("RX", "RY", "RZ", "P") else None
            qc.append(Gate(kind, (q,), angle))
    return qc


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def corpus() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def five_qubit_map():
    return load_coupling_map((CORPUS / "five_qubit_t.json").read_text())


@pytest.fixture(scope="session")
def line8_map():
    return load_coupling_map((CORPUS / "line8.json").read_text())


@pytest.fixture(scope="session")
def grid_map():
    return load_coupling_map((CORPUS / "grid3x3_directed.json").read_text())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
