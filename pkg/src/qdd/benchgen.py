"""Parametric algorithm-level benchmark circuits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import QuantumCircuit

FAMILIES = ("ghz", "qft", "wstate", "random_cliffordt")


class BenchmarkError(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    circuit_size: int
    level: str = "alg"
    seed: int = 0
    qft_swaps: bool = False


def ghz(n: int) -> QuantumCircuit:
    """H on the top qubit, then a CX cascade downwards, then measure every qubit."""
    qc = QuantumCircuit(n, n, name=f"ghz_{n}")
    qc.h(n - 1)
    for q in range(n - 1, 0, -1):
        qc.cx(q, q - 1)
    qc.measure_all()
    return qc


def _controlled_phase(qc: QuantumCircuit, lam: float, control: int, target: int) -> None:
    qc.p(lam / 2, control)
    qc.cx(control, target)
    qc.p(-lam / 2, target)
    qc.cx(control, target)
    qc.p(lam / 2, target)


def qft(n: int, swaps: bool = False) -> QuantumCircuit:
    """Textbook QFT with qubit n-1 as the most significant bit.

    Controlled phases are decomposed into P and CX. Without ``swaps`` the
    output comes out bit-reversed.
    """
    qc = QuantumCircuit(n, name=f"qft_{n}")
    for j in range(n - 1, -1, -1):
        qc.h(j)
        for k in range(j - 1, -1, -1):
            _controlled_phase(qc, math.pi / 2 ** (j - k), k, j)
    if swaps:
        for i in range(n // 2):
            qc.swap(i, n - 1 - i)
    return qc


def wstate(n: int) -> QuantumCircuit:
    """Equal superposition of the n one-hot basis states.

    The excitation starts on qubit 0 and is split down the chain with
    controlled-RY rotations (RY, CX, RY, CX), each followed by a CX that
    clears the previous qubit.
    """
    qc = QuantumCircuit(n, name=f"wstate_{n}")
    qc.x(0)
    for i in range(n - 1):
        theta = 2 * math.acos(math.sqrt(1 / (n - i)))
        qc.ry(theta / 2, i + 1)
        qc.cx(i, i + 1)
        qc.ry(-theta / 2, i + 1)
        qc.cx(i, i + 1)
        qc.cx(i + 1, i)
    return qc


def random_cliffordt(n: int, seed: int = 0) -> QuantumCircuit:
    """2n layers; every qubit draws uniformly from {H, S, T, CX} once per layer.

    A CX draw pairs the qubit with a random free partner and falls back to a
    single-qubit draw when none is left.
    """
    rng = np.random.default_rng(seed)
    qc = QuantumCircuit(n, name=f"random_cliffordt_{n}_{seed}")
    for _ in range(2 * n):
        free = list(rng.permutation(n))
        while free:
            q = int(free.pop())
            choice = int(rng.integers(4))
            if choice == 3 and free:
                partner = int(free.pop(int(rng.integers(len(free)))))
                qc.cx(q, partner)
                continue
            if choice == 3:
                choice = int(rng.integers(3))
            (qc.h, qc.s, qc.t)[choice](q)
    return qc


def get_benchmark(
    name: str | BenchmarkSpec,
    circuit_size: int | None = None,
    level: str = "alg",
    seed: int = 0,
    qft_swaps: bool = False,
) -> QuantumCircuit:
    """Build a benchmark circuit, e.g. ``get_benchmark("ghz", circuit_size=8, level="alg")``."""
    spec = name if isinstance(name, BenchmarkSpec) else BenchmarkSpec(name, circuit_size, level, seed, qft_swaps)
    if spec.level != "alg":
        raise BenchmarkError(f"only the 'alg' level is generated here, not {spec.level!r}")
    if spec.name not in FAMILIES:
        raise BenchmarkError(f"unknown benchmark {spec.name!r}; choose from {', '.join(FAMILIES)}")
    if spec.circuit_size is None or spec.circuit_size < 1:
        raise BenchmarkError(f"{spec.name} needs circuit_size >= 1")
    n = spec.circuit_size
    if spec.name == "ghz":
        return ghz(n)
    if spec.name == "qft":
        return qft(n, spec.qft_swaps)
    if spec.name == "wstate":
        return wstate(n)
    return random_cliffordt(n, spec.seed)
