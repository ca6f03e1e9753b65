"""Gate-level circuit representation shared by every tool in the package."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ONE_QUBIT_FIXED = ("H", "X", "Y", "Z", "S", "SDG", "T", "TDG")
ONE_QUBIT_ROTATIONS = ("RX", "RY", "RZ", "P")
TWO_QUBIT = ("CX", "CZ", "SWAP")
UNITARY_KINDS = ONE_QUBIT_FIXED + ONE_QUBIT_ROTATIONS + TWO_QUBIT
NON_UNITARY_KINDS = ("MEASURE", "BARRIER")
ALL_KINDS = UNITARY_KINDS + NON_UNITARY_KINDS

_ADJOINT = {"S": "SDG", "SDG": "S", "T": "TDG", "TDG": "T"}


class CircuitError(ValueError):
    """Raised when a gate or circuit violates a structural invariant."""


@dataclass(frozen=True)
class Gate:
    """A single circuit operation.

    ``qubits`` lists operand indices; for two-qubit gates the first operand is
    the control (CX) and the most significant bit of the gate matrix.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    clbit: int | None = None

    def __post_init__(self) -> None:
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if kind not in ALL_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"duplicate operand in {kind} {list(self.qubits)}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f"negative qubit index in {kind}")
        arity = self.arity_for(kind)
        if arity is not None and len(self.qubits) != arity:
            raise CircuitError(f"{kind} takes {arity} qubit(s), got {len(self.qubits)}")
        if kind == "BARRIER" and not self.qubits:
            raise CircuitError("barrier needs at least one qubit")
        if kind in ONE_QUBIT_ROTATIONS:
            if self.angle is None:
                raise CircuitError(f"{kind} requires an angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise CircuitError(f"{kind} takes no angle")
        if kind == "MEASURE":
            if self.clbit is None or self.clbit < 0:
                raise CircuitError("measure requires a classical bit")
        elif self.clbit is not None:
            raise CircuitError(f"{kind} takes no classical bit")

    @staticmethod
    def arity_for(kind: str) -> int | None:
        if kind in TWO_QUBIT:
            return 2
        if kind == "BARRIER":
            return None
        return 1

    @property
    def is_unitary(self) -> bool:
        return self.kind in UNITARY_KINDS

    def matrix(self) -> np.ndarray:
        """Dense matrix of a unitary gate in the basis ``|q0 q1>`` (q0 most significant)."""
        return gate_matrix(self.kind, self.angle)

    def adjoint(self) -> Gate:
        if not self.is_unitary:
            raise CircuitError(f"{self.kind} has no adjoint")
        if self.kind in ONE_QUBIT_ROTATIONS:
            return Gate(self.kind, self.qubits, -self.angle)
        return Gate(_ADJOINT.get(self.kind, self.kind), self.qubits)

    def remap(self, mapping: Sequence[int] | dict[int, int]) -> Gate:
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.angle, self.clbit)

    def __str__(self) -> str:
        args = ",".join(str(q) for q in self.qubits)
        if self.angle is not None:
            return f"{self.kind}({self.angle:.6g})[{args}]"
        if self.clbit is not None:
            return f"{self.kind}[{args}->{self.clbit}]"
        return f"{self.kind}[{args}]"


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    kind = kind.upper()
    s = 1 / math.sqrt(2)
    if kind == "H":
        return np.array([[s, s], [s, -s]], dtype=complex)
    if kind == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind == "Y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if kind == "Z":
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if kind == "S":
        return np.array([[1, 0], [0, 1j]], dtype=complex)
    if kind == "SDG":
        return np.array([[1, 0], [0, -1j]], dtype=complex)
    if kind == "T":
        return np.array([[1, 0], [0, complex(s, s)]], dtype=complex)
    if kind == "TDG":
        return np.array([[1, 0], [0, complex(s, -s)]], dtype=complex)
    if kind in ONE_QUBIT_ROTATIONS:
        if angle is None:
            raise CircuitError(f"{kind} requires an angle")
        c, sn = math.cos(angle / 2), math.sin(angle / 2)
        if kind == "RX":
            return np.array([[c, -1j * sn], [-1j * sn, c]], dtype=complex)
        if kind == "RY":
            return np.array([[c, -sn], [sn, c]], dtype=complex)
        if kind == "RZ":
            return np.diag([complex(c, -sn), complex(c, sn)])
        return np.diag([1, complex(math.cos(angle), math.sin(angle))])
    if kind == "CX":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind == "SWAP":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    raise CircuitError(f"{kind} is not unitary")


@dataclass(eq=False)
class QuantumCircuit:
    """Ordered list of gates over ``num_qubits`` qubits and ``num_clbits`` bits.

    Measurements may only form a trailing suffix. Two circuits compare equal
    when widths and gate sequences match; the name is a label only.
    """

    num_qubits: int
    num_clbits: int = 0
    ops: list[Gate] = field(default_factory=list)
    name: str = "circuit"

    def __post_init__(self) -> None:
        if self.num_qubits < 0 or self.num_clbits < 0:
            raise CircuitError("register sizes must be non-negative")
        ops, self.ops = list(self.ops), []
        for op in ops:
            self.append(op)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuantumCircuit):
            return NotImplemented
        return (
            self.num_qubits == other.num_qubits
            and self.num_clbits == other.num_clbits
            and self.ops == other.ops
        )

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __repr__(self) -> str:
        return f"QuantumCircuit({self.name!r}, qubits={self.num_qubits}, clbits={self.num_clbits}, ops={len(self.ops)})"

    def copy(self, name: str | None = None) -> QuantumCircuit:
        return QuantumCircuit(self.num_qubits, self.num_clbits, list(self.ops), name or self.name)

    def append(self, gate: Gate) -> QuantumCircuit:
        if any(q >= self.num_qubits for q in gate.qubits):
            raise CircuitError(f"{gate} addresses a qubit outside 0..{self.num_qubits - 1}")
        if gate.kind == "MEASURE":
            if gate.clbit >= self.num_clbits:
                raise CircuitError(f"{gate} addresses a bit outside 0..{self.num_clbits - 1}")
        elif gate.kind != "BARRIER" and any(op.kind == "MEASURE" for op in self.ops):
            raise CircuitError("mid-circuit measurement is not supported")
        self.ops.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> QuantumCircuit:
        for g in gates:
            self.append(g)
        return self

    # builder helpers, named after the usual OpenQASM mnemonics
    def h(self, q: int) -> QuantumCircuit:
        return self.append(Gate("H", (q,)))

    def x(self, q: int) -> QuantumCircuit:
        return self.append(Gate("X", (q,)))

    def y(self, q: int) -> QuantumCircuit:
        return self.append(Gate("Y", (q,)))

    def z(self, q: int) -> QuantumCircuit:
        return self.append(Gate("Z", (q,)))

    def s(self, q: int) -> QuantumCircuit:
        return self.append(Gate("S", (q,)))

    def sdg(self, q: int) -> QuantumCircuit:
        return self.append(Gate("SDG", (q,)))

    def t(self, q: int) -> QuantumCircuit:
        return self.append(Gate("T", (q,)))

    def tdg(self, q: int) -> QuantumCircuit:
        return self.append(Gate("TDG", (q,)))

    def rx(self, theta: float, q: int) -> QuantumCircuit:
        return self.append(Gate("RX", (q,), theta))

    def ry(self, theta: float, q: int) -> QuantumCircuit:
        return self.append(Gate("RY", (q,), theta))

    def rz(self, theta: float, q: int) -> QuantumCircuit:
        return self.append(Gate("RZ", (q,), theta))

    def p(self, lam: float, q: int) -> QuantumCircuit:
        return self.append(Gate("P", (q,), lam))

    def cx(self, control: int, target: int) -> QuantumCircuit:
        return self.append(Gate("CX", (control, target)))

    def cz(self, a: int, b: int) -> QuantumCircuit:
        return self.append(Gate("CZ", (a, b)))

    def swap(self, a: int, b: int) -> QuantumCircuit:
        return self.append(Gate("SWAP", (a, b)))

    def barrier(self, *qubits: int) -> QuantumCircuit:
        return self.append(Gate("BARRIER", qubits or tuple(range(self.num_qubits))))

    def measure(self, q: int, c: int) -> QuantumCircuit:
        return self.append(Gate("MEASURE", (q,), clbit=c))

    def measure_all(self) -> QuantumCircuit:
        """Measure qubit i into bit i, growing the classical register if needed."""
        self.num_clbits = max(self.num_clbits, self.num_qubits)
        for q in range(self.num_qubits):
            self.measure(q, q)
        return self

    @property
    def has_measurements(self) -> bool:
        return any(op.kind == "MEASURE" for op in self.ops)

    def unitary_ops(self) -> list[Gate]:
        return [op for op in self.ops if op.is_unitary]


def strip_measurements(circuit: QuantumCircuit) -> tuple[QuantumCircuit, dict[int, int]]:
    """Split off the trailing measurements.

    Returns the measurement-free circuit and a ``qubit -> clbit`` map. Barriers
    that sit between measurements are dropped with them.
    """
    ops = list(circuit.ops)
    first = next((i for i, op in enumerate(ops) if op.kind == "MEASURE"), len(ops))
    measures: dict[int, int] = {}
    for op in ops[first:]:
        if op.kind == "MEASURE":
            measures[op.qubits[0]] = op.clbit
        elif op.kind != "BARRIER":
            raise CircuitError("mid-circuit measurement is not supported")
    body = QuantumCircuit(circuit.num_qubits, circuit.num_clbits, ops[:first], circuit.name)
    return body, measures


def invert(circuit: QuantumCircuit) -> QuantumCircuit:
    """Adjoint circuit: every gate replaced by its adjoint, in reverse order."""
    if circuit.has_measurements:
        raise CircuitError("cannot invert a circuit containing measurements")
    ops = [op if op.kind == "BARRIER" else op.adjoint() for op in reversed(circuit.ops)]
    return QuantumCircuit(circuit.num_qubits, circuit.num_clbits, ops, circuit.name + "_inv")


def depth(circuit: QuantumCircuit) -> int:
    level = [0] * circuit.num_qubits
    for op in circuit.ops:
        if op.kind == "BARRIER":
            top = max(level[q] for q in op.qubits)
            for q in op.qubits:
                level[q] = top
            continue
        top = max(level[q] for q in op.qubits) + 1
        for q in op.qubits:
            level[q] = top
    return max(level, default=0)


def gate_counts(circuit: QuantumCircuit) -> dict[str, int]:
    return dict(Counter(op.kind for op in circuit.ops))


def relabel(circuit: QuantumCircuit, mapping: Sequence[int], width: int) -> QuantumCircuit:
    """Move every operation onto ``mapping[q]`` in a circuit of ``width`` qubits."""
    if len(set(mapping[: circuit.num_qubits])) != circuit.num_qubits:
        raise CircuitError("qubit mapping must be injective")
    out = QuantumCircuit(width, circuit.num_clbits, name=circuit.name)
    for op in circuit.ops:
        out.append(op.remap(mapping))
    return out
