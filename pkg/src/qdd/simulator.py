"""Strong and weak simulation of circuits on vector decision diagrams."""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field

import numpy as np

from .circuit import QuantumCircuit, strip_measurements
from .dd import TERMINAL, DDError, DDPackage, Edge, Node, VectorDD


class SimulationError(DDError):
    pass


@dataclass
class SimulationResult:
    counts: dict[str, int]
    shots: int
    seed: int
    num_qubits: int
    dd_nodes_peak: int = 0
    state: VectorDD | None = field(default=None, repr=False, compare=False)

    def get_counts(self) -> dict[str, int]:
        return dict(self.counts)

    def to_json(self) -> dict:
        return {
            "counts": dict(sorted(self.counts.items())),
            "shots": self.shots,
            "seed": self.seed,
            "num_qubits": self.num_qubits,
            "dd_nodes_peak": self.dd_nodes_peak,
        }


def simulate_state(circuit: QuantumCircuit, package: DDPackage | None = None) -> VectorDD:
    """Apply every gate to ``|0...0>`` by successive matrix-vector products.

    Trailing measurements are ignored; mid-circuit measurement is rejected.
    """
    pkg = package or DDPackage()
    body, _ = strip_measurements(circuit)
    n = body.num_qubits
    state = pkg.zero_state(n)
    pkg.incref(state)
    for op in body.ops:
        if not op.is_unitary:
            continue
        nxt = pkg.multiply(pkg.gate_to_matrix_dd(op, n), state)
        pkg.incref(nxt)
        pkg.decref(state)
        state = nxt
        pkg.garbage_collect()
    return state


class NormCache:
    """Squared norms of the sub-vectors below each node of one final state."""

    def __init__(self) -> None:
        self._norms: dict[int, float] = {id(TERMINAL): 1.0}
        self._keep: list[Node] = []

    def norm(self, node: Node) -> float:
        hit = self._norms.get(id(node))
        if hit is not None:
            return hit
        total = 0.0
        for e in node.edges:
            if e.w != 0:
                total += abs(e.w) ** 2 * self.norm(e.node)
        self._norms[id(node)] = total
        self._keep.append(node)  # pin ids for the lifetime of the cache
        return total


def subtree_norms(edge: Edge, cache: NormCache | None = None) -> tuple[float, float]:
    """Squared norms ``(p0, p1)`` of the two halves of the vector behind ``edge``.

    The incoming weight is included, so ``p0 + p1`` is the squared norm of the
    whole sub-vector.
    """
    if edge.node.var < 0:
        raise SimulationError("terminal edges have no children")
    cache = cache or NormCache()
    scale = abs(edge.w) ** 2
    out = []
    for e in edge.node.edges:
        out.append(0.0 if e.w == 0 else scale * abs(e.w) ** 2 * cache.norm(e.node))
    return out[0], out[1]


def sample_bits(state: VectorDD, shots: int, seed: int) -> np.ndarray:
    """Draw ``shots`` basis indices from ``state``.

    Randomness comes from ``numpy.random.Generator(PCG64(seed))``; shot ``s``
    consumes the ``s``-th block of ``num_qubits`` uniforms (row-major), one per
    qubit from the most significant down, so any shot can be replayed alone.
    """
    n = state.num_qubits
    if state.root.w == 0:
        raise SimulationError("cannot sample from the zero vector")
    if shots < 1:
        raise SimulationError("shots must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    uniforms = rng.random((shots, max(n, 1)))
    indices = np.zeros(shots, dtype=np.int64)
    if n == 0:
        return indices
    cache = NormCache()
    groups: dict[int, tuple[Node, np.ndarray]] = {id(state.root.node): (state.root.node, np.arange(shots))}
    for level, q in enumerate(range(n - 1, -1, -1)):
        nxt: dict[int, tuple[Node, list]] = {}
        for node, members in groups.values():
            p0, p1 = subtree_norms(Edge(1 + 0j, node), cache)
            take_one = uniforms[members, level] >= p0 / (p0 + p1)
            if p1 == 0:
                take_one[:] = False
            elif p0 == 0:
                take_one[:] = True
            indices[members[take_one]] |= 1 << q
            for bit, mask in ((0, ~take_one), (1, take_one)):
                chosen = members[mask]
                if chosen.size == 0:
                    continue
                child = node.edges[bit].node
                slot = nxt.setdefault(id(child), (child, []))
                slot[1].append(chosen)
        groups = {k: (node, np.concatenate(parts)) for k, (node, parts) in nxt.items()}
    return indices


def sample(
    circuit: QuantumCircuit,
    shots: int = 1024,
    seed: int | None = None,
    package: DDPackage | None = None,
) -> SimulationResult:
    """Weak simulation: measurement counts keyed by bitstring.

    Keys list classical bit ``num_clbits - 1`` first. A circuit without
    measurements is read out on every qubit (key length = qubit count);
    qubits that are not measured are marginalized away.
    """
    if seed is None:
        seed = secrets.randbits(63)
    pkg = package or DDPackage()
    state = simulate_state(circuit, pkg)
    _, measures = strip_measurements(circuit)
    n = circuit.num_qubits
    if measures:
        width = circuit.num_clbits
        wiring = sorted(measures.items())
    else:
        width = n
        wiring = [(q, q) for q in range(n)]
    indices = sample_bits(state, shots, seed)
    keys = np.zeros(shots, dtype=np.int64)
    for q, c in wiring:
        keys |= ((indices >> q) & 1) << c
    values, freq = np.unique(keys, return_counts=True)
    counts = {format(int(v), f"0{width}b") if width else "": int(f) for v, f in zip(values, freq)}
    return SimulationResult(counts, shots, seed, n, pkg.peak_nodes, state)
