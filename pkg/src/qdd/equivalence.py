"""Equivalence checking of circuits by inverse composition and random stimuli.

``check_construction`` builds the operator ``U2^dagger U1`` starting from the
identity, multiplying gates of the first circuit in from one side and
adjoints of the second from the other, interleaved in proportion to the
two gate counts. Equivalent circuits keep the diagram close to the identity
throughout. ``check_simulation`` can only refute: it compares the outputs of
both circuits on random basis and product states.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import CircuitError, Gate, QuantumCircuit, strip_measurements
from .dd import DDPackage, Edge, MatrixDD, Node, VectorDD
from .mapper import Layout, MappingResult
from .simulator import simulate_state

EPS_F = 1e-9
NODE_BUDGET = 10**7


class Equivalence(str, enum.Enum):
    EQUIVALENT = "equivalent"
    EQUIVALENT_UP_TO_GLOBAL_PHASE = "equivalent_up_to_global_phase"
    NOT_EQUIVALENT = "not_equivalent"
    NO_INFORMATION = "no_information"

    def __str__(self) -> str:
        return self.value

    @property
    def considered_equivalent(self) -> bool:
        return self in (Equivalence.EQUIVALENT, Equivalence.EQUIVALENT_UP_TO_GLOBAL_PHASE)


class EquivalenceError(ValueError):
    pass


class NodeBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Stimulus:
    """Input state for a comparison run.

    ``kind == "basis"``: ``bits`` is a bitstring with qubit n-1 leftmost.
    ``kind == "product"``: ``angles[q] = (theta, phi, lam)`` prepares
    ``RZ(phi) RY(theta) RZ(lam) |0>`` on qubit q (up to global phase).
    """

    kind: str
    bits: str = ""
    angles: tuple[tuple[float, float, float], ...] = ()

    @property
    def num_qubits(self) -> int:
        return len(self.bits) if self.kind == "basis" else len(self.angles)

    def preparation(self) -> list[Gate]:
        n = self.num_qubits
        if self.kind == "basis":
            return [Gate("X", (q,)) for q in range(n) if self.bits[n - 1 - q] == "1"]
        gates = []
        for q, (theta, phi, lam) in enumerate(self.angles):
            for kind, angle in (("RZ", lam), ("RY", theta), ("RZ", phi)):
                if angle != 0:
                    gates.append(Gate(kind, (q,), angle))
        return gates

    def to_json(self) -> dict:
        if self.kind == "basis":
            return {"kind": "basis", "bits": self.bits}
        return {"kind": "product", "angles": [list(a) for a in self.angles]}

    @classmethod
    def from_json(cls, data: dict) -> Stimulus:
        if data["kind"] == "basis":
            return cls("basis", bits=data["bits"])
        return cls("product", angles=tuple(tuple(float(x) for x in a) for a in data["angles"]))


@dataclass(frozen=True)
class LayoutSpec:
    """Where the logical qubits of the first circuit live in the wider second one."""

    initial_layout: tuple[int, ...]
    final_layout: tuple[int, ...]
    width: int

    @classmethod
    def from_mapping(cls, result: MappingResult) -> LayoutSpec:
        return cls(result.initial_layout.positions, result.final_layout.positions, result.initial_layout.num_physical)

    @classmethod
    def from_json(cls, data: dict) -> LayoutSpec:
        width = int(data.get("num_physical", data.get("width", 0)))
        return cls(tuple(data["initial_layout"]), tuple(data["final_layout"]), width)

    def to_json(self) -> dict:
        return {"initial_layout": list(self.initial_layout), "final_layout": list(self.final_layout), "num_physical": self.width}

    def layouts(self, num_logical: int) -> tuple[Layout, Layout]:
        """Full permutations; partial assignments are completed in increasing order."""
        init, final = list(self.initial_layout), list(self.final_layout)
        if len(init) < num_logical or len(final) < num_logical:
            raise EquivalenceError("layout does not cover every logical qubit")
        try:
            if len(init) == self.width:
                start = Layout(tuple(init), num_logical)
            else:
                start = Layout.complete(init[:num_logical], self.width)
            if len(final) == self.width:
                end = Layout(tuple(final), num_logical)
            else:
                # ancillas keep their relative order
                end = _complete_final(start, final[:num_logical], self.width)
        except ValueError as exc:
            raise EquivalenceError(str(exc)) from None
        return start, end


def _complete_final(start: Layout, final: list[int], width: int) -> Layout:
    used = set(final)
    free = iter(p for p in range(width) if p not in used)
    ancillas = sorted(range(len(final), width), key=lambda v: start.positions[v])
    positions = final + [0] * (width - len(final))
    for v in ancillas:
        positions[v] = next(free)
    return Layout(tuple(positions), len(final))


@dataclass
class EquivalenceConfig:
    scheme: str = "proportional"  # or "sequential"
    node_budget: int = NODE_BUDGET
    stimuli: int = 16
    seed: int = 0
    fidelity_tolerance: float = EPS_F
    max_counterexample_search: int = 1 << 20


@dataclass
class EquivalenceResult:
    equivalence: Equivalence
    method: str
    counterexample: Stimulus | None = None
    phase: complex | None = None
    stats: dict = field(default_factory=dict)

    def considered_equivalent(self) -> bool:
        return self.equivalence.considered_equivalent

    def to_json(self) -> dict:
        out = {
            "equivalence": self.equivalence.value,
            "method": self.method,
            "counterexample": self.counterexample.to_json() if self.counterexample else None,
            "stats": dict(self.stats),
        }
        if self.phase is not None:
            out["phase"] = [self.phase.real, self.phase.imag]
        return out


def permutation_swaps(start: Layout, end: Layout) -> list[tuple[int, int]]:
    """SWAPs moving the qubit at ``start.physical(v)`` to ``end.physical(v)`` for every v."""
    where = list(start.positions)  # virtual -> current physical
    at = start.inverse()  # physical -> virtual
    swaps = []
    for v in range(len(where)):
        target = end.positions[v]
        here = where[v]
        if here == target:
            continue
        other = at[target]
        swaps.append((min(here, target), max(here, target)))
        where[v], where[other] = target, here
        at[target], at[here] = v, other
    return swaps


def prepare_pair(
    g: QuantumCircuit, g2: QuantumCircuit, layout: LayoutSpec | None = None
) -> tuple[QuantumCircuit, QuantumCircuit]:
    """Unitary bodies of both circuits on a common width.

    With a layout, ``g`` is placed on the physical qubits of the initial
    layout and followed by the SWAPs realizing the move to the final layout.
    """
    try:
        a, _ = strip_measurements(g)
        b, _ = strip_measurements(g2)
    except CircuitError as exc:
        raise EquivalenceError(str(exc)) from None
    a = QuantumCircuit(a.num_qubits, 0, a.unitary_ops(), g.name)
    b = QuantumCircuit(b.num_qubits, 0, b.unitary_ops(), g2.name)
    if layout is None:
        if a.num_qubits != b.num_qubits:
            raise EquivalenceError(
                f"circuits act on {a.num_qubits} and {b.num_qubits} qubits; a layout is required"
            )
        return a, b
    width = layout.width or b.num_qubits
    if b.num_qubits != width:
        raise EquivalenceError(f"second circuit has {b.num_qubits} qubits, layout expects {width}")
    if a.num_qubits > width:
        raise EquivalenceError("first circuit is wider than the layout")
    layout = LayoutSpec(layout.initial_layout, layout.final_layout, width)
    start, end = layout.layouts(a.num_qubits)
    wide = QuantumCircuit(width, 0, [op.remap(start.positions) for op in a.ops], a.name)
    for p, q in permutation_swaps(start, end):
        wide.append(Gate("SWAP", (p, q)))
    return wide, b


def _schedule(m: int, n: int, scheme: str) -> list[bool]:
    """True = next gate from the first circuit, False = from the second."""
    if scheme == "sequential":
        return [True] * m + [False] * n
    if scheme != "proportional":
        raise EquivalenceError(f"unknown scheme {scheme!r}")
    order = []
    i = j = 0
    while i < m or j < n:
        # advance the first circuit while its progress i/m does not exceed j/n
        if j >= n or (i < m and i * n <= j * m):
            order.append(True)
            i += 1
        else:
            order.append(False)
            j += 1
    return order


def build_miter(
    a: QuantumCircuit, b: QuantumCircuit, pkg: DDPackage, config: EquivalenceConfig
) -> tuple[MatrixDD, dict]:
    """Operator ``U_b^dagger U_a`` built outward from the identity.

    Gates of ``a`` enter on the right (last gate first) and adjoints of ``b``
    on the left (last gate first), so a pair of matching gates cancels as
    soon as both are applied.
    """
    n = a.num_qubits
    ga, gb = list(reversed(a.ops)), list(reversed(b.ops))
    current = pkg.identity(n)
    pkg.incref(current)
    peak_live = pkg.live_nodes
    ia = ib = 0
    for from_a in _schedule(len(ga), len(gb), config.scheme):
        if from_a:
            nxt = pkg.multiply_mm(current, pkg.gate_to_matrix_dd(ga[ia], n))
            ia += 1
        else:
            nxt = pkg.multiply_mm(pkg.gate_to_matrix_dd(gb[ib].adjoint(), n), current)
            ib += 1
        pkg.incref(nxt)
        pkg.decref(current)
        current = nxt
        peak_live = max(peak_live, pkg.live_nodes, current.node_count())
        if current.node_count() > config.node_budget:
            raise NodeBudgetExceeded(f"miter exceeded {config.node_budget} nodes")
        pkg.garbage_collect()
    stats = {"gates_first": ia, "gates_second": ib, "peak_nodes": peak_live, "final_nodes": current.node_count()}
    return current, stats


def _diagonal(pkg: DDPackage, m: MatrixDD) -> VectorDD:
    memo: dict[int, Edge] = {}

    def rec(e: Edge) -> Edge:
        if e.w == 0:
            return e
        node = e.node
        if node.var < 0:
            return e
        hit = memo.get(id(node))
        if hit is None:
            hit = pkg.make_vector_node(node.var, (rec(node.edges[0]), rec(node.edges[3])))
            memo[id(node)] = hit
        return pkg._scale(hit, e.w)

    return VectorDD(rec(m.root), m.num_qubits, pkg)


def _leftmost_small(v: VectorDD, threshold: float) -> int | None:
    """First index (integer order) whose |entry|^2 < threshold, or None."""
    low: dict[int, float] = {}

    def min_abs(node: Node) -> float:
        if node.var < 0:
            return 1.0
        hit = low.get(id(node))
        if hit is None:
            hit = min(0.0 if e.w == 0 else abs(e.w) * min_abs(e.node) for e in node.edges)
            low[id(node)] = hit
        return hit

    def walk(e: Edge, acc: float, q: int, index: int):
        if e.w == 0:
            return index << (q + 1)
        acc *= abs(e.w)
        if q < 0:
            return index if acc * acc < threshold else None
        if (acc * min_abs(e.node)) ** 2 >= threshold:
            return None
        for bit in (0, 1):
            found = walk(e.node.edges[bit], acc, q - 1, (index << 1) | bit)
            if found is not None:
                return found
        return None

    return walk(v.root, 1.0, v.num_qubits - 1, 0)


def _fewest_ones_nonzero(v: VectorDD) -> int | None:
    """Index of a nonzero entry with the fewest one-bits (lexicographically first)."""
    best: dict[int, float] = {}
    inf = math.inf

    def ones(e: Edge) -> float:
        if e.w == 0:
            return inf
        node = e.node
        if node.var < 0:
            return 0
        hit = best.get(id(node))
        if hit is None:
            hit = min(ones(node.edges[0]), 1 + ones(node.edges[1]))
            best[id(node)] = hit
        return hit

    target = ones(v.root)
    if target == inf:
        return None
    e, index = v.root, 0
    for _ in range(v.num_qubits):
        zero = e.node.edges[0]
        if ones(zero) == target:
            e, index = zero, index << 1
        else:
            e, index, target = e.node.edges[1], (index << 1) | 1, target - 1
    return index


def _extract_counterexample(pkg: DDPackage, miter: MatrixDD, tol: float) -> Stimulus | None:
    """Input on which the two circuits visibly differ.

    Column j of the miter is the second circuit's inverse applied to the
    first circuit's output on ``|j>``. If some diagonal entry is too small,
    ``|j>`` itself is a counterexample; otherwise the miter is diagonal and
    we look for a phase differing from the one at index 0, using the product
    state with ``|+>`` on that index's one-bits.
    """
    n = miter.num_qubits
    diag = _diagonal(pkg, miter)
    j = _leftmost_small(diag, 1 - tol)
    if j is not None:
        return Stimulus("basis", bits=format(j, f"0{n}b") if n else "")
    phi = diag.amplitude(0)
    ones = pkg.product_state([(1, 1)] * n)
    delta = pkg.add(diag, pkg.scale(ones, -phi))
    j = _fewest_ones_nonzero(delta)
    if j is None:
        return None
    plus = (math.pi / 2, 0.0, 0.0)
    return Stimulus("product", angles=tuple(plus if (j >> q) & 1 else (0.0, 0.0, 0.0) for q in range(n)))


def run_stimulus(
    a: QuantumCircuit, b: QuantumCircuit, stimulus: Stimulus, pkg: DDPackage | None = None
) -> float:
    """Fidelity of the two circuits' outputs on ``stimulus``."""
    pkg = pkg or DDPackage()
    prep = stimulus.preparation()
    sa = simulate_state(QuantumCircuit(a.num_qubits, 0, prep + list(a.ops)), pkg)
    sb = simulate_state(QuantumCircuit(b.num_qubits, 0, prep + list(b.ops)), pkg)
    f = pkg.fidelity(sa, sb)
    pkg.decref(sa)
    pkg.decref(sb)
    return f


def confirm_counterexample(
    g: QuantumCircuit, g2: QuantumCircuit, stimulus: Stimulus, layout: LayoutSpec | None = None
) -> float:
    """Independent simulator run of a counterexample; returns the output fidelity."""
    a, b = prepare_pair(g, g2, layout)
    return run_stimulus(a, b, stimulus)


def check_construction(
    g: QuantumCircuit,
    g2: QuantumCircuit,
    layout: LayoutSpec | None = None,
    config: EquivalenceConfig | None = None,
) -> EquivalenceResult:
    config = config or EquivalenceConfig()
    a, b = prepare_pair(g, g2, layout)
    n = a.num_qubits
    pkg = DDPackage()
    try:
        miter, stats = build_miter(a, b, pkg, config)
    except NodeBudgetExceeded as exc:
        return EquivalenceResult(Equivalence.NO_INFORMATION, "construction", stats={"reason": str(exc), "scheme": config.scheme})
    stats["scheme"] = config.scheme
    ident = pkg.identity_edge(n)
    root = miter.root
    if root.node is ident.node and root.w == 1:
        return EquivalenceResult(Equivalence.EQUIVALENT, "construction", phase=1 + 0j, stats=stats)
    phi = miter.element(0, 0)
    if phi != 0:
        rest = pkg.scale(miter, 1 / phi)
        if rest.root.node is ident.node and abs(rest.root.w - 1) <= pkg.tol and abs(abs(phi) - 1) <= pkg.tol:
            return EquivalenceResult(Equivalence.EQUIVALENT_UP_TO_GLOBAL_PHASE, "construction", phase=phi, stats=stats)
    witness = _extract_counterexample(pkg, miter, config.fidelity_tolerance)
    if witness is not None:
        fid = run_stimulus(a, b, witness)
        stats["counterexample_fidelity"] = fid
        if fid < 1 - config.fidelity_tolerance:
            return EquivalenceResult(Equivalence.NOT_EQUIVALENT, "construction", counterexample=witness, stats=stats)
    stats["reason"] = "difference from identity below the refutation threshold"
    return EquivalenceResult(Equivalence.NO_INFORMATION, "construction", stats=stats)


def random_stimuli(n: int, k: int, seed: int) -> list[Stimulus]:
    """Alternating random basis states and random product states, basis first."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(k):
        if i % 2 == 0:
            bits = "".join(str(int(b)) for b in rng.integers(0, 2, size=n))
            out.append(Stimulus("basis", bits=bits))
        else:
            theta = rng.uniform(0, math.pi, size=n)
            phi = rng.uniform(0, 2 * math.pi, size=n)
            lam = rng.uniform(0, 2 * math.pi, size=n)
            out.append(Stimulus("product", angles=tuple(zip(theta.tolist(), phi.tolist(), lam.tolist()))))
    return out


def check_simulation(
    g: QuantumCircuit,
    g2: QuantumCircuit,
    layout: LayoutSpec | None = None,
    k: int | None = None,
    seed: int | None = None,
    config: EquivalenceConfig | None = None,
) -> EquivalenceResult:
    """Try to refute equivalence on ``k`` random stimuli.

    Never proves equivalence: a run without counterexample returns
    ``no_information`` with ``stats["probably_equivalent"] = True``.
    """
    config = config or EquivalenceConfig()
    k = config.stimuli if k is None else k
    seed = config.seed if seed is None else seed
    a, b = prepare_pair(g, g2, layout)
    pkg = DDPackage()
    worst = 1.0
    for i, stim in enumerate(random_stimuli(a.num_qubits, k, seed)):
        fid = run_stimulus(a, b, stim, pkg)
        worst = min(worst, fid)
        if fid < 1 - config.fidelity_tolerance:
            stats = {"stimuli_run": i + 1, "fidelity": fid, "seed": seed}
            return EquivalenceResult(Equivalence.NOT_EQUIVALENT, "simulation", counterexample=stim, stats=stats)
    stats = {"stimuli_run": k, "min_fidelity": worst, "seed": seed, "probably_equivalent": True}
    return EquivalenceResult(Equivalence.NO_INFORMATION, "simulation", stats=stats)


def verify(
    g: QuantumCircuit,
    g2: QuantumCircuit,
    layout: LayoutSpec | MappingResult | None = None,
    config: EquivalenceConfig | None = None,
) -> EquivalenceResult:
    """Simulation first for a cheap refutation, then the identity construction."""
    config = config or EquivalenceConfig()
    if isinstance(layout, MappingResult):
        layout = LayoutSpec.from_mapping(layout)
    sim = check_simulation(g, g2, layout, config=config)
    if sim.equivalence is Equivalence.NOT_EQUIVALENT:
        return sim
    result = check_construction(g, g2, layout, config)
    result.stats["simulation"] = sim.stats
    if result.equivalence is Equivalence.NO_INFORMATION:
        result.stats["probably_equivalent"] = sim.stats.get("probably_equivalent", False)
    return result


def verify_mapping(original: QuantumCircuit, result: MappingResult, config: EquivalenceConfig | None = None) -> EquivalenceResult:
    return verify(original, result.mapped, LayoutSpec.from_mapping(result), config)
