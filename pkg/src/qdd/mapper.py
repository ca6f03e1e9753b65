"""Qubit mapping: layout selection and SWAP insertion for a coupling map.

The heuristic mapper routes one front layer at a time with an A* search over
layouts; ``map_exact_small`` finds a globally SWAP-minimal mapping by
iterative deepening for tiny devices and is used as a reference.

Layouts are stored as full permutations of length ``num_physical``: entry
``v`` is the physical position of virtual qubit ``v``. Virtual qubits
``0..n-1`` are the circuit's qubits, the rest are idle ancillas.
"""

from __future__ import annotations

import heapq
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .circuit import Gate, QuantumCircuit, depth, gate_counts, strip_measurements

SWAP_COST = 3
DIRECTION_FIX_H = 4
EXACT_MAX_PHYSICAL = 6
EXACT_MAX_TWO_QUBIT = 12


class MappingError(ValueError):
    pass


class CouplingMapError(MappingError):
    pass


class BudgetExhausted(MappingError):
    pass


class GuardRailError(MappingError):
    """Instance too large for the exhaustive mapper."""


@dataclass(frozen=True)
class CouplingMap:
    num_physical: int
    edges: frozenset[tuple[int, int]]
    directed: bool = False

    def __post_init__(self) -> None:
        edges = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise CouplingMapError(f"self-loop on qubit {a}")
            if not (0 <= a < self.num_physical and 0 <= b < self.num_physical):
                raise CouplingMapError(f"edge ({a}, {b}) outside 0..{self.num_physical - 1}")
            edges.add((a, b))
            if not self.directed:
                edges.add((b, a))
        object.__setattr__(self, "edges", frozenset(edges))
        if self.num_physical < 1:
            raise CouplingMapError("a device needs at least one qubit")
        if self.num_physical > 1 and not _connected(self.num_physical, self.undirected_edges()):
            raise CouplingMapError("coupling map is disconnected")

    def undirected_edges(self) -> list[tuple[int, int]]:
        return sorted({(min(a, b), max(a, b)) for a, b in self.edges})

    def neighbors(self, p: int) -> list[int]:
        return sorted({b for a, b in self.edges if a == p} | {a for a, b in self.edges if b == p})

    def adjacent(self, a: int, b: int) -> bool:
        return (a, b) in self.edges or (b, a) in self.edges

    def degree(self, p: int) -> int:
        return len(self.neighbors(p))

    def to_json(self) -> dict:
        edges = sorted(self.edges) if self.directed else self.undirected_edges()
        return {"num_qubits": self.num_physical, "directed": self.directed, "edges": [list(e) for e in edges]}

    @classmethod
    def line(cls, n: int) -> CouplingMap:
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    @classmethod
    def complete(cls, n: int) -> CouplingMap:
        return cls(n, frozenset(itertools.combinations(range(n), 2)))


def _connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    adj = {i: [] for i in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    todo = [0]
    while todo:
        for nb in adj[todo.pop()]:
            if nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return len(seen) == n


def load_coupling_map(text: str) -> CouplingMap:
    """Parse ``{"num_qubits": int, "directed": bool, "edges": [[a, b], ...]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CouplingMapError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict) or "num_qubits" not in data or "edges" not in data:
        raise CouplingMapError("coupling map needs 'num_qubits' and 'edges'")
    try:
        edges = frozenset((int(a), int(b)) for a, b in data["edges"])
    except (TypeError, ValueError):
        raise CouplingMapError("edges must be pairs of integers") from None
    return CouplingMap(int(data["num_qubits"]), edges, bool(data.get("directed", False)))


def all_pairs_distance(cmap: CouplingMap) -> list[list[int]]:
    """Hop counts on the undirected skeleton, by breadth-first search from every qubit."""
    n = cmap.num_physical
    adj = [cmap.neighbors(p) for p in range(n)]
    dist = []
    for src in range(n):
        row = [-1] * n
        row[src] = 0
        queue = deque([src])
        while queue:
            p = queue.popleft()
            for nb in adj[p]:
                if row[nb] < 0:
                    row[nb] = row[p] + 1
                    queue.append(nb)
        dist.append(row)
    return dist


@dataclass(frozen=True)
class Layout:
    """Virtual-to-physical assignment; ``positions[v]`` is where virtual ``v`` sits."""

    positions: tuple[int, ...]
    num_logical: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        if sorted(self.positions) != list(range(len(self.positions))):
            raise MappingError(f"layout {list(self.positions)} is not a permutation")
        if not 0 <= self.num_logical <= len(self.positions):
            raise MappingError("more logical qubits than positions")

    @classmethod
    def complete(cls, logical: Sequence[int], num_physical: int) -> Layout:
        """Extend a logical-only assignment; ancillas fill free positions in order."""
        logical = [int(p) for p in logical]
        if len(set(logical)) != len(logical):
            raise MappingError("layout must be injective")
        if any(not 0 <= p < num_physical for p in logical):
            raise MappingError("layout refers to a missing physical qubit")
        free = [p for p in range(num_physical) if p not in set(logical)]
        return cls(tuple(logical + free), len(logical))

    @property
    def num_physical(self) -> int:
        return len(self.positions)

    def physical(self, v: int) -> int:
        return self.positions[v]

    def inverse(self) -> list[int]:
        inv = [0] * len(self.positions)
        for v, p in enumerate(self.positions):
            inv[p] = v
        return inv

    def logical(self) -> list[int]:
        return list(self.positions[: self.num_logical])


@dataclass
class MappingResult:
    mapped: QuantumCircuit
    initial_layout: Layout
    final_layout: Layout
    swaps_added: int
    h_added: int
    depth_before: int
    depth_after: int
    method: str = "heuristic"
    expansions: int = 0
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "num_logical": self.initial_layout.num_logical,
            "num_physical": self.initial_layout.num_physical,
            "initial_layout": list(self.initial_layout.positions),
            "final_layout": list(self.final_layout.positions),
            "swaps_added": self.swaps_added,
            "h_added": self.h_added,
            "depth_before": self.depth_before,
            "depth_after": self.depth_after,
            "expansions": self.expansions,
            "gate_counts": gate_counts(self.mapped),
        }


@dataclass
class MapperConfig:
    """``initial_layout`` is ``"identity"``, ``"center"`` or an explicit logical assignment."""

    initial_layout: str | Sequence[int] = "identity"
    max_expansions: int = 10**6


def legality_violations(circuit: QuantumCircuit, cmap: CouplingMap) -> list[Gate]:
    """Two-qubit unitaries that do not sit on a coupling edge (direction respected)."""
    bad = []
    for op in circuit.ops:
        if op.is_unitary and len(op.qubits) == 2:
            a, b = op.qubits
            if cmap.directed:
                if (a, b) not in cmap.edges:
                    bad.append(op)
            elif not cmap.adjacent(a, b):
                bad.append(op)
    return bad


def is_legal(circuit: QuantumCircuit, cmap: CouplingMap) -> bool:
    return circuit.num_qubits <= cmap.num_physical and not legality_violations(circuit, cmap)


def front_layers(ops: Sequence[Gate]) -> list[list[Gate]]:
    """As-soon-as-possible layering: each layer holds operations on disjoint qubits."""
    layers: list[list[Gate]] = []
    level: dict[int, int] = {}
    for op in ops:
        k = max((level.get(q, 0) for q in op.qubits), default=0)
        if k == len(layers):
            layers.append([])
        layers[k].append(op)
        for q in op.qubits:
            level[q] = k + 1
    return layers


def _center_layout(circuit: QuantumCircuit, cmap: CouplingMap) -> list[int]:
    degree = [0] * circuit.num_qubits
    for op in circuit.ops:
        if op.is_unitary and len(op.qubits) == 2:
            for q in op.qubits:
                degree[q] += 1
    logical = sorted(range(circuit.num_qubits), key=lambda q: (-degree[q], q))
    physical = sorted(range(cmap.num_physical), key=lambda p: (-cmap.degree(p), p))
    layout = [0] * circuit.num_qubits
    for q, p in zip(logical, physical):
        layout[q] = p
    return layout


def _initial_layout(circuit: QuantumCircuit, cmap: CouplingMap, spec) -> Layout:
    if isinstance(spec, str):
        if spec == "identity":
            return Layout.complete(range(circuit.num_qubits), cmap.num_physical)
        if spec == "center":
            return Layout.complete(_center_layout(circuit, cmap), cmap.num_physical)
        raise MappingError(f"unknown initial layout strategy {spec!r}")
    spec = list(spec)
    if len(spec) == cmap.num_physical and len(spec) > circuit.num_qubits:
        return Layout(tuple(spec), circuit.num_qubits)
    if len(spec) != circuit.num_qubits:
        raise MappingError("explicit layout must cover every circuit qubit")
    return Layout.complete(spec, cmap.num_physical)


class _Emitter:
    """Builds the physical circuit and keeps the gate accounting."""

    def __init__(self, circuit: QuantumCircuit, cmap: CouplingMap) -> None:
        self.cmap = cmap
        self.out = QuantumCircuit(cmap.num_physical, circuit.num_clbits, name=circuit.name + "_mapped")
        self.swaps = 0
        self.h_added = 0

    def _oriented(self, a: int, b: int) -> tuple[int, int]:
        return (a, b) if (a, b) in self.cmap.edges else (b, a)

    def swap(self, a: int, b: int) -> None:
        self.out.append(Gate("SWAP", self._oriented(a, b)))
        self.swaps += 1

    def gate(self, op: Gate, pos: Sequence[int]) -> None:
        phys = op.remap(pos)
        if not (op.is_unitary and len(op.qubits) == 2):
            self.out.append(phys)
            return
        a, b = phys.qubits
        if not self.cmap.adjacent(a, b):
            raise MappingError(f"internal error: {phys} is not on an edge")
        if phys.kind == "CX":
            if (a, b) in self.cmap.edges:
                self.out.append(phys)
            else:
                for g in (Gate("H", (a,)), Gate("H", (b,)), Gate("CX", (b, a)), Gate("H", (a,)), Gate("H", (b,))):
                    self.out.append(g)
                self.h_added += DIRECTION_FIX_H
        else:
            self.out.append(Gate(phys.kind, self._oriented(a, b)))


def _h_cost(gates: Sequence[tuple[int, int]], pos: Sequence[int], dist) -> int:
    """Lower bound on the SWAP cost still needed for one layer.

    A SWAP moves two qubits by one hop each, and gates in a layer are
    disjoint, so one SWAP shortens the summed excess distance by at most 2
    and a single gate's excess by at most 1.
    """
    excess = [dist[pos[a]][pos[b]] - 1 for a, b in gates]
    if not excess:
        return 0
    return SWAP_COST * max(max(excess), (sum(excess) + 1) // 2)


def _route_layer(
    gates: list[tuple[int, int]],
    positions: tuple[int, ...],
    cmap: CouplingMap,
    dist,
    budget: int,
) -> tuple[list[tuple[int, int]], tuple[int, ...], int]:
    """A* over SWAP sequences until every gate of the layer is on an edge.

    Returns the SWAPs (physical pairs), the resulting positions, and the
    number of expansions used. Ties prefer lower h, then first-in.
    """
    edges = cmap.undirected_edges()
    involved = sorted({q for g in gates for q in g})
    counter = itertools.count()
    h0 = _h_cost(gates, positions, dist)
    frontier = [(h0, h0, next(counter), positions, ())]
    best_g = {positions: 0}
    expansions = 0
    while frontier:
        f, h, _, pos, path = heapq.heappop(frontier)
        g = len(path) * SWAP_COST
        if best_g.get(pos, g) < g:
            continue
        if h == 0 and all(dist[pos[a]][pos[b]] == 1 for a, b in gates):
            return list(path), pos, expansions
        expansions += 1
        if expansions > budget:
            raise BudgetExhausted(f"search node budget of {budget} expansions exhausted")
        active = {pos[q] for q in involved}
        inv = {p: v for v, p in enumerate(pos)}
        for a, b in edges:
            if a not in active and b not in active:
                continue
            nxt = list(pos)
            va, vb = inv[a], inv[b]
            nxt[va], nxt[vb] = b, a
            nxt = tuple(nxt)
            ng = g + SWAP_COST
            if ng >= best_g.get(nxt, ng + 1):
                continue
            best_g[nxt] = ng
            nh = _h_cost(gates, nxt, dist)
            heapq.heappush(frontier, (ng + nh, nh, next(counter), nxt, path + ((a, b),)))
    raise MappingError("no SWAP sequence satisfies the layer")


def _check_width(circuit: QuantumCircuit, cmap: CouplingMap) -> None:
    if circuit.num_qubits > cmap.num_physical:
        raise MappingError(
            f"circuit needs {circuit.num_qubits} qubits but the device has {cmap.num_physical}"
        )


def _finish(
    circuit: QuantumCircuit,
    body: QuantumCircuit,
    measures: dict[int, int],
    em: _Emitter,
    initial: Layout,
    final_positions: tuple[int, ...],
    method: str,
    expansions: int,
) -> MappingResult:
    final = Layout(final_positions, circuit.num_qubits)
    for q, c in sorted(measures.items()):
        em.out.append(Gate("MEASURE", (final.physical(q),), clbit=c))
    return MappingResult(
        mapped=em.out,
        initial_layout=initial,
        final_layout=final,
        swaps_added=em.swaps,
        h_added=em.h_added,
        depth_before=depth(circuit),
        depth_after=depth(em.out),
        method=method,
        expansions=expansions,
    )


def map_heuristic(
    circuit: QuantumCircuit, cmap: CouplingMap, config: MapperConfig | None = None
) -> MappingResult:
    """Route ``circuit`` onto ``cmap`` layer by layer with A*-chosen SWAPs."""
    config = config or MapperConfig()
    _check_width(circuit, cmap)
    body, measures = strip_measurements(circuit)
    dist = all_pairs_distance(cmap)
    initial = _initial_layout(circuit, cmap, config.initial_layout)
    pos = initial.positions
    em = _Emitter(circuit, cmap)
    expansions = 0
    for layer in front_layers(body.ops):
        gates = [op.qubits for op in layer if op.is_unitary and len(op.qubits) == 2]
        if any(dist[pos[a]][pos[b]] != 1 for a, b in gates):
            swaps, pos, used = _route_layer(gates, pos, cmap, dist, config.max_expansions - expansions)
            expansions += used
            for a, b in swaps:
                em.swap(a, b)
        for op in layer:
            em.gate(op, pos)
    return _finish(circuit, body, measures, em, initial, pos, "heuristic", expansions)


def map_exact_small(circuit: QuantumCircuit, cmap: CouplingMap) -> MappingResult:
    """SWAP-minimal mapping over all initial layouts and SWAP placements.

    Iterative deepening on the total SWAP count; for each bound every
    placement is explored (memoized on gate index, layout and remaining
    budget). Among minimal solutions the one with the fewest direction-fix H
    gates wins, then the lexicographically smallest SWAP sequence, then the
    smallest initial layout.
    """
    _check_width(circuit, cmap)
    body, measures = strip_measurements(circuit)
    twoq = [op for op in body.ops if op.is_unitary and len(op.qubits) == 2]
    if cmap.num_physical > EXACT_MAX_PHYSICAL or len(twoq) > EXACT_MAX_TWO_QUBIT:
        raise GuardRailError(
            f"exact mapping limited to {EXACT_MAX_PHYSICAL} physical qubits and "
            f"{EXACT_MAX_TWO_QUBIT} two-qubit gates (got {cmap.num_physical}, {len(twoq)})"
        )
    n, m = circuit.num_qubits, len(twoq)
    edges = cmap.undirected_edges()

    def fix_cost(op: Gate, pos: Sequence[int]) -> int:
        a, b = pos[op.qubits[0]], pos[op.qubits[1]]
        if cmap.directed and op.kind == "CX" and (a, b) not in cmap.edges:
            return DIRECTION_FIX_H
        return 0

    memo: dict = {}
    infeasible = None

    def solve(i: int, pos: tuple[int, ...], budget: int):
        """Best (h_added, swap sequence) finishing gates i.. with exactly ``budget`` swaps."""
        if i == m:
            return (0, ()) if budget == 0 else infeasible
        key = (i, pos, budget)
        if key in memo:
            return memo[key]
        best = infeasible
        op = twoq[i]
        a, b = pos[op.qubits[0]], pos[op.qubits[1]]
        if cmap.adjacent(a, b):
            rest = solve(i + 1, pos, budget)
            if rest is not None:
                best = (rest[0] + fix_cost(op, pos), rest[1])
        if budget > 0:
            inv = {p: v for v, p in enumerate(pos)}
            for pa, pb in edges:
                va, vb = inv.get(pa), inv.get(pb)
                if va is None and vb is None:
                    continue
                nxt = list(pos)
                if va is not None:
                    nxt[va] = pb
                if vb is not None:
                    nxt[vb] = pa
                rest = solve(i, tuple(nxt), budget - 1)
                if rest is None:
                    continue
                cand = (rest[0], ((i, pa, pb),) + rest[1])
                if best is None or cand < best:
                    best = cand
        memo[key] = best
        return best

    layouts = list(itertools.permutations(range(cmap.num_physical), n))
    max_budget = m * max(max(r) for r in all_pairs_distance(cmap))
    for budget in range(max_budget + 1):
        found = None
        for start in layouts:
            res = solve(0, start, budget)
            if res is not None:
                cand = (res[0], res[1], start)
                if found is None or cand < found:
                    found = cand
        if found is not None:
            break
    else:  # pragma: no cover - a connected map always admits a routing
        raise MappingError("no mapping found")

    _, swaps, start = found
    initial = Layout.complete(start, cmap.num_physical)
    pos = list(initial.positions)
    inv = initial.inverse()
    em = _Emitter(circuit, cmap)
    by_gap: dict[int, list[tuple[int, int]]] = {}
    for gap, pa, pb in swaps:
        by_gap.setdefault(gap, []).append((pa, pb))
    k = 0
    for op in body.ops:
        if op.is_unitary and len(op.qubits) == 2:
            for pa, pb in by_gap.get(k, []):
                va, vb = inv[pa], inv[pb]
                pos[va], pos[vb] = pb, pa
                inv[pa], inv[pb] = vb, va
                em.swap(pa, pb)
            k += 1
        em.gate(op, pos)
    return _finish(circuit, body, measures, em, initial, tuple(pos), "exact", 0)


def decompose_swaps(result: MappingResult, cmap: CouplingMap) -> QuantumCircuit:
    """Rewrite every SWAP as three CX gates, fixing directions where needed."""
    out = QuantumCircuit(result.mapped.num_qubits, result.mapped.num_clbits, name=result.mapped.name)
    for op in result.mapped.ops:
        if op.kind != "SWAP":
            out.append(op)
            continue
        a, b = op.qubits
        for c, t in ((a, b), (b, a), (a, b)):
            if cmap.directed and (c, t) not in cmap.edges:
                out.extend([Gate("H", (c,)), Gate("H", (t,)), Gate("CX", (t, c)), Gate("H", (c,)), Gate("H", (t,))])
            else:
                out.append(Gate("CX", (c, t)))
    return out
