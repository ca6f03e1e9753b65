from __future__ import annotations

import itertools
import json
from collections import deque

import networkx as nx
import numpy as np
import pytest

from conftest import random_circuit
from oracle import layout_operators, relation
from qdd.circuit import Gate, QuantumCircuit
from qdd.mapper import (
    BudgetExhausted,
    CouplingMap,
    CouplingMapError,
    GuardRailError,
    Layout,
    MapperConfig,
    MappingError,
    _h_cost,
    _route_layer,
    all_pairs_distance,
    decompose_swaps,
    front_layers,
    is_legal,
    legality_violations,
    load_coupling_map,
    map_exact_small,
    map_heuristic,
)


def _mapped_unitary_matches(original: QuantumCircuit, mapped: QuantumCircuit, result) -> bool:
    lhs, rhs = layout_operators(original, mapped, result.initial_layout.positions, result.final_layout.positions)
    return relation(lhs, rhs) != "different"


class TestCouplingMap:
    def test_load_undirected(self, five_qubit_map):
        assert five_qubit_map.num_physical == 5
        assert five_qubit_map.adjacent(1, 0) and five_qubit_map.adjacent(0, 1)
        assert five_qubit_map.neighbors(1) == [0, 2, 3]
        assert five_qubit_map.degree(1) == 3

    def test_load_directed(self, grid_map):
        assert grid_map.directed
        assert (0, 1) in grid_map.edges and (1, 0) not in grid_map.edges
        assert grid_map.adjacent(1, 0)

    @pytest.mark.parametrize(
        "text",
        [
            "not json",
            "[]",
            '{"num_qubits": 3}',
            '{"num_qubits": 3, "edges": [[0, 0], [1, 2]]}',
            '{"num_qubits": 3, "edges": [[0, 1], [1, 3]]}',
            '{"num_qubits": 4, "edges": [[0, 1], [2, 3]]}',
            '{"num_qubits": 2, "edges": [["a", 1]]}',
        ],
    )
    def test_invalid_maps(self, text):
        with pytest.raises(CouplingMapError):
            load_coupling_map(text)

    def test_roundtrip_json(self, grid_map):
        again = load_coupling_map(json.dumps(grid_map.to_json()))
        assert again.edges == grid_map.edges and again.directed

    @pytest.mark.parametrize("name", ["five_qubit_t.json", "line8.json", "grid3x3_directed.json"])
    def test_distances_vs_networkx(self, corpus, name):
        data = json.loads((corpus / name).read_text())
        cmap = load_coupling_map(json.dumps(data))
        g = nx.Graph()
        g.add_nodes_from(range(data["num_qubits"]))
        g.add_edges_from(data["edges"])
        ref = dict(nx.all_pairs_shortest_path_length(g))
        dist = all_pairs_distance(cmap)
        for a, b in itertools.product(range(cmap.num_physical), repeat=2):
            assert dist[a][b] == ref[a][b]


class TestLayout:
    def test_complete_and_inverse(self):
        lay = Layout.complete([3, 1], 5)
        assert lay.positions == (3, 1, 0, 2, 4)
        assert lay.logical() == [3, 1]
        assert lay.inverse()[3] == 0

    @pytest.mark.parametrize("bad", [[1, 1], [0, 7]])
    def test_invalid(self, bad):
        with pytest.raises(MappingError):
            Layout.complete(bad, 5)


class TestHeuristic:
    def test_line_needs_one_swap(self):
        qc = QuantumCircuit(3).cx(0, 2)
        res = map_heuristic(qc, CouplingMap.line(3))
        assert res.swaps_added == 1
        assert is_legal(res.mapped, CouplingMap.line(3))
        assert _mapped_unitary_matches(qc, res.mapped, res)

    def test_already_legal_is_unchanged(self, line8_map):
        qc = QuantumCircuit(4).h(0).cx(0, 1).cx(1, 2).cx(2, 3)
        res = map_heuristic(qc, line8_map)
        assert res.swaps_added == 0 and res.h_added == 0
        assert [op for op in res.mapped.ops] == qc.ops

    def test_directed_cx_fix(self, grid_map):
        qc = QuantumCircuit(2).cx(1, 0)
        res = map_heuristic(qc, grid_map)
        assert res.h_added == 4
        assert [op.kind for op in res.mapped.ops] == ["H", "H", "CX", "H", "H"]
        assert res.mapped.ops[2].qubits == (0, 1)
        assert not legality_violations(res.mapped, grid_map)

    def test_accounting(self, grid_map, rng):
        for _ in range(5):
            qc = random_circuit(rng, 5, 8)
            res = map_heuristic(qc, grid_map)
            counts = res.to_json()["gate_counts"]
            assert counts.get("SWAP", 0) - sum(op.kind == "SWAP" for op in qc.ops) == res.swaps_added
            extra_h = counts.get("H", 0) - sum(op.kind == "H" for op in qc.ops)
            assert extra_h == res.h_added
            assert is_legal(res.mapped, grid_map)

    def test_random_circuits_preserve_semantics(self, five_qubit_map, rng):
        for _ in range(8):
            qc = random_circuit(rng, 4, 6)
            res = map_heuristic(qc, five_qubit_map)
            assert is_legal(res.mapped, five_qubit_map)
            assert _mapped_unitary_matches(qc, res.mapped, res)

    def test_measurements_follow_final_layout(self):
        qc = QuantumCircuit(3, 3).cx(0, 2).measure_all()
        res = map_heuristic(qc, CouplingMap.line(3))
        measured = {op.clbit: op.qubits[0] for op in res.mapped.ops if op.kind == "MEASURE"}
        assert measured == {v: res.final_layout.physical(v) for v in range(3)}

    def test_center_and_explicit_layouts(self, five_qubit_map):
        qc = QuantumCircuit(3).cx(0, 1).cx(0, 2)
        res = map_heuristic(qc, five_qubit_map, MapperConfig("center"))
        assert res.initial_layout.physical(0) == 1
        assert res.swaps_added == 0
        res = map_heuristic(qc, five_qubit_map, MapperConfig([4, 3, 1]))
        assert res.initial_layout.logical() == [4, 3, 1]
        with pytest.raises(MappingError):
            map_heuristic(qc, five_qubit_map, MapperConfig([0, 1]))

    def test_too_wide(self, five_qubit_map):
        with pytest.raises(MappingError):
            map_heuristic(QuantumCircuit(6), five_qubit_map)

    def test_budget_exhausted(self):
        qc = QuantumCircuit(8).cx(0, 7).cx(1, 6).cx(2, 5)
        with pytest.raises(BudgetExhausted):
            map_heuristic(qc, CouplingMap.line(8), MapperConfig(max_expansions=3))

    def test_front_layers(self):
        ops = QuantumCircuit(3).h(0).cx(1, 2).cx(0, 1).h(2).ops
        assert [[op.kind for op in layer] for layer in front_layers(ops)] == [["H", "CX"], ["CX", "H"]]


def _bfs_min_swaps(gates, positions, cmap):
    """Exhaustive oracle: fewest SWAPs placing every gate of the layer on an edge."""
    dist = all_pairs_distance(cmap)
    start = tuple(positions)
    seen = {start: 0}
    queue = deque([start])
    while queue:
        pos = queue.popleft()
        if all(dist[pos[a]][pos[b]] == 1 for a, b in gates):
            return seen[pos]
        inv = {p: v for v, p in enumerate(pos)}
        for a, b in cmap.undirected_edges():
            nxt = list(pos)
            nxt[inv[a]], nxt[inv[b]] = b, a
            nxt = tuple(nxt)
            if nxt not in seen:
                seen[nxt] = seen[pos] + 1
                queue.append(nxt)
    raise AssertionError("unreachable")


class TestAdmissibility:
    @pytest.mark.parametrize("trial", range(25))
    def test_h_never_overestimates_and_astar_is_optimal(self, trial):
        rng = np.random.default_rng(trial)
        cmap = CouplingMap.line(6) if trial % 2 else load_coupling_map(
            '{"num_qubits": 6, "edges": [[0,1],[1,2],[2,3],[3,4],[4,5],[5,0],[1,4]]}'
        )
        perm = tuple(int(p) for p in rng.permutation(6))
        qubits = list(rng.permutation(6))
        gates = [(int(qubits[2 * i]), int(qubits[2 * i + 1])) for i in range(int(rng.integers(1, 4)))]
        dist = all_pairs_distance(cmap)
        best = _bfs_min_swaps(gates, perm, cmap)
        assert _h_cost(gates, perm, dist) <= 3 * best
        swaps, _, _ = _route_layer(gates, perm, cmap, dist, 10**6)
        # expansions are restricted to edges touching active qubits, which keeps optimality
        assert len(swaps) == best


class TestExact:
    def test_zero_swaps_when_a_layout_exists(self, five_qubit_map):
        qc = QuantumCircuit(3).cx(0, 1).cx(1, 2).cx(2, 0)
        # a triangle cannot embed in a tree
        assert map_exact_small(qc, five_qubit_map).swaps_added == 1
        star = QuantumCircuit(4).cx(0, 1).cx(0, 2).cx(0, 3)
        res = map_exact_small(star, five_qubit_map)
        assert res.swaps_added == 0 and res.initial_layout.physical(0) == 1

    def test_exact_is_never_worse(self, five_qubit_map, rng):
        for _ in range(5):
            qc = random_circuit(rng, 4, 4, two_qubit_ratio=0.6)
            ex = map_exact_small(qc, five_qubit_map)
            he = map_heuristic(qc, five_qubit_map)
            assert ex.swaps_added <= he.swaps_added
            assert is_legal(ex.mapped, five_qubit_map)
            assert _mapped_unitary_matches(qc, ex.mapped, ex)

    def test_guard_rails(self, grid_map, five_qubit_map):
        with pytest.raises(GuardRailError):
            map_exact_small(QuantumCircuit(2).cx(0, 1), grid_map)
        big = QuantumCircuit(3)
        for _ in range(13):
            big.cx(0, 1)
        with pytest.raises(GuardRailError):
            map_exact_small(big, five_qubit_map)


class TestDecomposeSwaps:
    def test_undirected(self):
        qc = QuantumCircuit(3).cx(0, 2)
        cmap = CouplingMap.line(3)
        res = map_heuristic(qc, cmap)
        out = decompose_swaps(res, cmap)
        assert "SWAP" not in {op.kind for op in out.ops}
        assert sum(op.kind == "CX" for op in out.ops) == 1 + 3 * res.swaps_added
        assert _mapped_unitary_matches(qc, out, res)

    def test_directed(self, grid_map):
        qc = QuantumCircuit(3).cx(0, 2)
        res = map_heuristic(qc, grid_map)
        out = decompose_swaps(res, grid_map)
        assert is_legal(out, grid_map)
        assert _mapped_unitary_matches(qc, out, res)


def test_legality_checks_direction(grid_map):
    assert legality_violations(QuantumCircuit(9).cx(1, 0), grid_map) == [Gate("CX", (1, 0))]
    assert is_legal(QuantumCircuit(9).cx(0, 1), grid_map)
    assert not is_legal(QuantumCircuit(9).cz(0, 2), grid_map)
