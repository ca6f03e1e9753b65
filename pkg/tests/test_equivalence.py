from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from conftest import random_circuit
from oracle import equal_up_to_phase, statevector, unitary
from qdd.benchgen import get_benchmark
from qdd.circuit import Gate, QuantumCircuit, invert
from qdd.equivalence import (
    Equivalence,
    EquivalenceConfig,
    EquivalenceError,
    LayoutSpec,
    Stimulus,
    _schedule,
    check_construction,
    check_simulation,
    confirm_counterexample,
    permutation_swaps,
    prepare_pair,
    random_stimuli,
    verify,
    verify_mapping,
)
from qdd.mapper import Layout, map_heuristic
from qdd.qasm import load_qasm


def test_self_equivalence(rng):
    for _ in range(5):
        qc = random_circuit(rng, 4, 10)
        res = check_construction(qc, qc.copy())
        assert res.equivalence is Equivalence.EQUIVALENT
        assert res.stats["final_nodes"] == 4


def test_ghz_extra_x_counterexample(corpus):
    res = check_construction(load_qasm(corpus / "ghz3.qasm"), load_qasm(corpus / "ghz3_x.qasm"))
    assert res.equivalence is Equivalence.NOT_EQUIVALENT
    assert res.counterexample == Stimulus("basis", bits="000")
    assert res.stats["counterexample_fidelity"] < 1 - 1e-9


@pytest.mark.parametrize("theta", [0.1, 1.0, -2.5, math.pi])
def test_rz_vs_p_global_phase(theta):
    res = check_construction(QuantumCircuit(1).rz(theta, 0), QuantumCircuit(1).p(theta, 0))
    assert res.equivalence is Equivalence.EQUIVALENT_UP_TO_GLOBAL_PHASE
    assert abs(res.phase - cmath.exp(-0.5j * theta)) < 1e-9


def test_relative_phase_is_refuted():
    # S vs Z differ by a relative phase; the miter is diagonal
    res = check_construction(QuantumCircuit(2).s(1), QuantumCircuit(2).z(1))
    assert res.equivalence is Equivalence.NOT_EQUIVALENT
    assert res.counterexample.kind == "product"
    assert res.counterexample.angles[1][0] == pytest.approx(math.pi / 2)
    assert res.counterexample.angles[0] == (0.0, 0.0, 0.0)
    assert confirm_counterexample(QuantumCircuit(2).s(1), QuantumCircuit(2).z(1), res.counterexample) < 1 - 1e-9


def test_commuting_rewrite_is_equivalent():
    a = QuantumCircuit(3).h(0).cx(0, 1).t(2).rz(0.3, 2).cz(1, 2)
    b = QuantumCircuit(3).t(2).h(0).rz(0.3, 2).cx(0, 1).cz(2, 1)
    assert check_construction(a, b).equivalence is Equivalence.EQUIVALENT


def test_swap_decomposition_is_equivalent():
    a = QuantumCircuit(2).swap(0, 1)
    b = QuantumCircuit(2).cx(0, 1).cx(1, 0).cx(0, 1)
    assert check_construction(a, b).equivalence is Equivalence.EQUIVALENT


def test_measurements_are_ignored(corpus):
    ghz = load_qasm(corpus / "ghz3.qasm")
    body = QuantumCircuit(3).h(2).cx(2, 1).cx(1, 0)
    assert check_construction(ghz, body).considered_equivalent()


class TestSimulationChecker:
    def test_never_proves(self, rng):
        qc = random_circuit(rng, 3, 6)
        res = check_simulation(qc, qc.copy(), k=8, seed=1)
        assert res.equivalence is Equivalence.NO_INFORMATION
        assert res.stats["probably_equivalent"] and res.stats["stimuli_run"] == 8

    def test_finds_difference(self, corpus):
        res = check_simulation(load_qasm(corpus / "ghz3.qasm"), load_qasm(corpus / "ghz3_x.qasm"), k=4, seed=0)
        assert res.equivalence is Equivalence.NOT_EQUIVALENT
        assert res.method == "simulation"

    def test_stimuli_alternate(self):
        stims = random_stimuli(3, 5, seed=4)
        assert [s.kind for s in stims] == ["basis", "product", "basis", "product", "basis"]
        assert stims == random_stimuli(3, 5, seed=4)

    def test_product_preparation_matches_dense(self):
        stim = Stimulus("product", angles=((0.4, 1.2, -0.3), (2.0, 0.0, 0.7)))
        got = statevector(QuantumCircuit(2, ops=stim.preparation()))
        singles = []
        for theta, phi, lam in stim.angles:
            v = np.array([math.cos(theta / 2) * cmath.exp(-0.5j * (phi + lam)), math.sin(theta / 2) * cmath.exp(0.5j * (phi - lam))])
            singles.append(v)
        assert np.allclose(got, np.kron(singles[1], singles[0]))

    def test_stimulus_json_roundtrip(self):
        for s in random_stimuli(3, 4, seed=2):
            assert Stimulus.from_json(s.to_json()) == s


class TestSchedule:
    @pytest.mark.parametrize("m, n", [(0, 0), (3, 0), (0, 4), (5, 5), (2, 7), (9, 4)])
    def test_counts(self, m, n):
        order = _schedule(m, n, "proportional")
        assert order.count(True) == m and order.count(False) == n

    def test_ties_advance_first(self):
        assert _schedule(2, 2, "proportional") == [True, False, True, False]

    def test_unknown_scheme(self):
        with pytest.raises(EquivalenceError):
            _schedule(1, 1, "random")

    def test_scheme_does_not_change_verdict(self, rng):
        for _ in range(5):
            a = random_circuit(rng, 3, 6)
            b = a.copy()
            b.append(Gate("X", (1,)))
            for other in (a.copy(), b):
                verdicts = {check_construction(a, other, config=EquivalenceConfig(scheme=s)).equivalence for s in ("proportional", "sequential")}
                assert len(verdicts) == 1


class TestLayouts:
    def test_permutation_swaps(self):
        start = Layout((0, 1, 2, 3), 2)
        end = Layout((2, 0, 1, 3), 2)
        where = list(start.positions)
        for a, b in permutation_swaps(start, end):
            where = [b if p == a else a if p == b else p for p in where]
        assert tuple(where) == end.positions

    def test_mapped_ghz_equivalent(self, five_qubit_map):
        ghz = get_benchmark("ghz", circuit_size=4)
        res = map_heuristic(ghz, five_qubit_map)
        out = verify_mapping(ghz, res)
        assert out.considered_equivalent()
        assert out.method == "construction"

    def test_wrong_layout_refuted(self, line8_map):
        qc = QuantumCircuit(3).h(0).cx(0, 2)
        res = map_heuristic(qc, line8_map)
        assert res.swaps_added == 1
        bad = LayoutSpec(res.initial_layout.positions, res.initial_layout.positions, 8)
        out = verify(qc, res.mapped, bad)
        assert out.equivalence is Equivalence.NOT_EQUIVALENT

    def test_partial_layout_from_json(self, line8_map):
        qc = QuantumCircuit(3).h(0).cx(0, 2)
        res = map_heuristic(qc, line8_map)
        data = {
            "initial_layout": list(res.initial_layout.logical()),
            "final_layout": list(res.final_layout.logical()),
            "num_physical": 8,
        }
        assert verify(qc, res.mapped, LayoutSpec.from_json(data)).considered_equivalent()

    def test_width_mismatch_requires_layout(self):
        with pytest.raises(EquivalenceError):
            prepare_pair(QuantumCircuit(2), QuantumCircuit(3))

    def test_prepare_pair_dense(self, rng, five_qubit_map):
        qc = random_circuit(rng, 3, 5)
        res = map_heuristic(qc, five_qubit_map)
        a, b = prepare_pair(qc, res.mapped, LayoutSpec.from_mapping(res))
        assert a.num_qubits == b.num_qubits == 5
        assert equal_up_to_phase(unitary(a), unitary(b), 1e-9)


def test_node_budget_gives_no_information(rng):
    qc = random_circuit(rng, 5, 12)
    other = qc.copy()
    other.append(Gate("T", (2,)))
    res = check_construction(qc, other, config=EquivalenceConfig(node_budget=3))
    assert res.equivalence is Equivalence.NO_INFORMATION
    assert "reason" in res.stats


def test_verify_prefers_simulation_refutation(corpus):
    res = verify(load_qasm(corpus / "ghz3.qasm"), load_qasm(corpus / "ghz3_x.qasm"))
    assert res.equivalence is Equivalence.NOT_EQUIVALENT and res.method == "simulation"


def test_inverse_composition_is_identity(rng):
    verdicts = []
    for _ in range(5):
        qc = random_circuit(rng, 4, 8)
        twice = QuantumCircuit(4, ops=qc.ops + invert(qc).ops)
        res = check_construction(twice, QuantumCircuit(4))
        verdicts.append(res.equivalence)
    assert all(v is Equivalence.EQUIVALENT for v in verdicts)


def test_result_json():
    res = check_construction(QuantumCircuit(1).rz(0.5, 0), QuantumCircuit(1).p(0.5, 0))
    data = res.to_json()
    assert data["equivalence"] == "equivalent_up_to_global_phase"
    assert data["counterexample"] is None
    assert len(data["phase"]) == 2
    assert str(Equivalence.NOT_EQUIVALENT) == "not_equivalent"
