"""Decision-diagram based simulation, mapping and equivalence checking of quantum circuits."""

from .benchgen import BenchmarkSpec, get_benchmark
from .circuit import Gate, QuantumCircuit, depth, gate_counts, invert, strip_measurements
from .dd import DDPackage, MatrixDD, VectorDD, fidelity, identity_dd, node_count
from .equivalence import (
    Equivalence,
    EquivalenceConfig,
    EquivalenceResult,
    LayoutSpec,
    check_construction,
    check_simulation,
    verify,
)
from .mapper import CouplingMap, Layout, MapperConfig, MappingResult, load_coupling_map, map_exact_small, map_heuristic
from .qasm import parse_qasm, write_qasm
from .simulator import SimulationResult, sample, simulate_state

__version__ = "0.1.0"

__all__ = [
    "BenchmarkSpec", "CouplingMap", "DDPackage", "Equivalence", "EquivalenceConfig",
    "EquivalenceResult", "Gate", "Layout", "LayoutSpec", "MapperConfig", "MappingResult",
    "MatrixDD", "QuantumCircuit", "SimulationResult", "VectorDD", "check_construction",
    "check_simulation", "depth", "fidelity", "gate_counts", "get_benchmark", "identity_dd",
    "invert", "load_coupling_map", "map_exact_small", "map_heuristic", "node_count",
    "parse_qasm", "sample", "simulate_state", "strip_measurements", "verify", "write_qasm",
]
