"""Command-line front end: ``qdd simulate | map | verify | bench``.

Results go to stdout as JSON (QASM for ``bench`` and ``map``); logs and
machine-readable errors go to stderr.

Exit codes: 0 success (or equivalent), 1 input could not be parsed,
2 simulation failed, 3 mapping failed, 4 not equivalent, 5 no information,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .benchgen import FAMILIES, BenchmarkError, get_benchmark
from .circuit import CircuitError
from .dd import DDError, DDPackage
from .equivalence import (
    Equivalence,
    EquivalenceConfig,
    EquivalenceError,
    LayoutSpec,
    check_construction,
    check_simulation,
    verify,
)
from .mapper import (
    CouplingMapError,
    MapperConfig,
    MappingError,
    decompose_swaps,
    load_coupling_map,
    map_exact_small,
    map_heuristic,
)
from .qasm import QasmError, parse_qasm, write_qasm
from .simulator import sample

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_SIMULATION = 2
EXIT_MAPPING = 3
EXIT_NOT_EQUIVALENT = 4
EXIT_NO_INFORMATION = 5
EXIT_USAGE = 64
MAX_AMPLITUDE_QUBITS = 20

log = logging.getLogger("qdd")


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, **extra) -> None:
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.extra = extra


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, which means "simulation error" here
        self.print_usage(sys.stderr)
        raise CliError(EXIT_USAGE, "usage", message)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_USAGE, "usage", f"cannot read {path}: {exc.strerror}") from None


def _load_circuit(path: str):
    try:
        circuit = parse_qasm(_read_text(path))
    except QasmError as exc:
        raise CliError(EXIT_PARSE, type(exc).__name__, exc.message, file=path, line=exc.line, col=exc.col) from None
    circuit.name = Path(path).stem if path != "-" else "stdin"
    return circuit


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def cmd_simulate(args) -> int:
    if os.environ.get("CI") == "1" and args.seed is None:
        raise CliError(EXIT_USAGE, "usage", "--seed is required when CI=1")
    circuit = _load_circuit(args.file)
    if args.shots < 1:
        raise CliError(EXIT_USAGE, "usage", "--shots must be at least 1")
    pkg = DDPackage()
    try:
        result = sample(circuit, args.shots, args.seed, pkg)
    except (DDError, CircuitError) as exc:
        raise CliError(EXIT_SIMULATION, "simulation", str(exc)) from None
    out = result.to_json()
    if args.amplitudes:
        if circuit.num_qubits <= MAX_AMPLITUDE_QUBITS:
            vec = result.state.to_numpy()
            out["amplitudes"] = [
                [int(i), float(vec[i].real), float(vec[i].imag)]
                for i in range(len(vec))
                if abs(vec[i]) > pkg.tol
            ]
        else:
            log.warning("amplitudes are only listed for up to %d qubits", MAX_AMPLITUDE_QUBITS)
    _write(None, _dump(out))
    return EXIT_OK


def cmd_map(args) -> int:
    circuit = _load_circuit(args.file)
    try:
        cmap = load_coupling_map(_read_text(args.coupling))
    except CouplingMapError as exc:
        raise CliError(EXIT_PARSE, "coupling_map", str(exc), file=args.coupling) from None
    layout = args.initial_layout
    if layout not in ("identity", "center"):
        try:
            layout = [int(x) for x in layout.split(",")]
        except ValueError:
            raise CliError(EXIT_USAGE, "usage", f"bad --initial-layout {args.initial_layout!r}") from None
    try:
        if args.method == "exact":
            result = map_exact_small(circuit, cmap)
        else:
            result = map_heuristic(circuit, cmap, MapperConfig(layout, args.max_expansions))
    except MappingError as exc:
        raise CliError(EXIT_MAPPING, type(exc).__name__, str(exc)) from None
    mapped = decompose_swaps(result, cmap) if args.decompose_swap else result.mapped
    stats = result.to_json()
    stats["decompose_swap"] = args.decompose_swap
    _write(args.out, write_qasm(mapped))
    if args.stats:
        _write(args.stats, _dump(stats))
    log.info("swaps_added=%d h_added=%d", result.swaps_added, result.h_added)
    return EXIT_OK


def _node_budget() -> int | None:
    raw = os.environ.get("QDD_NODE_BUDGET")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise CliError(EXIT_USAGE, "usage", f"QDD_NODE_BUDGET must be an integer, got {raw!r}") from None


def cmd_verify(args) -> int:
    g = _load_circuit(args.first)
    g2 = _load_circuit(args.second)
    layout = None
    if args.layout:
        try:
            layout = LayoutSpec.from_json(json.loads(_read_text(args.layout)))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CliError(EXIT_PARSE, "layout", f"invalid layout file: {exc}", file=args.layout) from None
    elif g.num_qubits != g2.num_qubits:
        raise CliError(
            EXIT_USAGE, "usage",
            f"circuits have {g.num_qubits} and {g2.num_qubits} qubits; pass --layout",
        )
    config = EquivalenceConfig(scheme=args.scheme, stimuli=args.stimuli, seed=args.seed)
    budget = _node_budget()
    if budget is not None:
        config.node_budget = budget
    try:
        if args.method == "construction":
            result = check_construction(g, g2, layout, config)
        elif args.method == "simulation":
            result = check_simulation(g, g2, layout, config=config)
        else:
            result = verify(g, g2, layout, config)
    except (EquivalenceError, CircuitError) as exc:
        raise CliError(EXIT_USAGE, "usage", str(exc)) from None
    _write(None, _dump(result.to_json()))
    if result.equivalence.considered_equivalent:
        return EXIT_OK
    if result.equivalence is Equivalence.NOT_EQUIVALENT:
        return EXIT_NOT_EQUIVALENT
    return EXIT_NO_INFORMATION


def cmd_bench(args) -> int:
    try:
        circuit = get_benchmark(args.name, circuit_size=args.size, level="alg", seed=args.seed, qft_swaps=args.qft_swaps)
    except BenchmarkError as exc:
        raise CliError(EXIT_USAGE, "usage", str(exc)) from None
    _write(args.out, write_qasm(circuit))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdd", description="Decision-diagram simulation, mapping and verification of quantum circuits.")
    parser.add_argument("--version", action="version", version=f"qdd {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="sample measurement outcomes")
    p.add_argument("file", help="OpenQASM 2.0 file, or - for stdin")
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--amplitudes", action="store_true", help=f"list nonzero amplitudes (up to {MAX_AMPLITUDE_QUBITS} qubits)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("map", help="route a circuit onto a coupling map")
    p.add_argument("file")
    p.add_argument("--coupling", required=True, help="coupling map JSON")
    p.add_argument("--method", choices=("heuristic", "exact"), default="heuristic")
    p.add_argument("--initial-layout", default="identity", help="identity, center, or comma-separated physical qubits")
    p.add_argument("--max-expansions", type=int, default=10**6)
    p.add_argument("--decompose-swap", action="store_true", help="emit SWAPs as three CX gates")
    p.add_argument("--out", help="mapped QASM path (default stdout)")
    p.add_argument("--stats", help="mapping statistics JSON path; usable as --layout for verify")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("verify", help="check two circuits for equivalence")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--layout", help="layout JSON, e.g. the --stats output of map")
    p.add_argument("--method", choices=("auto", "construction", "simulation"), default="auto")
    p.add_argument("--scheme", choices=("proportional", "sequential"), default="proportional")
    p.add_argument("--stimuli", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="generate a benchmark circuit as QASM")
    p.add_argument("--name", required=True, choices=FAMILIES)
    p.add_argument("--size", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--qft-swaps", action="store_true", help="append the final qubit reversal to qft")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.func(args)
    except CliError as exc:
        payload = {"error": {"type": exc.kind, "message": str(exc), **exc.extra}}
        sys.stderr.write(json.dumps(payload) + "\n")
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
