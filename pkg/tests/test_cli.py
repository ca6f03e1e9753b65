from __future__ import annotations

import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from qdd.cli import main


def schema(name: str) -> dict:
    return json.loads(resources.files("qdd").joinpath("schemas", f"{name}.json").read_text())


def run(argv, capsys, monkeypatch=None, stdin=None):
    if stdin is not None:
        import io

        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_ghz(corpus, capsys):
    code, out, _ = run(["simulate", corpus / "ghz3.qasm", "--shots", 200, "--seed", 7], capsys)
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, schema("simulate"))
    assert set(data["counts"]) <= {"000", "111"} and data["seed"] == 7


def test_simulate_amplitudes(corpus, capsys):
    code, out, _ = run(["simulate", corpus / "ghz3.qasm", "--shots", 1, "--seed", 0, "--amplitudes"], capsys)
    data = json.loads(out)
    jsonschema.validate(data, schema("simulate"))
    assert [a[0] for a in data["amplitudes"]] == [0, 7]


def test_simulate_is_deterministic(corpus, capsys):
    first = run(["simulate", corpus / "rotations.qasm", "--seed", 3], capsys)[1]
    second = run(["simulate", corpus / "rotations.qasm", "--seed", 3], capsys)[1]
    assert first == second


def test_simulate_stdin(capsys, monkeypatch):
    code, out, _ = run(["simulate", "-", "--shots", 3, "--seed", 1], capsys, monkeypatch, "qreg q[2]; x q[1];")
    assert code == 0 and json.loads(out)["counts"] == {"10": 3}


def test_ci_requires_seed(corpus, capsys, monkeypatch):
    monkeypatch.setenv("CI", "1")
    code, _, err = run(["simulate", corpus / "ghz3.qasm"], capsys)
    assert code == 64
    assert "seed" in json.loads(err)["error"]["message"]


def test_parse_error_location(corpus, capsys):
    code, out, err = run(["simulate", corpus / "malformed.qasm", "--seed", 0], capsys)
    assert code == 1 and out == ""
    data = json.loads(err)
    jsonschema.validate(data, schema("error"))
    assert data["error"]["line"] == 3 and data["error"]["col"] == 7


@pytest.mark.parametrize("argv", [[], ["bogus"], ["simulate"], ["map", "x.qasm"], ["bench", "--name", "nope", "--size", "3"]])
def test_usage_errors(argv, capsys):
    assert main(argv) == 64


def test_missing_file(capsys):
    assert main(["simulate", "/nonexistent.qasm", "--seed", "1"]) == 64


def test_map_and_verify(corpus, tmp_path, capsys):
    bench = tmp_path / "ghz.qasm"
    assert main(["bench", "--name", "ghz", "--size", "5", "--out", str(bench)]) == 0
    mapped, stats = tmp_path / "mapped.qasm", tmp_path / "stats.json"
    code = main(["map", str(bench), "--coupling", str(corpus / "five_qubit_t.json"), "--out", str(mapped), "--stats", str(stats)])
    assert code == 0
    jsonschema.validate(json.loads(stats.read_text()), schema("map"))
    capsys.readouterr()
    code, out, _ = run(["verify", bench, mapped, "--layout", stats], capsys)
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, schema("verify"))
    assert data["equivalence"] in ("equivalent", "equivalent_up_to_global_phase")


def test_map_decompose_swap_directed(corpus, tmp_path, capsys):
    src = tmp_path / "c.qasm"
    src.write_text("qreg q[3]; cx q[0],q[2]; cx q[2],q[0];")
    stats = tmp_path / "s.json"
    code, out, _ = run(["map", src, "--coupling", corpus / "grid3x3_directed.json", "--decompose-swap", "--stats", stats], capsys)
    assert code == 0 and "swap" not in out
    mapped = tmp_path / "m.qasm"
    mapped.write_text(out)
    assert run(["verify", src, mapped, "--layout", stats], capsys)[0] == 0


def test_map_exact_guard_rail(corpus, capsys):
    code, _, err = run(["map", corpus / "ghz3.qasm", "--coupling", corpus / "grid3x3_directed.json", "--method", "exact"], capsys)
    assert code == 3
    assert json.loads(err)["error"]["type"] == "GuardRailError"


def test_map_bad_coupling(corpus, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"num_qubits": 3, "edges": [[0, 1]]}')
    assert run(["map", corpus / "ghz3.qasm", "--coupling", bad], capsys)[0] == 1


def test_map_layout_too_short(corpus, capsys):
    code, _, _ = run(["map", corpus / "empty.qasm", "--coupling", corpus / "five_qubit_t.json", "--initial-layout", "0,1,2"], capsys)
    assert code == 3


def test_verify_not_equivalent(corpus, capsys):
    code, out, _ = run(["verify", corpus / "ghz3.qasm", corpus / "ghz3_x.qasm"], capsys)
    assert code == 4
    data = json.loads(out)
    jsonschema.validate(data, schema("verify"))
    assert data["counterexample"] is not None


def test_verify_construction_counterexample(corpus, capsys):
    code, out, _ = run(["verify", corpus / "ghz3.qasm", corpus / "ghz3_x.qasm", "--method", "construction"], capsys)
    assert code == 4
    assert json.loads(out)["counterexample"] == {"kind": "basis", "bits": "000"}


def test_verify_simulation_only(corpus, capsys):
    code, out, _ = run(["verify", corpus / "ghz3.qasm", corpus / "ghz3.qasm", "--method", "simulation"], capsys)
    assert code == 5
    assert json.loads(out)["stats"]["probably_equivalent"] is True


def test_verify_node_budget(corpus, capsys, monkeypatch):
    monkeypatch.setenv("QDD_NODE_BUDGET", "1")
    code, out, _ = run(["verify", corpus / "ghz3.qasm", corpus / "ghz3.qasm", "--method", "construction"], capsys)
    assert code == 5 and json.loads(out)["equivalence"] == "no_information"


def test_verify_width_mismatch(corpus, capsys):
    assert run(["verify", corpus / "ghz3.qasm", corpus / "empty.qasm"], capsys)[0] == 64


def test_bench_stdout(capsys):
    code, out, _ = run(["bench", "--name", "qft", "--size", "3"], capsys)
    assert code == 0 and out.startswith("OPENQASM 2.0;")


def test_console_pipeline(tmp_path, corpus):
    """bench | map | verify through real subprocesses and pipes."""
    cmd = [sys.executable, "-m", "qdd"]
    bench = subprocess.run(cmd + ["bench", "--name", "ghz", "--size", "8"], capture_output=True, text=True, check=True)
    stats = tmp_path / "stats.json"
    mapped = subprocess.run(
        cmd + ["map", "-", "--coupling", str(corpus / "line8.json"), "--stats", str(stats)],
        input=bench.stdout, capture_output=True, text=True, check=True,
    )
    (tmp_path / "a.qasm").write_text(bench.stdout)
    verify = subprocess.run(
        cmd + ["verify", str(tmp_path / "a.qasm"), "-", "--layout", str(stats)],
        input=mapped.stdout, capture_output=True, text=True,
    )
    assert verify.returncode == 0, verify.stderr
    assert json.loads(verify.stdout)["equivalence"] == "equivalent"
