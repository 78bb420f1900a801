import json

import numpy as np
import pytest
from click.testing import CliRunner

from quditsynth.cli import main, parse_range
from quditsynth.jsonio import matrix_to_json, vector_to_json
from quditsynth.linalg import haar_unitary, random_state


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workdir(tmp_path, rng):
    np.random.default_rng(4)
    u = haar_unitary(4, rng)
    psi = random_state(8, rng)
    upath = tmp_path / "U.json"
    ppath = tmp_path / "psi.json"
    upath.write_text(json.dumps(matrix_to_json(u)))
    ppath.write_text(json.dumps(vector_to_json(psi)))
    return tmp_path


def test_parse_range():
    assert parse_range("2..5") == [2, 3, 4, 5]
    assert parse_range("3") == [3]
    assert parse_range("2,4..5") == [2, 4, 5]


def test_version_flag(runner):
    res = runner.invoke(main, ["--version"])
    assert res.exit_code == 0
    assert "qsynth" in res.output and "format" in res.output


def test_club_seq(runner):
    res = runner.invoke(main, ["club-seq", "-d", "3", "-n", "2"])
    assert res.exit_code == 0
    assert res.output.split() == ["0c", "1c", "2c", "cc"]
    res = runner.invoke(main, ["club-seq", "-d", "2", "-n", "8", "--count-only"])
    assert res.output.strip() == "255"


def test_synth_lower_verify_pipeline(runner, workdir):
    u = workdir / "U.json"
    circ = workdir / "circ.json"
    lowered = workdir / "lowered.json"
    report = workdir / "counts.json"

    res = runner.invoke(main, ["synth", "unitary", "--algo", "triangle",
                               "--in", str(u), "--out", str(circ)])
    assert res.exit_code == 0, res.output

    res = runner.invoke(main, ["lower", "--level", "cinc", "--in", str(circ),
                               "--out", str(lowered), "--report", str(report)])
    assert res.exit_code == 0, res.output
    assert "cinc=18" in res.output

    res = runner.invoke(main, ["verify", "--circuit", str(lowered),
                               "--target", str(u), "--level", "cinc"])
    assert res.exit_code == 0, res.output
    body = json.loads(res.output)
    assert body["gate_set_ok"] and body["phase_adjusted_error"] < 1e-7

    rep = json.loads(report.read_text())
    assert rep["counts"]["cinc"] == 18


def test_verify_failure_exit_code(runner, workdir, rng):
    # Compare the circuit of one unitary against a different target.
    u2 = workdir / "U2.json"
    u2.write_text(json.dumps(matrix_to_json(haar_unitary(4, rng))))
    circ = workdir / "c.json"
    res = runner.invoke(main, ["synth", "unitary", "--in", str(workdir / "U.json"),
                               "--out", str(circ)])
    assert res.exit_code == 0
    res = runner.invoke(main, ["verify", "--circuit", str(circ), "--target", str(u2)])
    assert res.exit_code == 1


def test_input_error_exit_code(runner, workdir):
    bad = workdir / "bad.json"
    bad.write_text(json.dumps({"rows": 2, "cols": 2, "re": [1, 0, 0, 1], "im": [0, 0, 0, 0]}))
    # Identity is unitary; break it instead.
    bad.write_text(json.dumps({"rows": 2, "cols": 2, "re": [1, 1, 1, 1], "im": [0, 0, 0, 0]}))
    out = workdir / "out.json"
    res = runner.invoke(main, ["synth", "unitary", "--in", str(bad), "--out", str(out)])
    assert res.exit_code == 2
    assert "unitary" in res.output


def test_synth_state_and_simulate(runner, workdir):
    psi = workdir / "psi.json"
    circ = workdir / "sc.json"
    res = runner.invoke(main, ["synth", "state", "--in", str(psi),
                               "--target", "110", "--out", str(circ)])
    assert res.exit_code == 0, res.output
    assert "7 gates" in res.output

    res = runner.invoke(main, ["simulate", "--circuit", str(circ), "--state", str(psi),
                               "--shots", "64", "--seed", "9"])
    assert res.exit_code == 0, res.output
    body = json.loads(res.output)
    pops = body["populations"]
    assert pops[int("110", 2)] > 1 - 1e-9
    assert sum(body["samples"]) == 64


def test_counts_command(runner, tmp_path):
    res = runner.invoke(main, ["counts", "-d", "3", "-n", "3"])
    assert res.exit_code == 0
    body = json.loads(res.output)
    assert body["ell_t"] == 2214

    out = tmp_path / "table.csv"
    res = runner.invoke(main, ["counts", "--table", "-d", "2", "-n", "2..3",
                               "--out", str(out), "--measure-cap", "16"])
    assert res.exit_code == 0, res.output
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 5  # header + 2 cells x 2 algorithms
    assert lines[0].startswith("d,n,algo")


def test_expect_command(runner, workdir, rng):
    from quditsynth.linalg import random_density

    a = rng.standard_normal((4, 4))
    ah = ((a + a.T) / 2).astype(complex)
    afile = workdir / "A.json"
    rfile = workdir / "rho.json"
    afile.write_text(json.dumps(matrix_to_json(ah)))
    rho = random_density(4, rng)
    rfile.write_text(json.dumps(matrix_to_json(rho)))
    res = runner.invoke(main, ["expect", "--a", str(afile), "--rho", str(rfile)])
    assert res.exit_code == 0, res.output
    body = json.loads(res.output)
    assert abs(body["value_re"] - np.trace(ah @ rho).real) < 1e-8

    res = runner.invoke(main, ["expect", "--a", str(afile), "--rho", str(afile)])
    assert res.exit_code == 2  # a Hermitian operator is not a density matrix
