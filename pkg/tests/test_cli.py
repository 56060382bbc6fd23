import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from convchain.cli import cli


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, args):
    result = runner.invoke(cli, args, catch_exceptions=False)
    return result


def test_count_exact_json_matches_documented_shape(runner):
    result = invoke(runner, ["count-exact", "--n1", "2", "--n2", "2", "--json"])
    assert result.exit_code == 0
    assert json.loads(result.output) == {"counts": {"1": "1", "2": "3", "3": "1"}}


def test_count_exact_csv(runner):
    result = invoke(runner, ["count-exact", "--n1", "1", "--n2", "1"])
    assert result.output.splitlines() == ["vertices,count", "1,1", "2,1"]


def test_constants_csv_row(runner):
    result = invoke(runner, ["constants", "--lambda", "1"])
    lines = result.output.splitlines()
    assert lines[0] == "lambda,delta,c,e,c_j,e_j"
    fields = lines[1].split(",")
    assert fields[2] == "0.749320"
    assert fields[3] == "2.702175"


def test_constants_sweep(runner):
    result = invoke(runner, ["constants", "--sweep", "0.5,2,3"])
    assert len(result.output.splitlines()) == 4


def test_dbound(runner):
    result = invoke(runner, ["dbound"])
    value = float(result.output.split("=")[1])
    assert 2.60 <= value <= 2.70


def test_shape_csv(runner):
    result = invoke(runner, ["shape", "--parabola", "--points", "11", "--csv"])
    rows = result.output.strip().splitlines()
    assert len(rows) == 11
    assert rows[0] == "0,0"
    x, y = map(float, rows[-1].split(","))
    assert (x, y) == (1.0, 1.0)


def test_sample_conditioned_csv(runner):
    result = invoke(runner, [
        "sample", "--z1", "0.3", "--seed", "3",
        "--endpoint", "2,2", "--csv",
    ])
    rows = result.output.strip().splitlines()
    assert rows[0] == "0,0"
    assert rows[-1] == "2,2"


def test_out_and_manifest(runner, tmp_path):
    out = tmp_path / "table.json"
    manifest = tmp_path / "runs.jsonl"
    result = invoke(runner, [
        "count-exact", "--n1", "2", "--n2", "2", "--json",
        "--out", str(out), "--manifest", str(manifest),
    ])
    assert result.exit_code == 0
    assert json.loads(out.read_text())["counts"]["2"] == "3"
    record = json.loads(manifest.read_text().splitlines()[0])
    assert record["command"] == "count-exact"
    assert record["parameters"]["n1"] == 2
    assert "wall_time_s" in record and "versions" in record


def test_moments_roundtrip(runner):
    result = invoke(runner, ["moments", "--z1", "0.3", "--lam", "2"])
    body = json.loads(result.output)
    assert body["expected_endpoint"][0] == pytest.approx(1.1379172668, rel=1e-6)


def test_calibrate_command(runner):
    result = invoke(runner, ["calibrate", "--kind", "endpoint", "--n", "50"])
    body = json.loads(result.output)
    assert body["moments"]["expected_endpoint"][0] == pytest.approx(50.0, rel=1e-6)


def test_random_model_command(runner):
    result = invoke(runner, ["random-model", "--k", "1", "--trials", "20000"])
    body = json.loads(result.output)
    assert body["exact"] == 0.5


def test_jarnik_command(runner):
    result = invoke(runner, ["jarnik"])
    body = json.loads(result.output)
    assert body["c_j"] == pytest.approx(0.5487, abs=1e-3)


# exit codes go through main(), which needs a real process
def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "convchain.cli", *args],
        capture_output=True, text=True,
    )


def test_exit_code_domain_error():
    proc = run_cli("constants", "--lambda", "-3")
    assert proc.returncode == 2
    assert "domain" in proc.stderr


def test_exit_code_budget_error():
    proc = run_cli("count-exact", "--n1", "40", "--n2", "40")
    assert proc.returncode == 3


def test_exit_code_usage_error():
    proc = run_cli("no-such-command")
    assert proc.returncode == 64
    proc = run_cli("constants")
    assert proc.returncode == 64


def test_manifest_reproducibility(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.json"
        proc = run_cli(
            "sample", "--z1", "0.4", "--seed", "9", "--count", "2",
            "--out", str(out),
        )
        assert proc.returncode == 0
        outs.append(out.read_text())
    assert outs[0] == outs[1]
