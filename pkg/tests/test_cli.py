import csv
import io
import json
import subprocess
import sys

import pytest

from chaoslab import cli
from chaoslab.suite import strip_timing


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def report_of(argv, capsys):
    code, out = run(argv, capsys)
    return code, json.loads(out.out)


def test_basis_constant_l2(capsys):
    code, rep = report_of(["basis-constant", "--param", "spec=L2", "--param", "max_pairs=10"], capsys)
    assert code == cli.EXIT_PASS and rep["pass"]
    assert rep["schema"] == 1
    assert rep["witnesses"]["report"]["max_ratio"] == pytest.approx(1.0, abs=1e-12)


def test_lemma2_two_blocks(capsys):
    code, rep = report_of(["lemma2", "--param", "K=2"], capsys)
    assert code == cli.EXIT_PASS
    bounds = [c for c in rep["checks"] if c["name"].startswith("rearrangement lower bound")]
    assert [c["t"] for c in bounds] == [2.0 ** -4, 2.0 ** -8]
    assert all(c["margin"] >= 0 for c in bounds)


def test_ruc_exact_triangle(capsys):
    argv = ["ruc", "--param", "spec=L1", "--param", "pairs=[[1,2],[1,3],[2,3]]", "--param", "mode=exact"]
    code, rep = report_of(argv, capsys)
    assert code == cli.EXIT_PASS
    est = rep["witnesses"]["estimate"]
    assert est["count"] == 8
    assert est["min_norm"] <= est["mean"] <= est["max_norm"]


def test_report_fields(capsys):
    _, rep = report_of(["basis-constant", "--param", "max_pairs=6", "--param", "trials=5"], capsys)
    for key in ("schema", "experiment", "version", "config", "pass", "checks", "witnesses", "wall_clock_ms"):
        assert key in rep
    assert rep["config"]["seed"] == 0
    for c in rep["checks"]:
        assert {"name", "paper_anchor", "lhs", "rhs", "margin", "pass"} <= set(c)
        assert c["paper_anchor"]


def test_check_failure_exit_code(capsys):
    code, rep = report_of(["suite", "--param", "criteria=[7]"], capsys)
    assert code == cli.EXIT_FAIL and not rep["pass"]


@pytest.mark.parametrize("argv", [
    ["prop2", "--param", "eps=0.7"],
    ["prop3", "--level", "4"],
    ["basis-constant", "--param", "bogus=1"],
    ["basis-constant", "--param", "spec=L0.5"],
    ["suite", "--param", "criteria=[99]"],
    [],
])
def test_usage_errors(argv, capsys):
    code, out = run(argv, capsys)
    assert code == cli.EXIT_USAGE
    rep = json.loads(out.out)
    assert rep["error"]["kind"] == "usage"
    assert "usage error" in out.err


def test_computation_error(monkeypatch, capsys):
    def boom(p, seed):
        raise FloatingPointError("solver diverged")

    fn, defaults, text = cli.EXPERIMENTS["norm"]
    monkeypatch.setitem(cli.EXPERIMENTS, "norm", (boom, defaults, text))
    code, out = run(["norm"], capsys)
    assert code == cli.EXIT_COMPUTE
    rep = json.loads(out.out)
    assert rep["error"]["type"] == "FloatingPointError"
    assert rep["checks"][0]["pass"] is False


def test_csv_output(capsys):
    code, out = run(["lemma2", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert list(rows[0]) == cli.CSV_FIELDS
    assert all(r["experiment"] == "lemma2" for r in rows)
    assert len(rows) == 6


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    out = tmp_path / "report.json"
    cfg.write_text(json.dumps({"experiment": "uncond", "parameters": {"spec": "L2", "max_index": 4},
                               "seed": 3, "output": str(out)}))
    code, _ = run(["--config", str(cfg), "--param", "spec=L1"], capsys)
    assert code == cli.EXIT_PASS
    rep = json.loads(out.read_text())
    assert rep["config"]["seed"] == 3
    assert rep["config"]["parameters"]["spec"] == "L1"
    assert rep["config"]["parameters"]["max_index"] == 4


def test_config_mismatch_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "uncond"}))
    code, _ = run(["ruc", "--config", str(cfg)], capsys)
    assert code == cli.EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ["gen", "--param", "count=3"],
    ["khintchine", "--param", "trials=20"],
    ["interp", "--param", "trials=10"],
    ["mixed", "--param", "trials=5", "--param", "min_level=4"],
    ["square-compare", "--param", "trials=10"],
    ["prop2"],
])
def test_deterministic_modulo_timing(argv, capsys):
    _, a = report_of(argv + ["--seed", "5"], capsys)
    _, b = report_of(argv + ["--seed", "5"], capsys)
    assert a["pass"]
    assert json.dumps(strip_timing(a), sort_keys=True) == json.dumps(strip_timing(b), sort_keys=True)


def test_mixed_below_required_level(capsys):
    code, _ = run(["mixed", "--param", "level=4"], capsys)
    assert code == cli.EXIT_USAGE


def test_malformed_payload_is_usage_error(capsys):
    for argv in (["norm", "--param", 'coeffs={"1,2": 1}'], ["norm", "--param", "step=[1, 2]"],
                 ["norm", "--param", "pairs=[[1]]"]):
        code, _ = run(argv, capsys)
        assert code == cli.EXIT_USAGE, argv


def test_level_cap(capsys):
    code, _ = run(["--level", "6", "lemma2", "--param", "K=2"], capsys)
    assert code == cli.EXIT_USAGE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chaoslab", "norm", "--param", "pairs=[[2,3]]"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "chaoslab", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "basis-constant" in proc.stdout
