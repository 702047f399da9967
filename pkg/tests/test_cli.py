import csv
import json
import subprocess
import sys

import pytest

from schro.cli import main
from schro.verify import poschl_teller


def run(*argv):
    return main([str(a) for a in argv])


def test_ground_state_outputs(tmp_path):
    out = tmp_path / "omega.csv"
    assert run("ground-state", "--dim", 1, "--nodes", 601, "--out", out) == 0
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["dim"] == 1 and abs(side["center_value"] - 2**0.5) < 1e-3
    rows = list(csv.reader(out.open()))
    assert len(rows) == 602
    log = [json.loads(line) for line in (tmp_path / "runs.log").read_text().splitlines()]
    assert log[-1]["status"] == "ok" and len(log[-1]["digest"]) == 64
    assert log[-1]["tolerances"]["newton"] == 1e-10


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run("spectrum", "--dim", 1, "--nodes", 601, "--kappa", -0.5, "--count", 3,
                   "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = json.loads(a.read_text())
    assert [r["j"] for r in rows] == [1, 2, 3]
    for r in rows:
        assert abs(r["lambda"] - poschl_teller(r["j"], -0.5)) < 1e-2 * r["lambda"]


def test_bifurcations(tmp_path):
    out = tmp_path / "bif.json"
    assert run("bifurcations", "--dim", 1, "--nodes", 1501, "--beta", 0.0, "--jmax", 2,
               "--out", out) == 0
    rows = json.loads(out.read_text())
    assert abs(rows[0]["kappa"] + 0.6) < 1e-4
    assert rows[0]["in_unit_interval"] and not rows[1]["in_unit_interval"]


def test_region_map_rows(tmp_path):
    out = tmp_path / "region.csv"
    assert run("region-map", "--grid", "50x50", "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2500
    verdicts = {(float(r["kappa"]), float(r["beta"])): r["verdict"] for r in rows}
    assert verdicts[(-2.0, 0.0)] == "NoPositiveSolution"
    assert verdicts[(-1.0, 0.5)] == "NoPositiveSolution"
    assert verdicts[(-0.5, 1.0)] == "PositiveGroundState"
    assert verdicts[(0.5, 0.5)] == "ExistsSymmetric"


def test_ground_command(tmp_path):
    out = tmp_path / "gs.json"
    assert run("ground", "--dim", 1, "--nodes", 601, "--kappa", -0.5, "--beta", 1.0,
               "--out", out) == 0
    res = json.loads(out.read_text())
    assert res["converged"] and res["positive"] and res["energy"] > 0
    assert (tmp_path / "gs_u.csv").exists() and (tmp_path / "gs_v.csv").exists()


def test_branch_command(tmp_path):
    out = tmp_path / "branch.csv"
    assert run("branch", "--dim", 1, "--beta", -0.5, "--max-points", 12, "--cutoff",
               "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) >= 2
    assert list(rows[0]) == ["arclength", "kappa", "l2_u", "l2_v", "asymmetry", "energy",
                             "positive", "residual"]
    assert all(float(r["residual"]) < 1e-8 for r in rows)


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("dim = 1\nnodes = 601\nkappa = 0.5\ncount = 2\ntol_newton = 1e-9\n")
    out = tmp_path / "s.json"
    assert run("spectrum", "--config", cfg, "--kappa", -0.5, "--out", out) == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 2 and rows[0]["kappa"] == -0.5
    entry = json.loads((tmp_path / "runs.log").read_text().splitlines()[-1])
    assert entry["tolerances"]["newton"] == 1e-9 and entry["nodes"] == 601


@pytest.mark.parametrize("argv", [
    ["spectrum", "--kappa", "0.0"],                   # missing --dim
    ["spectrum", "--dim", "4", "--kappa", "0.0"],
    ["spectrum", "--dim", "1", "--kappa", "-2"],
    ["bifurcations", "--dim", "1", "--beta", "-1"],
    ["region-map", "--grid", "5by5"],
    ["spectrum", "--dim", "1", "--kappa", "0", "--tol", "newton"],
    ["spectrum", "--dim", "1", "--kappa", "0", "--tol", "newton=-1"],
    ["ground", "--dim", "1", "--kappa", "0", "--beta", "0", "--mu1", "2"],
])
def test_usage_errors(tmp_path, argv, capsys):
    assert main(argv + ["--out", str(tmp_path / "x.out")]) == 2
    assert "usage: schro" in capsys.readouterr().err


def test_unknown_flag_and_missing_config(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--bogus", "1"])
    assert exc.value.code == 2
    assert main(["spectrum", "--config", str(tmp_path / "missing.ini")]) == 2
    bad = tmp_path / "bad.ini"
    bad.write_text("[schro]\nnot_a_key = 3\n")
    assert main(["spectrum", "--config", str(bad)]) == 2


def test_io_failure_exits_one(tmp_path, capsys):
    out = tmp_path / "no" / "such" / "dir" / "s.json"
    assert run("spectrum", "--dim", 1, "--nodes", 601, "--kappa", 0.0, "--out", out) == 1
    assert str(out.parent) in capsys.readouterr().err


def test_verify_fast_subset(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert run("verify", "--fast", "--dim", 1) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if "criterion" in l]
    assert len(lines) == 6 and all(l.startswith("PASS") for l in lines)


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "schro.cli", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "region-map" in proc.stdout
