import json
import subprocess
import sys

import pytest

from dyadlab import cli
from dyadlab.experiments import EXPERIMENTS, Experiment, ExperimentReport


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list(capsys):
    code, out, _ = run(["list"], capsys)
    assert code == 0
    assert [line.split()[0] for line in out.splitlines()] == list(EXPERIMENTS)


def test_unknown_experiment_prints_usage(capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == 1 and "usage:" in err


def test_config_errors_exit_one(capsys, tmp_path):
    assert run(["theorem11", "--depth", "13"], capsys)[0] == 1
    assert run(["theorem11", "--trials", "0"], capsys)[0] == 1
    assert run(["theorem11", "--p", "1"], capsys)[0] == 1
    assert run(["theorem11", "--weight", "[1, 2]"], capsys)[0] == 1
    assert run(["theorem11", "--config", str(tmp_path / "missing.json")], capsys)[0] == 1
    assert run(["theorem11", "--out", str(tmp_path / "no" / "dir.json"), "--trials", "1", "--depth", "2"], capsys)[0] == 1


def test_pott_smith_defaults_write_report(capsys, tmp_path):
    out = tmp_path / "ps.json"
    code, _, _ = run(["pott-smith", "--out", str(out)], capsys)
    assert code == 0
    data = json.loads(out.read_text())
    assert data["summary"]["max_residual"] <= 1e-10
    assert data["config"]["depth"] == 8 and len(data["records"]) == 100


def test_flags_override_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "prop14", "depth": 5, "trials": 9, "seed": 4}))
    code, out, _ = run(["prop14", "--config", str(cfg), "--trials", "3"], capsys)
    data = json.loads(out)
    assert code == 0 and data["config"]["trials"] == 3 and data["config"]["depth"] == 5


def test_csv_output(capsys):
    code, out, _ = run(["bmo-identity", "--depth", "4", "--trials", "3", "--format", "csv"], capsys)
    rows = [line for line in out.splitlines() if not line.startswith("#")]
    assert code == 0 and rows[0] == "depth,trial,max_residual,bmo_l2,cm,bmo_l1" and len(rows) == 4


def test_byte_identical_reports(capsys, tmp_path):
    args = ["upper-bound", "--depth", "5", "--trials", "5", "--weight", '{"kind":"cascade","rho":0.4}']
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(args + ["--out", str(a)], capsys)
    run(args + ["--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_violations_exit_two_and_keep_records(capsys, tmp_path, monkeypatch):
    def broken(cfg):
        rep = ExperimentReport("pott-smith", cfg.echo(), cfg.seed, ["trial"], records=[{"trial": 0}])
        rep.violations.append("constructed collection failed verification")
        return rep

    monkeypatch.setitem(EXPERIMENTS, "pott-smith", Experiment("pott-smith", "patched", broken))
    out = tmp_path / "v.json"
    code, _, err = run(["pott-smith", "--out", str(out)], capsys)
    assert code == 2 and "violation" in err
    data = json.loads(out.read_text())
    assert data["records"] == [{"trial": 0}] and data["violations"]


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dyadlab.cli", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "theorem11" in proc.stdout
