import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from avdlab.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_simulate_csv(capsys):
    assert main(["simulate", str(CONFIGS / "case4_alpha4.yaml")]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["name", "passed", "value", "threshold"]
    assert all(r[1] == "true" for r in rows[1:])


def test_simulate_json_echoes_config(capsys, tmp_path):
    assert main(["simulate", str(CONFIGS / "case4_alpha4.yaml"), "--format", "json",
                 "--out", str(tmp_path), "--rel-tol", "1e-9"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["config"]["name"] == "case4_alpha4"
    assert d["config"]["integrator"]["rel_tol"] == 1e-9
    assert (tmp_path / "case4_alpha4" / "report.json").exists()
    assert (tmp_path / "case4_alpha4" / "trajectory.csv").exists()


def test_simulate_failing_run_exits_1(tmp_path, capsys):
    cfg = yaml.safe_load((CONFIGS / "case4_alpha4.yaml").read_text())
    cfg["integrator"]["max_steps"] = 5
    path = tmp_path / "fail.yaml"
    path.write_text(yaml.safe_dump(cfg))
    assert main(["simulate", str(path)]) == 1


@pytest.mark.parametrize("text", ["name: x\nvariant: nope\n", "name: [\n", "- a\n- b\n"])
def test_simulate_bad_config_exits_2(tmp_path, capsys, text):
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    assert main(["simulate", str(path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path):
    assert main(["simulate", str(tmp_path / "none.yaml")]) == 2


def test_unknown_preset_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["table", "nope"])
    assert info.value.code == 2


def test_table_and_compare_case4(capsys, tmp_path):
    assert main(["table", "paper_case4"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0][:3] == ["key", "t", "component"]
    assert main(["compare", "paper_case4", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "paper_case4" / "comparison.csv").exists()
    out = json.loads((tmp_path / "paper_case4" / "report.json").read_text())
    assert out["comparison"]["passed"] is True


def test_compare_without_reference_exits_2(capsys):
    assert main(["compare", "weak_conv2"]) == 2


def test_compare_reports_failed_cells(capsys):
    assert main(["compare", "paper_case1"]) == 1
    err = capsys.readouterr().err
    assert "(alpha=3, t=10)" in err


def test_rates_json(capsys):
    assert main(["rates", "paper_case3", "--format", "json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["rates"]["alpha=4"]["exponent"] == pytest.approx(-0.381966, abs=0.05)
    assert "alpha=4" in d["configs"]


def test_rates_without_fits_exits_1(capsys):
    assert main(["rates", "paper_case4"]) == 1


def test_verify_preset(capsys):
    assert main(["verify", "tikh_fast", "--format", "json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d[0]["preset"] == "tikh_fast" and d[0]["passed"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "avdlab", "verify", "paper_case4"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert proc.stdout.startswith("preset,check,passed,value,threshold")
