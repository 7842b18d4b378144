import json
import subprocess
import sys
from pathlib import Path

import pytest

from zerotemp.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, name="run.json", **fields):
    base = {"model": str(CONFIGS / "golden3_model.json"),
            "potential": str(CONFIGS / "golden3_potential.json"),
            "betas": [4, 16, 64]}
    base.update(fields)
    path = tmp_path / name
    path.write_text(json.dumps(base))
    return path


def run(cmd, config, out, *extra):
    return main([cmd, "--config", str(config), "--out", str(out), "--quiet", *extra])


def test_check_bernoulli(tmp_path):
    assert run("check", CONFIGS / "bernoulli2.json", tmp_path) == 0
    report = json.loads((tmp_path / "check.json").read_text())
    assert all(report["hypotheses"].values())
    assert report["unique_maximizing_measure"] and report["primitivity_K0"] == 0


def test_check_period_two_fails(tmp_path):
    assert run("check", CONFIGS / "period2.json", tmp_path) == 3
    report = json.loads((tmp_path / "check.json").read_text())
    assert not report["mixing"] and report["period"] == 2


def test_check_flat_warns(tmp_path):
    assert run("check", CONFIGS / "flat2.json", tmp_path) == 4
    assert not json.loads((tmp_path / "check.json").read_text())["unique_maximizing_measure"]


def test_check_countable_reports_tail(tmp_path):
    assert run("check", CONFIGS / "countable.json", tmp_path) == 0
    report = json.loads((tmp_path / "check.json").read_text())
    assert report["truncation_level"] == 15
    assert report["coercive_tail"]["tail_at_truncation"] <= 1e-6


def test_solve_writes_artifacts(tmp_path):
    assert run("solve", CONFIGS / "bernoulli2.json", tmp_path) == 0
    data = json.loads((tmp_path / "solve.json").read_text())
    assert data["maxplus"]["m_f"] == 0.0
    assert [e["beta"] for e in data["rpf"]] == [4, 8, 16, 32, 64, 128, 256, 512]
    assert all(e["residual"] <= 1e-12 for e in data["rpf"])


def test_deviation_inadmissible_cylinder(tmp_path):
    cfg = write_config(tmp_path, cylinders=["2", "22"])
    assert run("deviation", cfg, tmp_path / "out") == 0
    rows = json.loads((tmp_path / "out" / "deviation.json").read_text())["cylinders"]
    assert rows[0]["inf_I"] == 1.5
    assert rows[1]["inf_I"] == "+inf"


def test_missing_model_file(tmp_path, capsys):
    cfg = write_config(tmp_path, model="nowhere.json")
    assert run("check", cfg, tmp_path / "out") == 1
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 1 and "nowhere.json" in err["message"]
    assert json.loads((tmp_path / "out" / "error.json").read_text()) == err


def test_bad_grid_is_config_error(tmp_path):
    assert run("sweep", write_config(tmp_path, betas=[8, 4]), tmp_path / "out") == 1


def test_numerical_failure(tmp_path):
    assert run("solve", write_config(tmp_path, tol=1e-300), tmp_path / "out") == 2


def test_audit_failure(tmp_path):
    assert run("sweep", write_config(tmp_path, ratio_tol=1e-300), tmp_path / "out") == 3
    audit = json.loads((tmp_path / "out" / "audit.json").read_text())
    assert not audit["passed"]


def test_usage_error():
    assert main(["nonsense"]) == 1


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_sweep_deterministic(tmp_path, fmt):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert run("sweep", CONFIGS / "golden3.json", out, "--format", fmt) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {f"sweep.{fmt}", "audit.json"}


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "zerotemp.cli", "check", "--config",
                           str(CONFIGS / "golden3.json"), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PASS topologically_mixing" in proc.stdout
