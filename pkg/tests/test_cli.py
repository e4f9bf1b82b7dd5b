import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from mhdjump.cli import main, snapshot_summary
from mhdjump.norms import read_diagnostics_csv
from mhdjump.snapshot import write_state
from mhdjump.spectral import MhdState, make_grid

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def workdir(tmp_path):
    for name in ("minimal_2d.toml", "noise_2d.toml", "stepping_3d.toml"):
        shutil.copy(CONFIGS / name, tmp_path / name)
    return tmp_path


def _simulate(workdir, out, *extra, config="minimal_2d.toml"):
    return main(["simulate", "--config", str(workdir / config), "--output-dir", str(out), *extra])


def test_simulate_writes_outputs(workdir):
    out = workdir / "run"
    assert _simulate(workdir, out, "--snapshot-stride", "10") == 0
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "ok" and report["final_time"] == pytest.approx(1.0)
    assert report["reports"] and all(r["converged"] for r in report["reports"])
    data = read_diagnostics_csv(out / "diagnostics.csv")
    assert data["time"][-1] == pytest.approx(1.0) and data["jump_flag"].sum() == report["jumps"]
    snaps = sorted((out / "snapshots").glob("*.mhdf"))
    assert len(snaps) == len(report["snapshots"]) >= 2


def test_simulate_is_byte_identical_for_fixed_seed(workdir):
    assert _simulate(workdir, workdir / "a", "--seed", "5") == 0
    assert _simulate(workdir, workdir / "b", "--seed", "5") == 0
    assert (workdir / "a/diagnostics.csv").read_bytes() == (workdir / "b/diagnostics.csv").read_bytes()
    for s in (workdir / "a/snapshots").iterdir():
        assert s.read_bytes() == (workdir / "b/snapshots" / s.name).read_bytes()
    assert _simulate(workdir, workdir / "c", "--seed", "6") == 0
    assert (workdir / "a/diagnostics.csv").read_bytes() != (workdir / "c/diagnostics.csv").read_bytes()


def test_inspect_matches_diagnostics_row(workdir, capsys):
    out = workdir / "run"
    assert _simulate(workdir, out, "--snapshot-stride", "5") == 0
    data = read_diagnostics_csv(out / "diagnostics.csv")
    report = json.loads((out / "report.json").read_text())
    for entry in report["snapshots"]:
        info = snapshot_summary(out / entry["file"])
        i = entry["index"]
        assert info["l4_v"] == pytest.approx(data["lp_norm_v"][i], rel=1e-12)
        assert info["l4_H"] == pytest.approx(data["lp_norm_H"][i], rel=1e-12)
        assert 0.5 * info["l2"] ** 2 == pytest.approx(data["energy"][i], rel=1e-12)
        assert info["max_divergence"] < 1e-12
    capsys.readouterr()
    assert main(["inspect", str(out / report["snapshots"][0]["file"]), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["dim"] == 2


def test_inspect_errors_and_zero_field(tmp_path, capsys):
    path = tmp_path / "z.mhdf"
    write_state(path, MhdState.zeros(make_grid(3, 8)))
    info = snapshot_summary(path)
    assert info["l2"] == info["l4"] == info["max_divergence"] == 0.0
    assert main(["inspect", str(path), "--dump-slice", str(tmp_path / "slice.txt"), "--component", "4"]) == 0
    assert np.loadtxt(tmp_path / "slice.txt").shape == (8, 8)
    path.write_bytes(path.read_bytes()[:100])
    assert main(["inspect", str(path)]) == 1
    assert "corrupt" in capsys.readouterr().err
    assert main(["inspect", str(tmp_path / "missing.mhdf")]) == 1


def test_missing_noise_file_is_a_parse_error(workdir, capsys):
    (workdir / "noise_2d.toml").unlink()
    assert _simulate(workdir, workdir / "run") == 2
    assert "noise_2d.toml" in capsys.readouterr().err


def test_stepping_3d_and_ensemble(workdir, monkeypatch):
    assert _simulate(workdir, workdir / "s3", config="stepping_3d.toml") == 0
    monkeypatch.setenv("MHDJUMP_THREADS", "2")
    assert _simulate(workdir, workdir / "ens", "--ensemble", "2") == 0
    a, b = (json.loads((workdir / f"ens/member_00{i}/report.json").read_text()) for i in (0, 1))
    assert a["seed"] != b["seed"]


def test_solver_failure_reports_and_exits_nonzero(workdir):
    cfg = workdir / "minimal_2d.toml"
    cfg.write_text(cfg.read_text().replace('ball_constant_K1 = "auto"', "ball_constant_K1 = 1000.0"))
    out = workdir / "fail"
    assert _simulate(workdir, out) == 1
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "failed" and "underflow" in report["error"]


def test_unknown_level_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["verify", "--level", "medium"])
    assert info.value.code == 2


def test_module_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "mhdjump", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "simulate" in res.stdout


def test_verify_fast_prints_summary(tmp_path, capsys):
    status = main(["verify", "--level", "fast", "--output-dir", str(tmp_path)])
    text = capsys.readouterr().out
    rows = [line for line in text.splitlines() if line.startswith("[")]
    assert len(rows) >= 15
    assert status == (0 if all(r.startswith("[PASS]") for r in rows) else 1)
    assert (tmp_path / "verification.csv").read_text().count("\n") == len(rows) + 1
