import json
import os
import subprocess
import sys

import jsonschema
import pytest

from alphapatch.cli import SCHEMA_DIR, lemma_cells, main, resolve_threads, CommandError
from alphapatch.curve import circle, contour_to_csv


def schema():
    return json.loads((SCHEMA_DIR / "run_summary.schema.json").read_text())


def small_config(tmp_path, **extra):
    doc = {"n_nodes": 32, "t_end": 0.05, "snapshot_times": [0.05]}
    doc.update(extra)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_simulate_circle_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--preset", "steady-circle", "--config", small_config(tmp_path),
                 "--out", str(out)]) == 0
    summary = json.loads((out / "run_summary.json").read_text())
    jsonschema.validate(summary, schema())
    assert summary["stop_reason"] == "t_end"
    for name in summary["artifacts"]:
        assert (out / name).is_file()
    snap = json.loads((out / "snapshots" / "snapshot_0000.json").read_text())
    assert snap["time"] == 0.05
    assert snap["contours"][0]["schema"] == "alphapatch.contour/1"


def test_simulate_from_contour_file(tmp_path):
    src = tmp_path / "c.csv"
    src.write_text(contour_to_csv(circle(32, 0.5)))
    out = tmp_path / "run"
    cfg = small_config(tmp_path, initial={"kind": "files"})
    assert main(["simulate", "--config", cfg, "--out", str(out), str(src)]) == 0
    summary = json.loads((out / "run_summary.json").read_text())
    assert summary["stop_reason"] == "t_end"


def test_colliding_preset_stops_on_distance(tmp_path):
    out = tmp_path / "run"
    cfg = tmp_path / "c.json"
    cfg.write_text('{"n_nodes": 64}')
    assert main(["simulate", "--preset", "two-patch-approach", "--config", str(cfg),
                 "--out", str(out)]) == 0
    summary = json.loads((out / "run_summary.json").read_text())
    jsonschema.validate(summary, schema())
    assert summary["stop_reason"] == "min_distance"


def test_missing_input_leaves_nothing(tmp_path):
    out = tmp_path / "run"
    code = main(["simulate", "--config", small_config(tmp_path), "--out", str(out),
                 str(tmp_path / "absent.csv")])
    assert code != 0
    assert not out.exists()
    assert [p.name for p in tmp_path.iterdir()] == ["cfg.json"]


def test_missing_config_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]) != 0


def test_invalid_config_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"alpha": 2.5}')
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "alpha" in capsys.readouterr().err


def test_verify_lemmas_reports_thresholds(tmp_path):
    out = tmp_path / "lem"
    assert main(["verify-lemmas", "--out", str(out), "--x-samples", "2", "--beta-grid", "0.1"]) == 0
    rep = json.loads((out / "lemma_report.json").read_text())
    th = {t["axis"]: t["beta_star"] for t in rep["thresholds"]}
    assert abs(th[1] - 0.168) < 0.005 and abs(th[2] - 0.167) < 0.005
    assert rep["n_errors"] == 0 and rep["min_slack"] >= -1e-3


def test_verify_lemmas_empty_grid(tmp_path):
    out = tmp_path / "lem"
    assert main(["verify-lemmas", "--out", str(out), "--beta-grid", ""]) == 0
    rep = json.loads((out / "lemma_report.json").read_text())
    assert rep["cells"] == []


def test_lemma_cell_errors_are_inline():
    cells = lemma_cells([5.0], [0.1], 2, 1, seed=0)  # quad order 1 is rejected per cell
    assert len(cells) == 4
    assert all(c["error"] and c["slack"] is None for c in cells)


def test_scenario_reports_signs_and_barrier(tmp_path):
    out = tmp_path / "sc"
    cfg = tmp_path / "s.json"
    cfg.write_text('{"t_end": 0.006, "snapshot_times": [], "scenario_samples": 4}')
    assert main(["scenario", "--preset", "krzy-scenario", "--config", str(cfg),
                 "--epsilon", "0.05", "--beta", "0.15", "--out", str(out)]) == 0
    summary = json.loads((out / "run_summary.json").read_text())
    jsonschema.validate(summary, schema())
    assert summary["sign_check"]["u1_negative"]
    rows = (out / "containment.csv").read_text().splitlines()
    t0, x0, contained, _ = rows[1].split(",")
    assert float(t0) == 0.0 and abs(float(x0) - 0.15) < 1e-12 and contained == "1"


@pytest.mark.filterwarnings("ignore:.*(u2 coefficient|outside).*:UserWarning")
def test_scenario_above_threshold_warns(tmp_path):
    out = tmp_path / "sc"
    cfg = tmp_path / "s.json"
    cfg.write_text('{"t_end": 0.0, "snapshot_times": [], "scenario_samples": 3}')
    with pytest.warns(UserWarning, match="u1 coefficient"):
        code = main(["scenario", "--preset", "krzy-scenario", "--config", str(cfg),
                     "--beta", "0.2", "--out", str(out)])
    assert code == 0
    sign = json.loads((out / "sign_check.json").read_text())
    assert any("u1 coefficient" in w for w in sign["warnings"])


def test_thread_resolution(monkeypatch):
    monkeypatch.delenv("ALPHAPATCH_THREADS", raising=False)
    assert resolve_threads(None) == 1
    monkeypatch.setenv("ALPHAPATCH_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    monkeypatch.setenv("ALPHAPATCH_THREADS", "x")
    with pytest.raises(CommandError):
        resolve_threads(None)


def test_module_entry_point(tmp_path):
    env = dict(os.environ, ALPHAPATCH_THREADS="1")
    res = subprocess.run([sys.executable, "-m", "alphapatch", "verify-lemmas", "--beta-grid", "",
                          "--out", str(tmp_path / "o")], capture_output=True, text=True, env=env)
    assert res.returncode == 0, res.stderr
    assert "beta*=" in res.stdout
