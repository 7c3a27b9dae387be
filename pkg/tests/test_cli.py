import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from susytj import cli, pipeline
from susytj.kernels import random_params
from susytj.pipeline import load_config
from susytj.roots import solutions_from_json, solutions_to_json

GOLDEN = Path(__file__).parent / "golden" / "table1_roots.csv"


def _strip(path, drop=("residual", "t_residual", "H_residual")):
    rows = list(csv.reader(path.open()))
    keep = [i for i, k in enumerate(rows[0]) if k not in drop]
    return [[r[i] for i in keep] for r in rows]


@pytest.fixture(scope="module")
def table1_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("t1")
    code = cli.main(["--config", "table1", "--mode", "full", "--out", str(out)])
    return code, out


def test_table1_full_passes(table1_run, capsys):
    code, out = table1_run
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] and summary["match"]["matched"] == 9
    assert set(summary["artifacts"]) == {"relations.json", "spectrum_direct.csv", "spectrum_transfer.csv",
                                         "roots.csv", "roots.json", "summary.json"}


def test_table1_golden(table1_run):
    _, out = table1_run
    assert _strip(out / "roots.csv") == _strip(GOLDEN)


def test_roots_csv_header(table1_run):
    _, out = table1_run
    header = (out / "roots.csv").read_text().splitlines()[0]
    assert header == "n,u_1,u_2,nu_1,nu_2,E_n,residual,t_residual,H_residual"


def test_spectrum_csv(table1_run):
    _, out = table1_run
    rows = list(csv.DictReader((out / "spectrum_direct.csv").open()))
    assert len(rows) == 9 and all(float(r["residual"]) < 1e-10 for r in rows)


def test_roots_json_roundtrip_is_byte_identical(table1_run):
    _, out = table1_run
    payload = json.loads((out / "roots.json").read_text())
    sols = solutions_from_json(json.dumps(payload["solutions"]))
    assert pipeline.dump_json(pipeline.solutions_payload(sols, load_config("table1")[0], payload["seed"])) \
        == (out / "roots.json").read_text()
    assert solutions_to_json(solutions_from_json(solutions_to_json(sols))) == solutions_to_json(sols)


@pytest.mark.slow
def test_table2_roots(tmp_path):
    code = cli.main(["--config", "table2", "--mode", "roots", "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["match"]["matched"] == 27
    assert summary["match"]["max_energy_error"] <= 1e-8


def test_shipped_configs_load():
    p1, m1 = load_config("table1")
    p2, m2 = load_config("table2")
    assert (p1.L, m1) == (2, (0, 1, 2))
    assert (p2.L, m2) == (3, (0, 1, 2, 3))


def test_verify_mode_random_params(tmp_path):
    p = random_params(np.random.default_rng(7))
    cfg = tmp_path / "rand.json"
    cfg.write_text(json.dumps(p.to_dict()))
    assert cli.main(["--config", str(cfg), "--mode", "verify", "--out", str(tmp_path / "o")]) == 0
    rel = json.loads((tmp_path / "o" / "relations.json").read_text())
    assert len(rel) == 7 and all(r["pass"] for r in rel)


def test_missing_config_exit_code(tmp_path):
    assert cli.main(["--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


def test_invalid_params_exit_code(tmp_path):
    cfg = tmp_path / "bad.json"
    data = load_config("table1")[0].to_dict()
    data["eta"] = 0.0
    cfg.write_text(json.dumps(data))
    assert cli.main(["--config", str(cfg), "--mode", "verify", "--out", str(tmp_path)]) == 2


def test_failed_gate_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(pipeline, "commutativity", lambda *a, **k: 1.0)
    assert cli.main(["--config", "table1", "--mode", "verify", "--out", str(tmp_path)]) == 1


def test_bad_mode_rejected():
    with pytest.raises(SystemExit):
        cli.main(["--config", "table1", "--mode", "bogus"])


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "susytj.cli", "--config", "table1", "--mode", "ed",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("PASS")
