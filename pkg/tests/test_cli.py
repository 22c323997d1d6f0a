import json

import pytest

from sparse_cab.cli import main

CONFIG = {
    "name": "k1-exp3",
    "cab": {"d": 4, "k": 1, "engine": "exp3"},
    "environment": {"model": "adversarial", "d": 4, "k": 1, "peaks": [[0.4]], "tuple": [2]},
}


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(CONFIG))
    return path


def test_family_build_and_verify(tmp_path, capsys):
    fam = tmp_path / "fam.json"
    assert main(["family", "build", "--d", "8", "--k", "2", "--seed", "1", "--out", str(fam)]) == 0
    doc = json.loads(fam.read_text())
    assert doc["d"] == 8 and len(doc["partitions"]) == 62  # ceil(4 e^2 ln 8)
    assert main(["family", "verify", "--in", str(fam)]) == 0
    assert json.loads(capsys.readouterr().out)["satisfied"] is True
    assert main(["family", "verify", "--in", str(fam), "--sample", "100"]) == 0


def test_family_verify_unsatisfied_and_over_budget(tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"d": 3, "k": 2, "seed": None, "partitions": [[[0, 1], [2]]]}))
    assert main(["family", "verify", "--in", str(fam)]) == 4
    main(["family", "build", "--d", "300", "--k", "3", "--m", "1", "--out", str(fam)])
    assert main(["family", "verify", "--in", str(fam)]) == 3


def test_run_is_byte_identical(tmp_path, config_file):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["run", "--config", str(config_file), "--seed", "3", "--rounds", "500", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[-1].startswith("500,256,")


def test_sweep_then_slope(tmp_path, config_file, capsys):
    out = tmp_path / "summary.json"
    args = ["sweep", "--config", str(config_file), "--seeds", "0..2", "--checkpoints", "64", "128", "256", "512"]
    assert main(args + ["--out", str(out), "--csv", str(tmp_path / "cells.csv")]) == 0
    summary = json.loads(out.read_text())
    assert summary["seeds"] == [0, 1, 2] and summary["slope"] is not None
    assert main(["slope", "--in", str(out)]) == 0
    assert main(["slope", "--in", str(out), "--assert", "0", "5"]) == 0
    assert main(["slope", "--in", str(out), "--assert", "5", "6"]) == 4
    assert "FAIL" in capsys.readouterr().out


def test_invalid_and_infeasible_configs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**CONFIG, "cab": {"d": 4, "k": 9}}))
    assert main(["run", "--config", str(bad), "--rounds", "10"]) == 2
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad), "--rounds", "10"]) == 2
    big = tmp_path / "big.json"
    big.write_text(json.dumps({**CONFIG, "cab": {"d": 4, "k": 1, "arm_cap": 2}}))
    assert main(["run", "--config", str(big), "--rounds", "5000"]) == 3


def test_lower_bound_command(tmp_path):
    out = tmp_path / "lb.json"
    assert main(["lower-bound", "--d", "4", "--rounds", "300", "--seeds", "0..1", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["oracle"]["mean_per_round_regret"] == 0.0
