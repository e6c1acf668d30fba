import csv
import json

import pytest

from synthcog.cli import main

TINY = {"simulation": {"total_users": 15, "total_days": 80}, "seed": 3,
        "experiment": {"hyper": {"epochs": 50}}}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "cfg.json").write_text(json.dumps(TINY))
    assert main(["simulate", "--config", str(d / "cfg.json"), "--out", str(d / "data")]) == 0
    assert main(["features", "--data", str(d / "data" / "sessions.jsonl"), "--out", str(d / "f.csv")]) == 0
    return d


def test_simulate_writes_dataset_and_manifest(workdir, capsys):
    names = {p.name for p in (workdir / "data").iterdir()}
    assert {"sessions.jsonl", "sessions.manifest.json", "catalog.jsonl"} <= names
    manifest = json.loads((workdir / "data" / "sessions.manifest.json").read_text())
    assert manifest["config"]["master_seed"] == 3


def test_flags_before_or_after_subcommand(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"simulation": {"total_users": 2, "total_days": 76}}))
    assert main(["--seed", "9", "simulate", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--seed", "9", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "sessions.jsonl").read_bytes()
    assert a == (tmp_path / "b" / "sessions.jsonl").read_bytes()
    m = json.loads((tmp_path / "a" / "sessions.manifest.json").read_text())
    assert m["config"]["master_seed"] == 9


def test_features_csv(workdir):
    with open(workdir / "f.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:5] == ["user_id", "profile", "end_day", "label", "n_sessions"]
    assert len(rows) > 100 and all(len(r) == len(rows[0]) for r in rows)


def test_train_and_evaluate(workdir, capsys):
    model = workdir / "model.json"
    assert main(["train", "--features", str(workdir / "f.csv"), "--out", str(model),
                 "--config", str(workdir / "cfg.json"), "--epochs", "100"]) == 0
    doc = json.loads(model.read_text())
    assert doc["hyper"]["epochs"] == 100 and doc["validation_users"]
    capsys.readouterr()
    assert main(["evaluate", "--model", str(model), "--features", str(workdir / "f.csv"),
                 "--out", str(workdir / "metrics.json")]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert 0.0 <= metrics["accuracy"] <= 1.0
    assert json.loads((workdir / "metrics.json").read_text()) == metrics


def test_config_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text(json.dumps({"simulation": {"total_userz": 3}}))
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text(json.dumps({"simulaton": {}}))
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--workers", "0", "--out", str(tmp_path)]) == 2
    assert main(["ablate", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2


def test_data_errors_exit_3(tmp_path, workdir):
    (tmp_path / "x.jsonl").write_text("{}\n")
    assert main(["features", "--data", str(tmp_path / "x.jsonl"), "--out", str(tmp_path / "f.csv")]) == 3
    (tmp_path / "f.csv").write_text("a,b\n1,2\n")
    assert main(["train", "--features", str(tmp_path / "f.csv"), "--out", str(tmp_path / "m.json")]) == 3
    assert main(["evaluate", "--model", str(tmp_path / "nope.json"),
                 "--features", str(workdir / "f.csv")]) == 3


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_report_from_json_re_renders(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"simulation": {"total_users": 24, "total_days": 80},
                               "experiment": {"hyper": {"epochs": 60}}}))
    assert main(["sweep", "--kind", "earlydetect", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 0
    erde = (tmp_path / "r" / "erde.csv").read_text()
    assert erde.startswith("model,o,erde\n")
    assert main(["report", "--from-json", str(tmp_path / "r" / "report.json"), "--out", str(tmp_path / "r2")]) == 0
    assert (tmp_path / "r2" / "erde.csv").read_text() == erde
