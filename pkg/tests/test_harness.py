import csv
import json

import numpy as np
import pytest

from synthcog.config import SimConfig
from synthcog.errors import ConfigError
from synthcog.features import FEATURE_NAMES, MODALITIES, NoiseSpec
from synthcog.harness import (ExperimentSpec, Workbench, emit_report, masked, report_from_json,
                              report_to_json, run_ablation, run_all, run_noise_sweep, subject_means)
from synthcog.model import Hyper

SPEC = ExperimentSpec(
    base=SimConfig(total_users=36, total_days=120, noise=NoiseSpec(0.1, 1.0, scope="day"), master_seed=4),
    hyper=Hyper(epochs=300),
)


@pytest.fixture(scope="module")
def bench():
    return Workbench()


@pytest.fixture(scope="module")
def report(bench):
    return run_all(SPEC, bench)


def test_masking_zeroes_other_modalities():
    X = np.ones((3, len(FEATURE_NAMES)))
    Z = masked(X, ("language",))
    lang = [FEATURE_NAMES.index(n) for n in MODALITIES["language"]]
    assert Z[:, lang].sum() == 3 * len(lang)
    assert Z.sum() == 3 * len(lang)


def test_ablation_rows(report):
    header, rows = report.tables["ablation"]
    assert header == ("setting", "accuracy", "f1_mci", "f1_earlyad")
    assert [r[0] for r in rows] == ["full", "coherence_only", "behavior_only", "no_noise"]


def test_split_is_disjoint(report):
    cell = report.cells["full"]
    assert not set(cell.train_users) & set(cell.validation_users)


def test_zero_sigma_matches_no_noise(bench, report):
    spec = ExperimentSpec(base=SPEC.base, hyper=SPEC.hyper, noise_grid=(SPEC.base.noise.scaled_to(0.0),
                                                                         SPEC.base.noise))
    sweep = run_noise_sweep(spec, bench)
    acc0 = float(sweep.tables["noise_sweep"][1][0][1])
    assert abs(acc0 - report.cells["no_noise"].metrics.accuracy) <= 0.01


def test_sweep_grid_scales_reference_noise():
    grid = SPEC.sweep_specs()
    assert [g.sigma for g in grid] == [0.05, 0.1, 0.2, 0.3]
    assert [g.delta for g in grid] == pytest.approx([0.5, 1.0, 2.0, 3.0])
    with pytest.raises(ConfigError):
        run_noise_sweep(ExperimentSpec(base=SPEC.base, noise_grid=(NoiseSpec(),)))


def test_attenuated_drop_ordering(report):
    rows = [r for r in report.tables["coherence_drop"][1] if r[0] == "attenuated"]
    drop = {r[1]: float(r[4]) for r in rows}
    assert drop["MCI"] > drop["EarlyAD"] > drop["Healthy"]


def test_erde_rows(report):
    e = {(m, o): v for m, o, v in report.erde_rows}
    for m in ("coherence_only", "behavior_only", "fusion"):
        assert e[(m, 200)] < e[(m, 100)]


def test_curve_final_value_is_full_horizon_recall(report):
    curve = report.curves["detection_curve_fusion"]
    fr = [f for _, f in curve]
    assert all(a <= b for a, b in zip(fr, fr[1:]))
    assert len(curve) == SPEC.base.total_days


def test_separability_uses_user_means(bench, report):
    ws = bench.windows(SPEC.world(), SPEC.base.noise, SPEC.window)
    healthy = subject_means(ws, "coherence_mean", 0)
    stat = next(s for s in report.separability
                if s.feature == "coherence_mean" and s.comparison == ("Healthy", "MCI"))
    n_a = next(r[2] for r in report.tables["separability"][1]
               if r[0] == "coherence_mean" and r[1] == "Healthy-MCI")
    assert n_a == len(healthy) <= SPEC.base.total_users
    assert np.isfinite(stat.cohens_d)


def test_cells_are_reproducible(report):
    again = run_ablation(SPEC, Workbench())
    for name in ("full", "no_noise"):
        assert again.cells[name].row() == report.cells[name].row()


def test_emit_report(tmp_path, report):
    paths = emit_report(report, tmp_path)
    names = {p.name for p in paths}
    assert {"ablation.csv", "noise_sweep.csv", "erde.csv", "summary.md",
            "detection_curve_fusion.csv", "separability.csv"} <= names
    with open(tmp_path / "noise_sweep.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["sigma", "accuracy", "f1_mci", "f1_earlyad"]
    assert rows[1:] == [list(r) for r in report.tables["noise_sweep"][1]]
    assert all(len(x.split(".")[1]) == 4 for r in rows[1:] for x in r)
    summary = (tmp_path / "summary.md").read_text()
    assert "Provenance" in summary and "ablation.csv" in summary


def test_report_json_round_trip(tmp_path, report):
    doc = json.loads(json.dumps(report_to_json(report)))
    back = report_from_json(doc)
    assert back.tables == {k: (tuple(v[0]), [tuple(r) for r in v[1]]) for k, v in report.tables.items()
                           if v is not None}
    assert back.erde_rows == [tuple(r) for r in report.erde_rows]
    assert back.curves == report.curves


def test_spec_from_dict():
    spec = ExperimentSpec.from_dict({"window": 5, "policy": {"persistence_m": 2, "target_label": "MCI"},
                                     "hyper": {"epochs": 10}, "modalities": ["behavior"]})
    assert spec.window == 5 and spec.policy.persistence_m == 2 and spec.hyper.epochs == 10
    with pytest.raises(ConfigError):
        ExperimentSpec.from_dict({"windw": 5})
    with pytest.raises(ConfigError):
        ExperimentSpec(modalities=())
    with pytest.raises(ConfigError):
        ExperimentSpec(false_early_cost=3.0)


def test_sensitivity_grid(bench):
    from dataclasses import replace

    from synthcog.harness import run_sensitivity

    rep = run_sensitivity(replace(SPEC, user_grid=(24, 36)), bench)
    header, rows = rep.tables["sensitivity"]
    assert header[:2] == ("users", "sentences") and len(rows) == 4
    assert [(r[0], r[1]) for r in rows] == [(24, "1-1"), (36, "1-1"), (24, "1-3"), (36, "1-3")]
    assert rep.ttd["sensitivity.f1_mci_spread"] >= rep.ttd["sensitivity.f1_mci_spread.1-3"] >= 0
    # one-sentence summaries are all-or-nothing off topic, so labels overlap more
    assert rep.ttd["sensitivity.separation_d.1-1"] < rep.ttd["sensitivity.separation_d.1-3"]
