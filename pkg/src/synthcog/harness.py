"""Experiment orchestration: ablation, noise sweep, sensitivity grid, early
detection, separability statistics and report emission.

Every experiment simulates clean sessions once per world configuration, then
applies each cell's noise to the cached table with a seed derived from the
master seed only. Cells that differ only in modality or noise therefore share
their random draws, and the reference cell is bit-identical wherever it appears.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import SimConfig
from .dataset import simulate
from .domain import CognitiveLabel, derive_seed
from .earlydetect import (DetectionOutcome, DetectionPolicy, detection_curve,
                          early_precision_recall, false_early_lead, first_detection_day, mean_erde,
                          time_to_detection, write_curve_csv, write_erde_csv)
from .errors import ConfigError, TrainingError
from .features import FEATURE_NAMES, NoiseSpec, modality_mask
from .model import Classifier, Hyper, Metrics, evaluate, predict_proba, train
from .progression import onset_day
from .stats import SeparabilityStat, cohens_d, separability
from .windows import (DEFAULT_WINDOW, SessionTable, WindowSet, apply_noise, labels_by_day,
                      split_users, window_features)

log = logging.getLogger(__name__)
L = CognitiveLabel

FULL = ("language", "behavior")
COHERENCE_ONLY = ("coherence",)
BEHAVIOR_ONLY = ("behavior",)
DEFAULT_SIGMAS = (0.05, 0.1, 0.2, 0.3)

# Published reference values; reported beside achieved values, never asserted.
REFERENCE_TARGETS = {
    "ablation.full.accuracy": 0.850, "ablation.full.f1_mci": 0.582, "ablation.full.f1_earlyad": 0.916,
    "ablation.coherence_only.accuracy": 0.784, "ablation.coherence_only.f1_mci": 0.138,
    "ablation.coherence_only.f1_earlyad": 0.903,
    "ablation.behavior_only.accuracy": 0.730, "ablation.behavior_only.f1_mci": 0.122,
    "ablation.behavior_only.f1_earlyad": 0.802,
    "ablation.no_noise.accuracy": 0.947, "ablation.no_noise.f1_mci": 0.868,
    "ablation.no_noise.f1_earlyad": 0.956,
    "sweep.accuracy@0.1": 0.85, "sweep.accuracy@0.3": 0.72,
    "separability.coherence_mean.Healthy-MCI.d": 0.26, "separability.coherence_mean.Healthy-MCI.p": 0.068,
    "separability.coherence_mean.MCI-EarlyAD.d": 6.33, "separability.coherence_mean.MCI-EarlyAD.p": 1e-150,
    "separability.behavioral_entropy.Healthy-MCI.d": 2.81,
    "separability.behavioral_entropy.Healthy-MCI.p": 1e-45,
    "separability.behavioral_entropy.MCI-EarlyAD.d": 1.30,
    "separability.behavioral_entropy.MCI-EarlyAD.p": 1e-23,
    "separability.drift_slope.Healthy-MCI.d": 0.09, "separability.drift_slope.Healthy-MCI.p": 0.54,
    "separability.drift_slope.MCI-EarlyAD.d": 0.03, "separability.drift_slope.MCI-EarlyAD.p": 0.82,
    "earlydetect.fusion.erde@100": 0.28, "earlydetect.fusion.erde@200": 0.22,
    "earlydetect.coherence_only.erde@100": 0.42, "earlydetect.coherence_only.erde@200": 0.37,
    "earlydetect.behavior_only.erde@100": 0.39, "earlydetect.behavior_only.erde@200": 0.33,
    "earlydetect.fusion.erde@100.prose": 0.022, "earlydetect.fusion.erde@200.prose": 0.011,
    "earlydetect.ttd_mean_days": 2.3, "earlydetect.recall@50": 1.0, "earlydetect.precision@50": 0.43,
    "sensitivity.f1_earlyad.mean": 0.91, "sensitivity.f1_mci.min": 0.41, "sensitivity.f1_mci.max": 0.62,
}


@dataclass(frozen=True)
class ExperimentSpec:
    name: str = "default"
    base: SimConfig = field(default_factory=SimConfig)
    modalities: tuple = FULL
    noise_grid: tuple = ()                  # NoiseSpecs; empty means base noise at DEFAULT_SIGMAS
    user_grid: tuple = (100, 200, 300)
    summary_grid: tuple = ((1, 1), (1, 3))
    confounds: bool = True
    window: int = DEFAULT_WINDOW
    policy: DetectionPolicy = field(default_factory=DetectionPolicy)
    validation_fraction: float = 0.2
    hyper: Hyper = field(default_factory=Hyper)
    erde_windows: tuple = (100, 200)
    early_k: int = 50
    false_early_cost: float | None = 1.0    # None scores pre-onset flags by their day

    def __post_init__(self):
        if not self.modalities:
            raise ConfigError("at least one modality is required")
        modality_mask(self.modalities)
        if not self.user_grid or not self.summary_grid:
            raise ConfigError("grids must be non-empty")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.false_early_cost is not None and not 0.0 <= self.false_early_cost <= 1.0:
            raise ConfigError("false_early_cost must lie in [0, 1]")

    def world(self) -> SimConfig:
        """Clean simulation config of the reference world."""
        cfg = self.base.with_(noise=NoiseSpec.clean())
        if not self.confounds:
            cfg = cfg.with_(confound_rates={k: 0.0 for k in cfg.confound_rates})
        return cfg

    def sweep_specs(self) -> tuple:
        if self.noise_grid:
            return tuple(self.noise_grid)
        return tuple(self.base.noise.scaled_to(s) for s in DEFAULT_SIGMAS)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        kw = dict(d)
        unknown = set(kw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
        if "base" in kw:
            kw["base"] = SimConfig.from_dict(kw["base"])
        if "noise_grid" in kw:
            kw["noise_grid"] = tuple(NoiseSpec.from_dict(n) for n in kw["noise_grid"])
        if "policy" in kw:
            p = dict(kw["policy"])
            if "target_label" in p:
                p["target_label"] = L.parse(p["target_label"])
            kw["policy"] = DetectionPolicy(**p)
        if "hyper" in kw:
            kw["hyper"] = Hyper(**kw["hyper"])
        for key in ("modalities", "user_grid", "erde_windows"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if "summary_grid" in kw:
            kw["summary_grid"] = tuple(tuple(r) for r in kw["summary_grid"])
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class CellResult:
    name: str
    metrics: Metrics
    config_hash: str
    noise: NoiseSpec
    modalities: tuple
    train_users: tuple = ()
    validation_users: tuple = ()

    def row(self) -> tuple:
        m = self.metrics
        return m.accuracy, m.f1_of(L.MCI), m.f1_of(L.EarlyAD)


@dataclass
class EvaluationReport:
    name: str
    cells: dict = field(default_factory=dict)          # name -> CellResult
    tables: dict = field(default_factory=dict)         # file stem -> (header, rows)
    separability: list = field(default_factory=list)
    erde_rows: list = field(default_factory=list)
    ttd: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    targets: list = field(default_factory=list)        # (key, target, achieved or None)
    notes: list = field(default_factory=list)

    def merge(self, other: "EvaluationReport") -> "EvaluationReport":
        self.cells.update(other.cells)
        self.tables.update(other.tables)
        self.separability.extend(other.separability)
        self.erde_rows.extend(other.erde_rows)
        self.ttd.update(other.ttd)
        self.curves.update(other.curves)
        self.provenance.update(other.provenance)
        self.targets.extend(other.targets)
        self.notes.extend(other.notes)
        return self


def noise_hash(config: SimConfig, noise: NoiseSpec) -> str:
    return config.with_(noise=noise).config_hash()


class Workbench:
    """Caches clean session tables per world config so cells reuse them."""

    def __init__(self, workers: int = 1):
        self.workers = workers
        self._tables: dict = {}
        self._windows: dict = {}
        self._cells: dict = {}

    def world(self, config: SimConfig):
        key = config.with_(noise=NoiseSpec.clean()).config_hash()
        if key not in self._tables:
            clean = config.with_(noise=NoiseSpec.clean())
            log.info("simulating world %s (%d users)", key[:12], clean.total_users)
            ds = simulate(clean, workers=self.workers)
            durations = {v.video_id: v.duration_s for v in ds.catalog}
            table = SessionTable.from_records(ds.records, durations, ds.users, clean.total_days)
            self._tables[key] = (table, ds.users, labels_by_day(ds.users, clean.total_days))
        return self._tables[key]

    def windows(self, config: SimConfig, noise: NoiseSpec, window: int) -> WindowSet:
        key = (noise_hash(config, noise), window)
        if key not in self._windows:
            table, _, labels = self.world(config)
            noisy = apply_noise(table, noise, derive_seed(config.master_seed, "cell-noise"))
            self._windows[key] = window_features(noisy, labels, window)
        return self._windows[key]

    def noisy_table(self, config: SimConfig, noise: NoiseSpec) -> SessionTable:
        table, _, _ = self.world(config)
        return apply_noise(table, noise, derive_seed(config.master_seed, "cell-noise"))


def masked(X: np.ndarray, modalities: Sequence[str]) -> np.ndarray:
    """Features outside the modality set are zeroed, not dropped."""
    return X * modality_mask(modalities)


def fit_cell(ws: WindowSet, train_ids, modalities, hyper: Hyper, name: str) -> Classifier:
    part = ws.select_users(train_ids)
    mask = modality_mask(modalities)
    try:
        with warnings.catch_warnings():
            # zeroed columns are constant by construction
            warnings.filterwarnings("ignore", message="dropping constant features")
            return train(masked(part.X, modalities), part.y, hyper, FEATURE_NAMES)
    except TrainingError as exc:
        raise TrainingError(f"cell {name!r} failed to train: {exc}") from exc


def run_cell(bench: Workbench, spec: ExperimentSpec, name: str, config: SimConfig,
             noise: NoiseSpec, modalities) -> tuple[CellResult, Classifier, WindowSet]:
    """Train on training users and evaluate on validation users. Identical cells
    (same world, noise, modalities, window, split and hyperparameters) are cached."""
    key = (noise_hash(config, noise), tuple(modalities), spec.window, spec.validation_fraction, spec.hyper)
    if key in bench._cells:
        res, model, ws = bench._cells[key]
        return replace(res, name=name), model, ws
    _, users, _ = bench.world(config)
    train_ids, val_ids = split_users(users, spec.validation_fraction, config.master_seed)
    ws = bench.windows(config, noise, spec.window)
    model = fit_cell(ws, train_ids, modalities, spec.hyper, name)
    val = ws.select_users(val_ids)
    if set(train_ids) & set(val.user_ids.tolist()):
        raise AssertionError("validation windows overlap training users")
    metrics = evaluate(model, masked(val.X, modalities), val.y)
    log.info("cell %-16s acc=%.4f f1_mci=%.4f f1_earlyad=%.4f", name, metrics.accuracy,
             metrics.f1_of(L.MCI), metrics.f1_of(L.EarlyAD))
    result = (CellResult(name, metrics, noise_hash(config, noise), noise, tuple(modalities),
                         tuple(train_ids), tuple(val_ids)), model, ws)
    bench._cells[key] = result
    return result


def _fmt(x) -> str:
    return f"{x:.4f}"


def run_ablation(spec: ExperimentSpec, bench: Workbench | None = None) -> EvaluationReport:
    """Full, coherence-only, behaviour-only and no-noise cells on one split."""
    bench = bench or Workbench()
    world = spec.world()
    cells = [
        ("full", spec.base.noise, spec.modalities),
        ("coherence_only", spec.base.noise, COHERENCE_ONLY),
        ("behavior_only", spec.base.noise, BEHAVIOR_ONLY),
        ("no_noise", NoiseSpec.clean(), spec.modalities),
    ]
    report = EvaluationReport(spec.name)
    rows = []
    for name, noise, mods in cells:
        res, _, _ = run_cell(bench, spec, name, world, noise, mods)
        report.cells[name] = res
        report.provenance[f"ablation.{name}"] = res.config_hash
        acc, f_mci, f_ea = res.row()
        rows.append((name, _fmt(acc), _fmt(f_mci), _fmt(f_ea)))
        for key, val in (("accuracy", acc), ("f1_mci", f_mci), ("f1_earlyad", f_ea)):
            report.targets.append((f"ablation.{name}.{key}", REFERENCE_TARGETS.get(f"ablation.{name}.{key}"), val))
    report.tables["ablation"] = (("setting", "accuracy", "f1_mci", "f1_earlyad"), rows)
    return report


def coherence_drop_rows(table: SessionTable, noisy: SessionTable, condition: str) -> list:
    rows = []
    for lab in (L.Healthy, L.MCI, L.EarlyAD):
        sel = table.label == int(lab)
        if not sel.any():
            continue
        c, n = float(table.coherence[sel].mean()), float(noisy.coherence[sel].mean())
        rows.append((condition, lab.name, _fmt(c), _fmt(n), _fmt(100.0 * (c - n) / c if c else 0.0)))
    return rows


def run_noise_sweep(spec: ExperimentSpec, bench: Workbench | None = None) -> EvaluationReport:
    """Full-modality accuracy per noise level plus per-label coherence drops.

    The default grid scales the reference noise, so behavioural noise moves with
    sigma and a zero level is the clean condition.
    """
    bench = bench or Workbench()
    grid = spec.sweep_specs()
    if len(grid) < 2:
        raise ConfigError("noise sweep needs at least two grid points")
    world = spec.world()
    report = EvaluationReport(spec.name)
    rows, drops = [], []
    table, _, _ = bench.world(world)
    for noise in grid:
        name = f"sigma={noise.sigma:g}"
        res, _, _ = run_cell(bench, spec, name, world, noise, spec.modalities)
        report.cells[name] = res
        report.provenance[f"sweep.{name}"] = res.config_hash
        acc, f_mci, f_ea = res.row()
        rows.append((_fmt(noise.sigma), _fmt(acc), _fmt(f_mci), _fmt(f_ea)))
        drops.extend(coherence_drop_rows(table, bench.noisy_table(world, noise), name))
        ref = REFERENCE_TARGETS.get(f"sweep.accuracy@{noise.sigma:g}")
        if ref is not None:
            report.targets.append((f"sweep.accuracy@{noise.sigma:g}", ref, acc))
    calibrated = NoiseSpec.attenuated()
    drops.extend(coherence_drop_rows(table, bench.noisy_table(world, calibrated), "attenuated"))
    report.tables["noise_sweep"] = (("sigma", "accuracy", "f1_mci", "f1_earlyad"), rows)
    report.tables["coherence_drop"] = (("condition", "label", "clean", "noisy", "drop_pct"), drops)
    return report


def run_sensitivity(spec: ExperimentSpec, bench: Workbench | None = None) -> EvaluationReport:
    """Full model over the user-count x summary-length grid."""
    bench = bench or Workbench()
    report = EvaluationReport(spec.name)
    rows = []
    by_users: dict = {}
    separation: dict = {}
    standardized: dict = {}
    for lo_hi in spec.summary_grid:
        for n in spec.user_grid:
            world = spec.world().with_(total_users=int(n), summary_sentence_range=tuple(lo_hi))
            name = f"users={n},sentences={lo_hi[0]}-{lo_hi[1]}"
            res, _, _ = run_cell(bench, spec, name, world, spec.base.noise, spec.modalities)
            report.cells[name] = res
            report.provenance[f"sensitivity.{name}"] = res.config_hash
            table, _, _ = bench.world(world)
            h = table.coherence[table.label == int(L.Healthy)]
            e = table.coherence[table.label == int(L.EarlyAD)]
            sep = float(h.mean() - e.mean())
            # raw gaps barely move with length; the spread is what changes
            sep_d = cohens_d(h, e)
            separation.setdefault(tuple(lo_hi), []).append(sep)
            standardized.setdefault(tuple(lo_hi), []).append(sep_d)
            acc, f_mci, f_ea = res.row()
            by_users.setdefault(tuple(lo_hi), []).append((f_mci, f_ea))
            rows.append((n, f"{lo_hi[0]}-{lo_hi[1]}", _fmt(acc), _fmt(f_mci), _fmt(f_ea), _fmt(sep),
                         _fmt(sep_d)))
    report.tables["sensitivity"] = (("users", "sentences", "accuracy", "f1_mci", "f1_earlyad",
                                     "coherence_separation", "coherence_separation_d"), rows)
    f_mci_all = [float(r[3]) for r in rows]
    f_ea_all = [float(r[4]) for r in rows]
    report.ttd["sensitivity.f1_earlyad_spread"] = max(f_ea_all) - min(f_ea_all)
    report.ttd["sensitivity.f1_mci_spread"] = max(f_mci_all) - min(f_mci_all)
    for lo_hi, pairs in by_users.items():
        tag = f"{lo_hi[0]}-{lo_hi[1]}"
        report.ttd[f"sensitivity.f1_mci_spread.{tag}"] = max(p[0] for p in pairs) - min(p[0] for p in pairs)
        report.ttd[f"sensitivity.f1_earlyad_spread.{tag}"] = max(p[1] for p in pairs) - min(p[1] for p in pairs)
    for lo_hi, seps in separation.items():
        report.ttd[f"sensitivity.separation.{lo_hi[0]}-{lo_hi[1]}"] = float(np.mean(seps))
        report.ttd[f"sensitivity.separation_d.{lo_hi[0]}-{lo_hi[1]}"] = float(np.mean(standardized[lo_hi]))
    report.targets += [
        ("sensitivity.f1_earlyad.mean", REFERENCE_TARGETS["sensitivity.f1_earlyad.mean"], float(np.mean(f_ea_all))),
        ("sensitivity.f1_mci.min", REFERENCE_TARGETS["sensitivity.f1_mci.min"], min(f_mci_all)),
        ("sensitivity.f1_mci.max", REFERENCE_TARGETS["sensitivity.f1_mci.max"], max(f_mci_all)),
    ]
    return report


def daily_probabilities(model: Classifier, ws: WindowSet, user_id: int, total_days: int,
                        modalities, target: CognitiveLabel) -> list:
    """Target-class probability per day from the window ending that day (None if no window)."""
    part = ws.select_users([user_id])
    out = [None] * total_days
    if len(part) == 0 or target not in model.classes:
        return out
    P = predict_proba(model, masked(part.X, modalities))[:, model.classes.index(target)]
    for d, p in zip(part.end_day, P):
        out[int(d) - 1] = float(min(1.0, max(0.0, p)))
    return out


def detection_outcomes(model: Classifier, ws: WindowSet, users, user_ids, total_days: int,
                       modalities, policy: DetectionPolicy) -> list:
    by_id = {u.user_id: u for u in users}
    out = []
    for uid in user_ids:
        probs = daily_probabilities(model, ws, uid, total_days, modalities, policy.target_label)
        day = first_detection_day(probs, policy)
        onset = onset_day(by_id[uid], policy.target_label, total_days)
        out.append(DetectionOutcome(uid, day is not None, day, onset))
    return out


def run_earlydetect(spec: ExperimentSpec, bench: Workbench | None = None) -> EvaluationReport:
    """ERDE for coherence-only, behaviour-only and fusion models on validation users."""
    bench = bench or Workbench()
    world = spec.world()
    _, users, _ = bench.world(world)
    report = EvaluationReport(spec.name)
    for name, mods in (("coherence_only", COHERENCE_ONLY), ("behavior_only", BEHAVIOR_ONLY),
                       ("fusion", spec.modalities)):
        res, model, ws = run_cell(bench, spec, f"detect.{name}", world, spec.base.noise, mods)
        outcomes = detection_outcomes(model, ws, users, res.validation_users, world.total_days,
                                      mods, spec.policy)
        report.provenance[f"earlydetect.{name}"] = res.config_hash
        for o in spec.erde_windows:
            value = mean_erde(outcomes, o, false_early_cost=spec.false_early_cost)
            report.erde_rows.append((name, o, value))
            if spec.false_early_cost is not None:
                report.ttd[f"{name}.erde@{o}.unpenalised"] = mean_erde(outcomes, o)
            report.targets.append((f"earlydetect.{name}.erde@{o}",
                                   REFERENCE_TARGETS.get(f"earlydetect.{name}.erde@{o}"), value))
        ttds = [t for t in (time_to_detection(x) for x in outcomes) if t is not None]
        leads = [v for v in (false_early_lead(x) for x in outcomes) if v is not None]
        precision, recall = early_precision_recall(outcomes, spec.early_k)
        report.ttd[f"{name}.ttd_mean_days"] = float(np.mean(ttds)) if ttds else None
        report.ttd[f"{name}.detected_after_onset"] = len(ttds)
        report.ttd[f"{name}.false_early"] = len(leads)
        report.ttd[f"{name}.false_early_mean_lead"] = float(np.mean(leads)) if leads else None
        report.ttd[f"{name}.precision@{spec.early_k}"] = precision
        report.ttd[f"{name}.recall@{spec.early_k}"] = recall
        report.ttd[f"{name}.at_risk_users"] = sum(1 for x in outcomes if x.at_risk)
        report.curves[f"detection_curve_{name}"] = detection_curve(outcomes, world.total_days)
        if name == "fusion":
            for key in ("ttd_mean_days", f"recall@{spec.early_k}", f"precision@{spec.early_k}"):
                ref = REFERENCE_TARGETS.get(f"earlydetect.{key}")
                report.targets.append((f"earlydetect.{key}", ref, report.ttd[f"{name}.{key}"]))
    for o in spec.erde_windows:
        ref = REFERENCE_TARGETS.get(f"earlydetect.fusion.erde@{o}.prose")
        if ref is not None:
            achieved = next(v for m, oo, v in report.erde_rows if m == "fusion" and oo == o)
            report.targets.append((f"earlydetect.fusion.erde@{o}.prose", ref, achieved))
    report.tables["erde"] = None  # written by write_erde_csv
    return report


SEPARABILITY_FEATURES = ("coherence_mean", "behavioral_entropy", "drift_slope")
SEPARABILITY_PAIRS = ((L.Healthy, L.MCI), (L.MCI, L.EarlyAD))


def subject_means(ws: WindowSet, feature: str, label: CognitiveLabel) -> list:
    """One value per user: the mean of ``feature`` over that user's windows with ``label``.

    Sliding windows overlap, so they are not independent observations; the
    user is the unit of analysis.
    """
    col = ws.column(feature)
    sel = ws.y == int(label)
    users, inverse = np.unique(ws.user_ids[sel], return_inverse=True)
    sums = np.bincount(inverse, weights=col[sel], minlength=users.size)
    counts = np.bincount(inverse, minlength=users.size)
    return (sums / counts).tolist()


def run_separability(spec: ExperimentSpec, bench: Workbench | None = None) -> EvaluationReport:
    """Cohen's d and Welch t between labels on per-user means of window features
    under the reference noise."""
    bench = bench or Workbench()
    world = spec.world()
    ws = bench.windows(world, spec.base.noise, spec.window)
    report = EvaluationReport(spec.name)
    rows = []
    for feat in SEPARABILITY_FEATURES:
        for a, b in SEPARABILITY_PAIRS:
            ga, gb = subject_means(ws, feat, a), subject_means(ws, feat, b)
            stat = separability(feat, (a.name, b.name), ga, gb)
            report.separability.append(stat)
            rows.append((feat, f"{a.name}-{b.name}", len(ga), len(gb), _fmt(stat.cohens_d),
                         _fmt(stat.t_statistic), f"{stat.p_value:.4e}"))
            for what, val in (("d", stat.cohens_d), ("p", stat.p_value)):
                key = f"separability.{feat}.{a.name}-{b.name}.{what}"
                report.targets.append((key, REFERENCE_TARGETS.get(key), val))
    report.tables["separability"] = (("feature", "comparison", "n_a", "n_b", "cohens_d", "t", "p_value"), rows)
    report.provenance["separability"] = noise_hash(world, spec.base.noise)
    return report


def run_all(spec: ExperimentSpec, bench: Workbench | None = None, sensitivity: bool = False) -> EvaluationReport:
    bench = bench or Workbench()
    report = run_ablation(spec, bench)
    report.merge(run_noise_sweep(spec, bench))
    report.merge(run_separability(spec, bench))
    report.merge(run_earlydetect(spec, bench))
    if sensitivity:
        report.merge(run_sensitivity(spec, bench))
    return report


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _show(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.4e}" if x != 0 and (abs(x) < 1e-3) else f"{x:.4f}"
    return str(x)


def emit_report(report: EvaluationReport, out_dir) -> list:
    """One CSV per table and curve plus ``summary.md``; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, content in report.tables.items():
        if content is None:
            continue
        header, rows = content
        p = out / f"{stem}.csv"
        _write_csv(p, header, rows)
        written.append(p)
    if report.erde_rows:
        p = out / "erde.csv"
        write_erde_csv(report.erde_rows, p)
        written.append(p)
    for name, curve in report.curves.items():
        p = out / f"{name}.csv"
        write_curve_csv(curve, p)
        written.append(p)

    lines = [f"# Experiment report: {report.name}", ""]
    if report.cells:
        lines += ["## Cells", "", "| cell | accuracy | f1_mci | f1_earlyad | config hash |",
                  "|---|---|---|---|---|"]
        for name, c in report.cells.items():
            acc, f_mci, f_ea = c.row()
            lines.append(f"| {name} | {acc:.4f} | {f_mci:.4f} | {f_ea:.4f} | `{c.config_hash[:16]}` |")
        lines.append("")
    if report.ttd:
        lines += ["## Detection and sensitivity summary", ""]
        lines += [f"- {k}: {_show(v)}" for k, v in report.ttd.items()]
        lines.append("")
    if report.targets:
        lines += ["## Reference targets (calibration only, not asserted)", "",
                  "| quantity | target | achieved |", "|---|---|---|"]
        for key, target, achieved in report.targets:
            lines.append(f"| {key} | {_show(target)} | {_show(achieved)} |")
        lines.append("")
    if report.notes:
        lines += ["## Notes", ""] + [f"- {n}" for n in report.notes] + [""]
    lines += ["## Provenance", "", "| item | sha256 |", "|---|---|"]
    for key, h in sorted(report.provenance.items()):
        lines.append(f"| config {key} | `{h}` |")
    for p in written:
        lines.append(f"| file {p.name} | `{_sha256(p)}` |")
    summary = out / "summary.md"
    summary.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(summary)
    return written


def report_to_json(report: EvaluationReport) -> dict:
    """Machine-readable form used by the ``report`` subcommand."""
    return {
        "name": report.name,
        "cells": {k: {"metrics": c.metrics.to_dict(), "config_hash": c.config_hash,
                      "noise": c.noise.to_dict(), "modalities": list(c.modalities)}
                  for k, c in report.cells.items()},
        "tables": {k: {"header": list(v[0]), "rows": [list(r) for r in v[1]]}
                   for k, v in report.tables.items() if v is not None},
        "erde": [list(r) for r in report.erde_rows],
        "summary": report.ttd,
        "curves": {k: [list(p) for p in v] for k, v in report.curves.items()},
        "provenance": report.provenance,
        "targets": [list(t) for t in report.targets],
        "notes": report.notes,
    }


def report_from_json(d: dict) -> EvaluationReport:
    rep = EvaluationReport(d["name"])
    rep.tables = {k: (tuple(v["header"]), [tuple(r) for r in v["rows"]]) for k, v in d["tables"].items()}
    rep.erde_rows = [tuple(r) for r in d["erde"]]
    rep.ttd = dict(d["summary"])
    rep.curves = {k: [tuple(p) for p in v] for k, v in d["curves"].items()}
    rep.provenance = dict(d["provenance"])
    rep.targets = [tuple(t) for t in d["targets"]]
    rep.notes = list(d["notes"])
    return rep
