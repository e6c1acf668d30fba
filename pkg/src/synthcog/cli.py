"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import SimConfig
from .errors import ConfigError, DataError, InputError, TrainingError

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3
GLOBAL_KEYS = ("seed", "workers", "backend")

log = logging.getLogger("synthcog")


def _read_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    allowed = {"simulation", "experiment", *GLOBAL_KEYS}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    return data


def _resolve(args, doc: dict) -> tuple[SimConfig, int]:
    """SimConfig from the config file with command-line flags taking precedence."""
    sim = dict(doc.get("simulation", {}))
    seed = args.seed if args.seed is not None else doc.get("seed")
    backend = args.backend if args.backend is not None else doc.get("backend")
    if seed is not None:
        sim["master_seed"] = int(seed)
    if backend is not None:
        sim["coherence_backend"] = backend
    workers = args.workers if args.workers is not None else int(doc.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return SimConfig.from_dict(sim), workers


def _experiment(args, doc: dict):
    from .harness import ExperimentSpec

    config, workers = _resolve(args, doc)
    exp = dict(doc.get("experiment", {}))
    if "base" in exp:
        raise ConfigError("put simulation settings under 'simulation', not 'experiment.base'")
    spec = ExperimentSpec.from_dict(exp)
    from dataclasses import replace
    return replace(spec, base=config), workers


# ---------------------------------------------------------------- subcommands

def cmd_simulate(args) -> int:
    from .dataset import simulate

    config, workers = _resolve(args, _read_config(args.config))
    out = Path(args.out)
    path = out / f"{args.name}.jsonl"
    ds = simulate(config, path, workers=workers)
    print(json.dumps({"records": len(ds), "path": str(path),
                      "manifest": str(out / f"{args.name}.manifest.json"),
                      "config_hash": ds.manifest["config_hash"]}))
    return EXIT_OK


FEATURE_META = ("user_id", "profile", "end_day", "label", "n_sessions")


def cmd_features(args) -> int:
    from .dataset import load
    from .features import FEATURE_NAMES
    from .windows import SessionTable, labels_by_day, window_features

    ds = load(args.data)
    durations = {v.video_id: v.duration_s for v in ds.catalog}
    table = SessionTable.from_records(ds.records, durations, ds.users, ds.config.total_days, noisy=True)
    ws = window_features(table, labels_by_day(ds.users, ds.config.total_days), args.window)
    profile = {u.user_id: u.profile_kind.value for u in ds.users}
    from .domain import CognitiveLabel

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FEATURE_META + FEATURE_NAMES)
        for i in range(len(ws)):
            uid = int(ws.user_ids[i])
            w.writerow([uid, profile[uid], int(ws.end_day[i]), CognitiveLabel(int(ws.y[i])).name,
                        int(ws.n_sessions[i])] + [repr(float(x)) for x in ws.X[i]])
    print(json.dumps({"windows": len(ws), "path": str(out)}))
    return EXIT_OK


def _read_features(path):
    from .domain import CognitiveLabel, ProgressionProfileKind
    from .features import FEATURE_NAMES

    rows, meta = [], []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read features {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != FEATURE_META + FEATURE_NAMES:
            raise DataError("feature file header does not match", line=1)
        for lineno, rec in enumerate(reader, start=2):
            try:
                meta.append((int(rec[0]), ProgressionProfileKind(rec[1]), int(rec[2]),
                             CognitiveLabel[rec[3]]))
                rows.append([float(x) for x in rec[5:]])
            except (ValueError, KeyError, IndexError) as exc:
                raise DataError(f"bad feature row: {exc}", line=lineno) from None
    return np.array(rows), meta


def _users_from_meta(meta):
    from .domain import TransitionDays, UserProfile

    seen = {}
    for uid, kind, _, _ in meta:
        seen.setdefault(uid, UserProfile(uid, kind, TransitionDays(), frozenset(), 0))
    return list(seen.values())


def cmd_train(args) -> int:
    from .features import FEATURE_NAMES, modality_mask
    from .model import Hyper, train
    from .windows import split_users

    doc = _read_config(args.config)
    config, _ = _resolve(args, doc)
    X, meta = _read_features(args.features)
    users = _users_from_meta(meta)
    train_ids, val_ids = split_users(users, args.validation_fraction, config.master_seed)
    uid = np.array([m[0] for m in meta])
    y = np.array([int(m[3]) for m in meta])
    rows = np.isin(uid, train_ids)
    modalities = tuple(args.modalities.split(","))
    mask = modality_mask(modalities)
    import warnings
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="dropping constant features")
        hyper = Hyper() if args.epochs is None else Hyper(epochs=args.epochs)
        model = train(X[rows] * mask, y[rows], hyper, FEATURE_NAMES)
    doc_out = model.to_dict()
    doc_out["modalities"] = list(modalities)
    doc_out["validation_users"] = val_ids
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(doc_out, indent=1), encoding="utf-8")
    print(json.dumps({"path": args.out, "train_windows": int(rows.sum()),
                      "final_loss": model.loss_history[-1]}))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .features import modality_mask
    from .model import Classifier, evaluate

    try:
        doc = json.loads(Path(args.model).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read model {args.model}: {exc}") from None
    model = Classifier.from_dict(doc)
    X, meta = _read_features(args.features)
    uid = np.array([m[0] for m in meta])
    y = np.array([int(m[3]) for m in meta])
    rows = np.ones(len(meta), dtype=bool)
    if args.users == "validation":
        rows = np.isin(uid, doc.get("validation_users", []))
        if not rows.any():
            raise DataError("no validation users of the model occur in the feature file")
    mask = modality_mask(doc.get("modalities", ("language", "behavior")))
    metrics = evaluate(model, X[rows] * mask, y[rows])
    text = json.dumps(metrics.to_dict(), indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def _emit(report, out, extra=None):
    from .harness import emit_report, report_to_json

    paths = emit_report(report, out)
    (Path(out) / "report.json").write_text(json.dumps(report_to_json(report), indent=1) + "\n",
                                           encoding="utf-8")
    print(json.dumps({"written": [str(p) for p in paths], **(extra or {})}))


def cmd_ablate(args) -> int:
    from .harness import Workbench, run_ablation

    spec, workers = _experiment(args, _read_config(args.config))
    _emit(run_ablation(spec, Workbench(workers)), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .harness import Workbench, run_earlydetect, run_noise_sweep, run_sensitivity

    spec, workers = _experiment(args, _read_config(args.config))
    fn = {"noise": run_noise_sweep, "sensitivity": run_sensitivity, "earlydetect": run_earlydetect}[args.kind]
    _emit(fn(spec, Workbench(workers)), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    from .harness import Workbench, report_from_json, run_all

    if args.from_json:
        from .harness import emit_report
        try:
            doc = json.loads(Path(args.from_json).read_text(encoding="utf-8"))
            report = report_from_json(doc)
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise DataError(f"cannot read report {args.from_json}: {exc}") from None
        paths = emit_report(report, args.out)
        print(json.dumps({"written": [str(p) for p in paths]}))
        return EXIT_OK
    spec, workers = _experiment(args, _read_config(args.config))
    _emit(run_all(spec, Workbench(workers), sensitivity=args.sensitivity), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    def globals_(default):
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--seed", type=int, default=default, help="master seed")
        g.add_argument("--workers", type=int, default=default, help="worker processes")
        g.add_argument("--backend", choices=("text", "parametric"), default=default,
                       help="coherence backend")
        g.add_argument("-v", "--verbose", action="store_true",
                       default=False if default is None else default)
        return g

    # flags may come before or after the subcommand; the subcommand copy must
    # not reset a value given before it
    common = globals_(argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="synthcog", parents=[globals_(None)],
                                description="Synthetic cognitive-decline interaction data and experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate a dataset to JSONL")
    s.add_argument("--config", help="JSON config file")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--name", default="sessions", help="dataset file stem")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("features", parents=[common], help="window features from a dataset")
    s.add_argument("--data", required=True, help="dataset JSONL (manifest alongside)")
    s.add_argument("--out", required=True, help="feature CSV path")
    s.add_argument("--window", type=int, default=7)
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("train", parents=[common], help="train a classifier on training users")
    s.add_argument("--features", required=True)
    s.add_argument("--out", required=True, help="model JSON path")
    s.add_argument("--config")
    s.add_argument("--modalities", default="language,behavior")
    s.add_argument("--validation-fraction", type=float, default=0.2)
    s.add_argument("--epochs", type=int, help="gradient-descent epochs (default: model default)")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", parents=[common], help="evaluate a saved model")
    s.add_argument("--model", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--users", choices=("validation", "all"), default="validation")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("ablate", parents=[common], help="modality and noise ablation")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ablate)

    s = sub.add_parser("sweep", parents=[common], help="noise, sensitivity or early-detection sweep")
    s.add_argument("--kind", choices=("noise", "sensitivity", "earlydetect"), required=True)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("report", parents=[common], help="run every experiment and write the report")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--sensitivity", action="store_true", help="include the sensitivity grid")
    s.add_argument("--from-json", help="re-render an existing report.json instead of running")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, InputError, TrainingError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
