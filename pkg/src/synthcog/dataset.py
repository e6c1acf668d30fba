"""Session-level simulation, JSONL persistence and deterministic replay."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from . import __version__
from .config import SimConfig
from .domain import (CognitiveLabel, ConfoundKind, UserProfile, VideoMetadata, build_catalog,
                     derive_seed, load_corpus, sample_population, user_stream,
                     read_catalog_jsonl, write_catalog_jsonl)
from .errors import ConfigError, DataError
from .features import (BEHAVIOR_FIELDS, BehaviorSample, apply_confound, draw_noise,
                       noisy_coherence, perturb_behaviors, sample_behaviors, sample_coherence,
                       sessions_today)
from .progression import label_at
from .textgen import QARecord, Summary, generate_qa, generate_summary
from .textmetrics import coherence

log = logging.getLogger(__name__)

RECORD_FIELDS = ("user_id", "day", "video_id", "category", "label", "summary", "qa", "behaviors",
                 "coherence_clean", "coherence_noisy", "confounds_applied")


@dataclass(frozen=True)
class SessionRecord:
    user_id: int
    day: int
    video_id: int
    category: str
    label: CognitiveLabel
    summary: Summary
    qa: QARecord
    behaviors: BehaviorSample
    coherence_clean: float
    coherence_noisy: float
    confounds_applied: tuple = ()

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "day": self.day,
            "video_id": self.video_id,
            "category": self.category,
            "label": self.label.name,
            "summary": self.summary.to_dict(),
            "qa": self.qa.to_dict(),
            "behaviors": self.behaviors.to_dict(),
            "coherence_clean": self.coherence_clean,
            "coherence_noisy": self.coherence_noisy,
            "confounds_applied": list(self.confounds_applied),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: Mapping, line: int | None = None) -> "SessionRecord":
        missing = [f for f in RECORD_FIELDS if f not in d]
        if missing:
            raise DataError("missing field", line=line, field=missing[0])
        extra = set(d) - set(RECORD_FIELDS)
        if extra:
            warnings.warn(f"line {line}: ignoring unknown fields {sorted(extra)}", stacklevel=2)
        current = None
        try:
            current = "label"
            label = CognitiveLabel.parse(d["label"])
            current = "summary"
            summary = Summary.from_dict(d["summary"])
            current = "qa"
            qa = QARecord.from_dict(d["qa"])
            current = "behaviors"
            behaviors = BehaviorSample.from_dict(d["behaviors"])
            current = "coherence_clean"
            c_clean = float(d["coherence_clean"])
            current = "coherence_noisy"
            c_noisy = float(d["coherence_noisy"])
            current = "user_id"
            return cls(int(d["user_id"]), int(d["day"]), int(d["video_id"]), str(d["category"]),
                       label, summary, qa, behaviors, c_clean, c_noisy,
                       tuple(d["confounds_applied"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"invalid value: {exc}", line=line, field=current) from None


class Catalog:
    """Catalog with per-category lookup."""

    def __init__(self, videos: Sequence[VideoMetadata]):
        self.videos = list(videos)
        self.by_id = {v.video_id: v for v in self.videos}
        self.by_category: dict = {}
        for v in self.videos:
            self.by_category.setdefault(v.category, []).append(v)

    def __iter__(self):
        return iter(self.videos)

    def __len__(self):
        return len(self.videos)


def simulate_day(user: UserProfile, day: int, catalog: Catalog, config: SimConfig,
                 rng, noise_rng=None) -> list[SessionRecord]:
    """One user-day: zero records on a no-login day, otherwise one record per video."""
    if not 1 <= day <= config.total_days:
        raise ConfigError(f"day {day} outside [1, {config.total_days}]")
    label = label_at(user.profile_kind, user.transitions, day, config.total_days)
    n_sessions, login_rate = sessions_today(label, rng)
    if n_sessions == 0:
        return []
    cats = rng.sample(config.categories, config.categories_per_day)
    pool = []
    for cat in cats:
        if cat not in catalog.by_category:
            raise ConfigError(f"catalog has no videos in category {cat!r}")
        pool.extend(catalog.by_category[cat])
    videos = rng.sample(pool, config.videos_per_day)
    spec = config.noise
    noise_rng = noise_rng if noise_rng is not None else rng
    shared = draw_noise(spec, noise_rng) if spec.scope == "day" and not spec.is_identity() else None
    confounds = tuple(sorted(c.value for c in user.confounds))
    records = []
    for video in videos:
        summary = generate_summary(video, label, None, rng, config.summary_sentence_range)
        qa = generate_qa(video, label, rng)
        behaviors = replace(sample_behaviors(label, video, rng), logins_per_day=login_rate)
        if config.coherence_backend == "text":
            c_clean = coherence(summary, video, config.embedding_dim)
        else:
            c_clean = sample_coherence(label, "clean", rng)
        behaviors = apply_confound(behaviors, user.confounds, video, rng)
        if spec.is_identity():
            c_noisy = c_clean
        else:
            eps, etas = shared if shared is not None else draw_noise(spec, noise_rng)
            behaviors = perturb_behaviors(behaviors, etas, video.duration_s)
            c_noisy = noisy_coherence(c_clean, spec, label, eps)
        records.append(SessionRecord(user.user_id, day, video.video_id, video.category, label,
                                     summary, qa, behaviors, c_clean, c_noisy, confounds))
    return records


def simulate_user(user: UserProfile, catalog: Catalog, config: SimConfig) -> list[SessionRecord]:
    rng = user_stream(config.master_seed, user.user_id, "sessions")
    noise_rng = user_stream(config.master_seed, user.user_id, "noise")
    out = []
    for day in range(1, config.total_days + 1):
        out.extend(simulate_day(user, day, catalog, config, rng, noise_rng))
    return out


def make_world(config: SimConfig) -> tuple[list[UserProfile], Catalog]:
    users = sample_population(config.total_users, config.profile_mix, config.confound_rates,
                              config.master_seed, config.total_days)
    catalog = Catalog(build_catalog(config, derive_seed(config.master_seed, "catalog")))
    return users, catalog


def _simulate_user_job(args):
    user, videos, config = args
    return simulate_user(user, Catalog(videos), config)


def iter_records(config: SimConfig, workers: int = 1) -> Iterator[SessionRecord]:
    """All records ordered by (user_id, day, video slot); worker count never changes the output."""
    users, catalog = make_world(config)
    if workers <= 1 or len(users) < 2:
        for user in users:
            yield from simulate_user(user, catalog, config)
        return
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        jobs = ((u, catalog.videos, config) for u in users)
        for recs in pool.map(_simulate_user_job, jobs, chunksize=4):
            yield from recs


@dataclass
class Dataset:
    """In-memory dataset: records plus the world that produced them."""

    records: list
    config: SimConfig
    users: list
    catalog: Catalog
    manifest: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def manifest_for(config: SimConfig, n_records: int, data_sha256: str | None) -> dict:
    from . import kernels

    return {
        "format": "synthcog-sessions",
        "format_version": 1,
        "code_version": __version__,
        "corpus_version": load_corpus()["_version"],
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "master_seed": config.master_seed,
        "n_records": n_records,
        "data_sha256": data_sha256,
        "kernel_backend": kernels.BACKEND,
    }


def _manifest_path(path: Path) -> Path:
    name = path.name[:-len(".jsonl")] if path.name.endswith(".jsonl") else path.name
    return path.with_name(name + ".manifest.json")


def simulate(config: SimConfig, out_path=None, workers: int = 1) -> Dataset:
    """Simulate every user-day. With ``out_path`` the records stream to JSONL
    and a manifest sidecar is written."""
    users, catalog = make_world(config)
    if out_path is None:
        records = list(iter_records(config, workers))
        return Dataset(records, config, users, catalog, manifest_for(config, len(records), None))
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = path.with_name(path.name + ".partial")
    digest = hashlib.sha256()
    records = []
    try:
        with open(partial, "w", encoding="utf-8", newline="\n") as fh:
            for rec in iter_records(config, workers):
                line = rec.to_json() + "\n"
                fh.write(line)
                digest.update(line.encode("utf-8"))
                records.append(rec)
    except OSError as exc:
        raise OSError(f"simulation output incomplete, partial file left at {partial}: {exc}") from exc
    os.replace(partial, path)
    manifest = manifest_for(config, len(records), digest.hexdigest())
    _manifest_path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_catalog_jsonl(catalog.videos, path.with_name("catalog.jsonl"))
    return Dataset(records, config, users, catalog, manifest)


def load(path) -> Dataset:
    """Read a JSONL dataset and its manifest; the world is rebuilt from the manifest config."""
    path = Path(path)
    mpath = _manifest_path(path)
    if not mpath.exists():
        raise DataError(f"manifest {mpath.name} not found")
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
        config = SimConfig.from_dict(manifest["config"])
    except (json.JSONDecodeError, KeyError) as exc:
        raise DataError(f"unreadable manifest: {exc}") from None
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"malformed JSON: {exc.msg}", line=lineno) from None
            if not isinstance(obj, dict):
                raise DataError("record is not an object", line=lineno)
            records.append(SessionRecord.from_dict(obj, line=lineno))
    users, catalog = make_world(config)
    cat_path = path.with_name("catalog.jsonl")
    if cat_path.exists():
        catalog = Catalog(read_catalog_jsonl(cat_path))
    return Dataset(records, config, users, catalog, manifest)
