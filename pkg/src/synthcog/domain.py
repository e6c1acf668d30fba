"""Core domain types, the synthetic video catalog and population sampling."""
from __future__ import annotations

import enum
import hashlib
import json
import random
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

from .errors import ConfigError


class CognitiveLabel(enum.IntEnum):
    """Ground-truth cognitive state; integer value is the severity rank."""

    Healthy = 0
    MCI = 1
    EarlyAD = 2
    ModAD = 3
    SevAD = 4

    @classmethod
    def parse(cls, name: str) -> "CognitiveLabel":
        try:
            return cls[name]
        except KeyError:
            raise ValueError(f"unknown cognitive label {name!r}") from None


class ProgressionProfileKind(enum.Enum):
    StableHealthy = "StableHealthy"
    MildProgressor = "MildProgressor"
    GradualDecliner = "GradualDecliner"
    FastDecliner = "FastDecliner"
    StableMCI = "StableMCI"
    StableEarlyAD = "StableEarlyAD"


class ConfoundKind(enum.Enum):
    SlowViewer = "SlowViewer"
    ImpulsiveReplayer = "ImpulsiveReplayer"
    LowLiker = "LowLiker"


CATEGORIES = ("News", "Sports", "Cooking", "Entertainment", "World")
MIN_DURATION_S = 15
MAX_DURATION_S = 90


@dataclass(frozen=True)
class TransitionDays:
    """Sampled transition days. Names follow the profile text: ``d1`` belongs to
    MildProgressor, ``d2``/``d5`` to FastDecliner, ``d3``/``d4`` to GradualDecliner."""

    d1: int | None = None
    d2: int | None = None
    d3: int | None = None
    d4: int | None = None
    d5: int | None = None
    d6: int | None = None

    def populated(self) -> dict[str, int]:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    def is_empty(self) -> bool:
        return not self.populated()


@dataclass(frozen=True)
class UserProfile:
    user_id: int
    profile_kind: ProgressionProfileKind
    transitions: TransitionDays
    confounds: frozenset = field(default_factory=frozenset)
    rng_stream_id: int = 0


@dataclass(frozen=True)
class VideoMetadata:
    video_id: int
    category: str
    duration_s: int
    title: str
    tags: tuple
    reference_summary: str

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "category": self.category,
            "duration_s": self.duration_s,
            "title": self.title,
            "tags": list(self.tags),
            "reference_summary": self.reference_summary,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "VideoMetadata":
        return cls(int(d["video_id"]), d["category"], int(d["duration_s"]), d["title"],
                   tuple(d["tags"]), d["reference_summary"])


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary printable parts (independent of PYTHONHASHSEED)."""
    digest = hashlib.blake2b(repr(parts).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def user_stream(master_seed: int, user_id: int, purpose: str = "main") -> random.Random:
    return random.Random(derive_seed(master_seed, user_id, purpose))


@lru_cache(maxsize=None)
def load_corpus() -> dict:
    text = resources.files("synthcog").joinpath("data/corpus.json").read_text(encoding="utf-8")
    return json.loads(text)


def _fill(template: str, slots: Mapping[str, str]) -> str:
    caps = {k.capitalize(): v.capitalize() for k, v in slots.items()}
    return template.format(**slots, **caps)


def build_catalog(config, seed: int) -> list[VideoMetadata]:
    """Deterministic catalog with ``config.videos_per_category`` videos per category."""
    categories = tuple(getattr(config, "categories", CATEGORIES))
    per_cat = int(config.videos_per_category)
    if not categories:
        raise ConfigError("catalog needs at least one category")
    if per_cat < 1:
        raise ConfigError("videos_per_category must be >= 1")
    corpus = load_corpus()
    rng = random.Random(derive_seed(seed, "catalog"))
    catalog = []
    vid = 0
    for cat in categories:
        if cat not in corpus:
            raise ConfigError(f"no templates for category {cat!r}")
        templates = corpus[cat]
        slot_lists = corpus["_slots"][cat]
        for _ in range(per_cat):
            slots = {name: rng.choice(words) for name, words in sorted(slot_lists.items())}
            first, second = rng.sample(range(len(templates)), 2)
            summary = " ".join(_fill(templates[i], slots) for i in (first, second))
            title = _fill(rng.choice(corpus["_titles"]), slots)
            catalog.append(VideoMetadata(
                video_id=vid,
                category=cat,
                duration_s=rng.randint(MIN_DURATION_S, MAX_DURATION_S),
                title=title,
                tags=(slots["who"], slots["what"], slots["where"]),
                reference_summary=summary,
            ))
            vid += 1
    return catalog


def write_catalog_jsonl(catalog: Sequence[VideoMetadata], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for video in catalog:
            fh.write(json.dumps(video.to_dict(), sort_keys=False) + "\n")


def read_catalog_jsonl(path) -> list[VideoMetadata]:
    with open(path, encoding="utf-8") as fh:
        return [VideoMetadata.from_dict(json.loads(line)) for line in fh if line.strip()]


def largest_remainder(n: int, fractions: Sequence[float]) -> list[int]:
    """Apportion ``n`` items by largest remainder; ties go to the earlier entry."""
    quotas = [n * f for f in fractions]
    counts = [int(q) for q in quotas]
    short = n - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


DEFAULT_CONFOUND_RATE = 0.1


def uniform_profile_mix() -> dict:
    kinds = list(ProgressionProfileKind)
    return {k: 1.0 / len(kinds) for k in kinds}


def _validate_fractions(mix: Mapping, what: str, must_sum_to_one: bool) -> None:
    for key, value in mix.items():
        if value < 0:
            raise ConfigError(f"{what}: negative fraction for {key}")
        if value > 1:
            raise ConfigError(f"{what}: fraction above 1 for {key}")
    if must_sum_to_one and abs(sum(mix.values()) - 1.0) > 1e-9:
        raise ConfigError(f"{what}: fractions sum to {sum(mix.values())!r}, expected 1")


def sample_population(n_users: int, profile_mix: Mapping | None = None,
                      confound_rates: Mapping | None = None,
                      master_seed: int = 0, total_days: int = 200) -> list[UserProfile]:
    """Assign profile kinds by largest-remainder rounding, then sample each
    user's transitions and confounds from that user's own stream."""
    from .progression import sample_transition_days

    if n_users < 1:
        raise ConfigError("n_users must be >= 1")
    mix = dict(uniform_profile_mix() if profile_mix is None else profile_mix)
    _validate_fractions(mix, "profile_mix", must_sum_to_one=True)
    rates = {k: DEFAULT_CONFOUND_RATE for k in ConfoundKind} if confound_rates is None else dict(confound_rates)
    _validate_fractions(rates, "confound_rates", must_sum_to_one=False)

    kinds = list(ProgressionProfileKind)
    counts = largest_remainder(n_users, [mix.get(k, 0.0) for k in kinds])
    assigned = [k for k, c in zip(kinds, counts) for _ in range(c)]

    users = []
    for user_id, kind in enumerate(assigned):
        stream_id = derive_seed(master_seed, user_id, "profile")
        rng = random.Random(stream_id)
        transitions = sample_transition_days(kind, total_days, rng)
        confounds = frozenset(c for c in ConfoundKind if rng.random() < rates.get(c, 0.0))
        users.append(UserProfile(user_id, kind, transitions, confounds, stream_id))
    return users
