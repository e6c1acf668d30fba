"""Simulation configuration and its JSON form."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Mapping

from .domain import CATEGORIES, ConfoundKind, ProgressionProfileKind, uniform_profile_mix
from .errors import ConfigError
from .features import NoiseSpec

DEFAULT_MASTER_SEED = 20240601


def default_noise() -> NoiseSpec:
    """Noise of the reference ("full model") condition."""
    return NoiseSpec(sigma=0.1, delta=1.0, scope="day")


@dataclass(frozen=True)
class SimConfig:
    total_users: int = 200
    total_days: int = 200
    videos_per_day: int = 5
    categories_per_day: int = 2
    videos_per_category: int = 20
    summary_sentence_range: tuple = (1, 3)
    noise: NoiseSpec = field(default_factory=default_noise)
    profile_mix: Mapping = field(default_factory=uniform_profile_mix)
    confound_rates: Mapping = field(default_factory=lambda: {k: 0.1 for k in ConfoundKind})
    coherence_backend: str = "text"
    master_seed: int = DEFAULT_MASTER_SEED
    embedding_dim: int = 256
    categories: tuple = CATEGORIES

    def __post_init__(self):
        for name in ("total_users", "total_days", "videos_per_day", "categories_per_day",
                     "videos_per_category", "embedding_dim"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        lo, hi = self.summary_sentence_range
        if not 1 <= lo <= hi <= 3:
            raise ConfigError("summary_sentence_range must satisfy 1 <= lo <= hi <= 3")
        if self.coherence_backend not in ("text", "parametric"):
            raise ConfigError(f"unknown coherence backend {self.coherence_backend!r}")
        if self.categories_per_day > len(self.categories):
            raise ConfigError("categories_per_day exceeds the number of categories")
        if self.videos_per_day > self.categories_per_day * self.videos_per_category:
            raise ConfigError("videos_per_day exceeds the videos available in the sampled categories")
        mix = {_kind(k): float(v) for k, v in self.profile_mix.items()}
        rates = {_confound(k): float(v) for k, v in self.confound_rates.items()}
        if any(v < 0 for v in mix.values()) or abs(sum(mix.values()) - 1.0) > 1e-9:
            raise ConfigError("profile_mix must be non-negative and sum to 1")
        if any(not 0 <= v <= 1 for v in rates.values()):
            raise ConfigError("confound rates must lie in [0, 1]")
        object.__setattr__(self, "profile_mix", mix)
        object.__setattr__(self, "confound_rates", rates)
        object.__setattr__(self, "summary_sentence_range", (int(lo), int(hi)))
        object.__setattr__(self, "categories", tuple(self.categories))

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "total_users": self.total_users,
            "total_days": self.total_days,
            "videos_per_day": self.videos_per_day,
            "categories_per_day": self.categories_per_day,
            "videos_per_category": self.videos_per_category,
            "summary_sentence_range": list(self.summary_sentence_range),
            "noise": self.noise.to_dict(),
            "profile_mix": {k.value: v for k, v in self.profile_mix.items()},
            "confound_rates": {k.value: v for k, v in self.confound_rates.items()},
            "coherence_backend": self.coherence_backend,
            "master_seed": self.master_seed,
            "embedding_dim": self.embedding_dim,
            "categories": list(self.categories),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SimConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        if "noise" in kw:
            kw["noise"] = NoiseSpec.from_dict(kw["noise"])
        if "summary_sentence_range" in kw:
            kw["summary_sentence_range"] = tuple(kw["summary_sentence_range"])
        if "categories" in kw:
            kw["categories"] = tuple(kw["categories"])
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _kind(k):
    if isinstance(k, ProgressionProfileKind):
        return k
    try:
        return ProgressionProfileKind(k)
    except ValueError:
        raise ConfigError(f"unknown progression profile {k!r}") from None


def _confound(k):
    if isinstance(k, ConfoundKind):
        return k
    try:
        return ConfoundKind(k)
    except ValueError:
        raise ConfigError(f"unknown confound {k!r}") from None


def load_config(path) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return SimConfig.from_dict(data.get("simulation", data))
