"""Behavioural sampling, noise, confounds and the per-window feature vectors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .domain import CognitiveLabel, ConfoundKind, VideoMetadata
from .errors import ConfigError, DegenerateInputError, InputError

L = CognitiveLabel

BEHAVIOR_FIELDS = ("watch_time_s", "skipped_s", "pauses", "replays", "reaction_time_s",
                   "liked", "shared", "churn_pct", "logins_per_day")
COUNT_FIELDS = frozenset({"pauses", "replays"})
BINARY_FIELDS = frozenset({"liked", "shared"})

# Per-label (lo, hi). Like/share are percentages of the engagement probability;
# SevAD logins "<0.5" is taken as [0, 0.5].
BEHAVIOR_RANGES = {
    L.Healthy: {"watch_time_s": (85, 100), "skipped_s": (0, 5), "pauses": (0, 2), "replays": (0, 1),
                "reaction_time_s": (4, 6), "like_pct": (65, 80), "share_pct": (35, 50),
                "churn_pct": (1, 1), "logins_per_day": (2, 3)},
    L.MCI: {"watch_time_s": (60, 80), "skipped_s": (5, 15), "pauses": (1, 3), "replays": (1, 3),
            "reaction_time_s": (7, 10), "like_pct": (45, 55), "share_pct": (25, 35),
            "churn_pct": (2, 3), "logins_per_day": (1, 2)},
    L.EarlyAD: {"watch_time_s": (35, 55), "skipped_s": (10, 25), "pauses": (2, 5), "replays": (2, 5),
                "reaction_time_s": (11, 14), "like_pct": (15, 25), "share_pct": (5, 15),
                "churn_pct": (5, 6), "logins_per_day": (0.5, 1)},
    L.ModAD: {"watch_time_s": (20, 35), "skipped_s": (15, 30), "pauses": (3, 6), "replays": (3, 6),
              "reaction_time_s": (14, 17), "like_pct": (5, 10), "share_pct": (2, 8),
              "churn_pct": (7, 8), "logins_per_day": (0.3, 0.8)},
    L.SevAD: {"watch_time_s": (10, 20), "skipped_s": (20, 40), "pauses": (4, 8), "replays": (4, 8),
              "reaction_time_s": (18, 22), "like_pct": (0, 5), "share_pct": (0, 3),
              "churn_pct": (12, 15), "logins_per_day": (0, 0.5)},
}


def _column_span(name):
    lows = [row[name][0] for row in BEHAVIOR_RANGES.values()]
    highs = [row[name][1] for row in BEHAVIOR_RANGES.values()]
    return min(lows), max(highs)


# Noise scale and clip bounds per behaviour field, taken over the whole column.
NOISE_WIDTH = {}
CLIP_BOUNDS = {}
for _name in BEHAVIOR_FIELDS:
    if _name in BINARY_FIELDS:
        NOISE_WIDTH[_name], CLIP_BOUNDS[_name] = 1.0, (0.0, 1.0)
        continue
    _lo, _hi = _column_span(_name)
    NOISE_WIDTH[_name] = float(_hi - _lo)
    CLIP_BOUNDS[_name] = (0.0, float(_hi))
del _name, _lo, _hi


@dataclass(frozen=True)
class BehaviorSample:
    watch_time_s: float
    skipped_s: float
    pauses: int
    replays: int
    reaction_time_s: float
    liked: int
    shared: int
    churn_pct: float
    logins_per_day: float

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in BEHAVIOR_FIELDS}

    @classmethod
    def from_dict(cls, d: Mapping) -> "BehaviorSample":
        kw = {}
        for f in BEHAVIOR_FIELDS:
            kw[f] = int(d[f]) if f in COUNT_FIELDS or f in BINARY_FIELDS else float(d[f])
        return cls(**kw)


# Reference coherence means, clean and noisy. ModAD/SevAD values are unanchored extrapolations.
COHERENCE_MEANS = {
    "clean": {L.Healthy: 0.932, L.MCI: 0.878, L.EarlyAD: 0.741, L.ModAD: 0.62, L.SevAD: 0.50},
    "noisy": {L.Healthy: 0.801, L.MCI: 0.421, L.EarlyAD: 0.506, L.ModAD: 0.40, L.SevAD: 0.30},
}
REFERENCE_ATTENUATION = {lab: COHERENCE_MEANS["noisy"][lab] / COHERENCE_MEANS["clean"][lab] for lab in L}


@dataclass(frozen=True)
class NoiseSpec:
    """Noise applied on top of clean sessions.

    ``sigma`` is the std of the Gaussian added to coherence, ``delta`` the
    half-width of the uniform behavioural noise (in units of each field's
    column span) and ``attenuation`` a per-label factor on coherence.
    ``scope="day"`` shares one draw per user-day across that day's sessions.
    """

    sigma: float = 0.0
    delta: float = 0.0
    attenuation: Mapping = field(default_factory=lambda: {lab: 1.0 for lab in L})
    scope: str = "record"

    def __post_init__(self):
        if self.sigma < 0 or self.delta < 0:
            raise ConfigError("sigma and delta must be non-negative")
        if self.scope not in ("record", "day"):
            raise ConfigError(f"unknown noise scope {self.scope!r}")
        att = {L(int(k)) if not isinstance(k, str) else L[k]: float(v) for k, v in self.attenuation.items()}
        for lab in L:
            att.setdefault(lab, 1.0)
        for lab, v in att.items():
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"attenuation for {lab.name} must lie in (0, 1]")
        object.__setattr__(self, "attenuation", att)

    @classmethod
    def clean(cls) -> "NoiseSpec":
        return cls(0.0, 0.0)

    @classmethod
    def attenuated(cls, sigma: float = 0.05, delta: float = 0.0) -> "NoiseSpec":
        """The condition whose coherence means match the reference noisy means."""
        return cls(sigma, delta, dict(REFERENCE_ATTENUATION))

    def scaled_to(self, sigma: float) -> "NoiseSpec":
        """Same noise shape at another level: delta keeps its ratio to sigma."""
        if sigma < 0:
            raise ConfigError("sigma must be non-negative")
        if self.sigma == 0:
            return replace(self, sigma=sigma)
        return replace(self, sigma=sigma, delta=self.delta * sigma / self.sigma)

    def is_identity(self) -> bool:
        return self.sigma == 0 and self.delta == 0 and all(v == 1.0 for v in self.attenuation.values())

    def to_dict(self) -> dict:
        return {"sigma": self.sigma, "delta": self.delta, "scope": self.scope,
                "attenuation": {lab.name: self.attenuation[lab] for lab in L}}

    @classmethod
    def from_dict(cls, d: Mapping) -> "NoiseSpec":
        att = d.get("attenuation")
        if att == "reference":
            att = dict(REFERENCE_ATTENUATION)
        return cls(float(d.get("sigma", 0.0)), float(d.get("delta", 0.0)),
                   att if att is not None else {lab: 1.0 for lab in L},
                   d.get("scope", "record"))


def sample_behaviors(label: CognitiveLabel, video: VideoMetadata | None, rng,
                     clip_to_duration: bool = True) -> BehaviorSample:
    """Draw one interaction's behaviour from the label's behaviour ranges."""
    row = BEHAVIOR_RANGES[label]
    wt = rng.uniform(*row["watch_time_s"])
    if clip_to_duration and video is not None:
        wt = min(wt, float(video.duration_s))
    skipped = rng.uniform(*row["skipped_s"])
    pauses = rng.randint(*row["pauses"])
    replays = rng.randint(*row["replays"])
    react = rng.uniform(*row["reaction_time_s"])
    p_like = rng.uniform(*row["like_pct"]) / 100.0
    p_share = rng.uniform(*row["share_pct"]) / 100.0
    liked = int(rng.random() < p_like)
    shared = int(rng.random() < p_share)
    churn = rng.uniform(*row["churn_pct"])
    logins = rng.uniform(*row["logins_per_day"])
    return BehaviorSample(wt, skipped, pauses, replays, react, liked, shared, churn, logins)


def sessions_today(label: CognitiveLabel, rng) -> tuple[int, float]:
    """Number of sessions on a day and the day's login rate.

    The rate is uniform in the label's logins row; the count is its integer part
    plus a Bernoulli on the fractional part, so the mean count equals the rate.
    """
    rate = rng.uniform(*BEHAVIOR_RANGES[label]["logins_per_day"])
    whole = math.floor(rate)
    return whole + (1 if rng.random() < rate - whole else 0), rate


def _truncnorm_mean(loc, scale, lo=0.0, hi=1.0):
    a = (lo - loc) / scale
    b = (hi - loc) / scale
    phi = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    Phi = lambda x: 0.5 * (1 + math.erf(x / math.sqrt(2)))
    z = Phi(b) - Phi(a)
    return loc + scale * (phi(a) - phi(b)) / z


_LOC_CACHE: dict = {}


def truncnorm_loc_for_mean(target: float, scale: float) -> float:
    """Location of a [0, 1]-truncated normal whose mean equals ``target``."""
    key = (target, scale)
    if key not in _LOC_CACHE:
        lo, hi = target - 10 * scale, target + 10 * scale
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _truncnorm_mean(mid, scale) < target:
                lo = mid
            else:
                hi = mid
        _LOC_CACHE[key] = 0.5 * (lo + hi)
    return _LOC_CACHE[key]


def sample_coherence(label: CognitiveLabel, mode: str, rng, scale: float = 0.05) -> float:
    """Parametric coherence draw whose mean is the reference value for ``mode``."""
    if mode not in COHERENCE_MEANS:
        raise InputError(f"unknown coherence mode {mode!r}")
    mu = COHERENCE_MEANS[mode][label]
    if scale == 0:
        return mu
    loc = truncnorm_loc_for_mean(mu, scale)
    while True:
        x = rng.gauss(loc, scale)
        if 0.0 <= x <= 1.0:
            return x


def coherence_drift(baseline_coherence: float, day_coherence: float, epsilon: float = 0.0) -> float:
    """Drop of a day's coherence below the personal baseline."""
    return baseline_coherence - (day_coherence + epsilon)


def _clip(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def noisy_coherence(coherence: float, spec: NoiseSpec, label: CognitiveLabel, eps: float) -> float:
    return _clip(spec.attenuation[label] * coherence + eps, 0.0, 1.0)


def perturb_behaviors(sample: BehaviorSample, etas: Mapping[str, float],
                      duration_s: float | None = None) -> BehaviorSample:
    """Shift each field by ``eta * NOISE_WIDTH`` and clip; ``etas`` are the raw uniform draws."""
    kw = {}
    for name in BEHAVIOR_FIELDS:
        lo, hi = CLIP_BOUNDS[name]
        if name == "watch_time_s" and duration_s is not None:
            hi = float(duration_s)
        value = _clip(getattr(sample, name) + etas[name] * NOISE_WIDTH[name], lo, hi)
        if name in COUNT_FIELDS or name in BINARY_FIELDS:
            value = int(math.floor(value + 0.5))
        kw[name] = value
    return BehaviorSample(**kw)


def draw_noise(spec: NoiseSpec, rng) -> tuple[float, dict]:
    """One coherence epsilon and one uniform eta per behaviour field."""
    eps = rng.gauss(0.0, spec.sigma) if spec.sigma > 0 else 0.0
    if spec.delta > 0:
        etas = {name: rng.uniform(-spec.delta, spec.delta) for name in BEHAVIOR_FIELDS}
    else:
        etas = dict.fromkeys(BEHAVIOR_FIELDS, 0.0)
    return eps, etas


def inject_noise(sample: BehaviorSample, coherence: float, spec: NoiseSpec,
                 label: CognitiveLabel, rng, duration_s: float | None = None) -> tuple[BehaviorSample, float]:
    if spec.is_identity():
        return sample, coherence
    eps, etas = draw_noise(spec, rng)
    return perturb_behaviors(sample, etas, duration_s), noisy_coherence(coherence, spec, label, eps)


LOW_LIKER_SUPPRESSION = 0.7
SLOW_VIEWER_FACTOR = 1.5
IMPULSIVE_EXTRA_REPLAYS = 3


def apply_confound(sample: BehaviorSample, kinds: Iterable[ConfoundKind],
                   video: VideoMetadata, rng=None) -> BehaviorSample:
    kinds = set(kinds)
    if not kinds:
        return sample
    out = sample
    if ConfoundKind.SlowViewer in kinds:
        out = replace(out, watch_time_s=min(out.watch_time_s * SLOW_VIEWER_FACTOR, float(video.duration_s)))
    if ConfoundKind.ImpulsiveReplayer in kinds:
        out = replace(out, replays=out.replays + IMPULSIVE_EXTRA_REPLAYS)
    if ConfoundKind.LowLiker in kinds and out.liked:
        if rng is None:
            raise InputError("LowLiker needs an rng")
        if rng.random() < LOW_LIKER_SUPPRESSION:
            out = replace(out, liked=0)
    return out


EVENT_TYPES = ("pause", "skip", "replay", "like", "share")


def event_counts(sample: BehaviorSample) -> dict:
    """Engagement events in one interaction; any skipped time counts as one skip."""
    return {"pause": sample.pauses, "skip": int(sample.skipped_s > 0), "replay": sample.replays,
            "like": sample.liked, "share": sample.shared}


def behavioral_entropy(event_counts: Mapping[str, float]) -> float:
    """Shannon entropy (nats) of the event-type distribution; 0 log 0 = 0."""
    unknown = set(event_counts) - set(EVENT_TYPES)
    if unknown:
        raise InputError(f"unknown event types {sorted(unknown)}")
    counts = [float(event_counts.get(k, 0)) for k in EVENT_TYPES]
    if any(c < 0 for c in counts):
        raise InputError("event counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise DegenerateInputError("entropy of an empty event distribution")
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log(p)
    return max(0.0, h)


def engagement_decay(watch_series: Sequence[tuple[float, float]]) -> tuple[list[float], float]:
    """Ratios to the first point and the rate of ``ln D = -lambda d`` by least squares
    through the origin, with ``d`` measured from the first day."""
    if len(watch_series) < 2:
        raise InputError("engagement_decay needs at least two points")
    d0, t0 = watch_series[0]
    if t0 <= 0:
        raise DegenerateInputError("baseline watch time is zero")
    ratios = [t / t0 for _, t in watch_series]
    xs, ys = [], []
    for (d, _), r in zip(watch_series[1:], ratios[1:]):
        if r > 0:
            xs.append(d - d0)
            ys.append(math.log(r))
    sxx = sum(x * x for x in xs)
    if not xs or sxx == 0:
        raise DegenerateInputError("no positive ratios to fit")
    lam = -sum(x * y for x, y in zip(xs, ys)) / sxx
    return ratios, lam


def least_squares_slope(x: Sequence[float], y: Sequence[float]) -> float:
    n = len(x)
    if n < 2:
        return 0.0
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    if sxx == 0:
        return 0.0
    return sum((a - mx) * (b - my) for a, b in zip(x, y)) / sxx


@dataclass(frozen=True)
class FeatureVector:
    coherence_mean: float
    semantic_drift: float
    drift_slope: float
    disfluency_freq: float
    behavioral_entropy: float
    decay_ratio: float
    watch_time_s: float
    skipped_s: float
    pauses: float
    replays: float
    reaction_time_s: float
    like_rate: float
    share_rate: float
    churn_pct: float
    logins_per_day: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in FEATURE_NAMES], dtype=float)


FEATURE_NAMES = tuple(f.name for f in fields(FeatureVector))

MODALITIES = {
    "coherence": ("coherence_mean", "semantic_drift", "drift_slope"),
    "disfluency": ("disfluency_freq",),
    "behavior": ("behavioral_entropy", "decay_ratio", "watch_time_s", "skipped_s", "pauses",
                 "replays", "reaction_time_s", "like_rate", "share_rate", "churn_pct", "logins_per_day"),
}
MODALITIES["language"] = MODALITIES["coherence"] + MODALITIES["disfluency"]


def modality_mask(modalities: Iterable[str]) -> np.ndarray:
    """Boolean mask over FEATURE_NAMES for the union of the given modality groups."""
    wanted = set()
    for m in modalities:
        if m not in MODALITIES:
            raise ConfigError(f"unknown modality {m!r}")
        wanted.update(MODALITIES[m])
    if not wanted:
        raise ConfigError("at least one modality is required")
    return np.array([name in wanted for name in FEATURE_NAMES])


@dataclass(frozen=True)
class Baseline:
    """A user's reference values from the first baseline days."""

    coherence: float
    watch_ratio: float
    embedding: np.ndarray | None = None


def baseline_from_sessions(sessions, durations: Mapping[int, float], days: int = 5) -> Baseline:
    """Baseline from the user's first active day (coherence) and days 1..``days``
    (normalised watch time, embedding). ``durations`` maps video_id to seconds."""
    from .textmetrics import embed

    early = [s for s in sessions if s.day <= days]
    if not early:
        early = [s for s in sessions if s.day == min(x.day for x in sessions)]
    first_day = min(s.day for s in early)
    first = [s.coherence_noisy for s in early if s.day == first_day]
    ratios = [s.behaviors.watch_time_s / durations[s.video_id] for s in early]
    vecs = [embed(s.summary.text) for s in early]
    emb = np.mean(vecs, axis=0) if vecs else None
    return Baseline(sum(first) / len(first), sum(ratios) / len(ratios), emb)


def fuse(sessions: Sequence, baseline: Baseline, durations: Mapping[int, float]) -> FeatureVector:
    """Aggregate one user's sessions in a window into a FeatureVector.

    ``sessions`` need ``day``, ``video_id``, ``coherence_noisy``, ``summary`` and
    ``behaviors`` attributes; ``durations`` maps video_id to seconds.
    """
    if not sessions:
        raise InputError("window contains no sessions")
    n = len(sessions)
    coh = [s.coherence_noisy for s in sessions]
    coherence_mean = sum(coh) / n
    by_day: dict = {}
    for s in sessions:
        by_day.setdefault(s.day, []).append(s.coherence_noisy)
    days = sorted(by_day)
    slope = least_squares_slope(days, [sum(by_day[d]) / len(by_day[d]) for d in days])
    sentences = sum(s.summary.sentence_count for s in sessions)
    disfl = sum(s.summary.disfluency_count for s in sessions)
    events = dict.fromkeys(EVENT_TYPES, 0)
    for s in sessions:
        for k, v in event_counts(s.behaviors).items():
            events[k] += v
    entropy = behavioral_entropy(events) if sum(events.values()) > 0 else 0.0
    watch_ratio = sum(s.behaviors.watch_time_s / durations[s.video_id] for s in sessions) / n
    mean = lambda name: sum(getattr(s.behaviors, name) for s in sessions) / n
    return FeatureVector(
        coherence_mean=coherence_mean,
        semantic_drift=coherence_drift(baseline.coherence, coherence_mean),
        drift_slope=slope,
        disfluency_freq=disfl / sentences,
        behavioral_entropy=entropy,
        decay_ratio=watch_ratio / baseline.watch_ratio if baseline.watch_ratio > 0 else 0.0,
        watch_time_s=mean("watch_time_s"),
        skipped_s=mean("skipped_s"),
        pauses=mean("pauses"),
        replays=mean("replays"),
        reaction_time_s=mean("reaction_time_s"),
        like_rate=mean("liked"),
        share_rate=mean("shared"),
        churn_pct=mean("churn_pct"),
        logins_per_day=mean("logins_per_day"),
    )
