"""Transition-day sampling and the piecewise ground-truth label function."""
from __future__ import annotations

from .domain import CognitiveLabel, ProgressionProfileKind, TransitionDays, UserProfile
from .errors import ConfigError, InputError

K = ProgressionProfileKind
L = CognitiveLabel

# inclusive integer bounds per transition field
TRANSITION_BOUNDS = {
    K.MildProgressor: {"d1": (35, 45)},
    K.GradualDecliner: {"d3": (20, 30), "d4": (45, 55)},
    K.FastDecliner: {"d2": (25, 35), "d5": (60, 75)},
}

STARTING_LABEL = {
    K.StableHealthy: L.Healthy,
    K.MildProgressor: L.Healthy,
    K.GradualDecliner: L.Healthy,
    K.FastDecliner: L.MCI,
    K.StableMCI: L.MCI,
    K.StableEarlyAD: L.EarlyAD,
}

MIN_TOTAL_DAYS = 76


def sample_transition_days(kind: ProgressionProfileKind, total_days: int, rng) -> TransitionDays:
    bounds = TRANSITION_BOUNDS.get(kind, {})
    largest = max((hi for _, hi in bounds.values()), default=0)
    if total_days < largest:
        raise ConfigError(f"total_days={total_days} is shorter than the {kind.value} transition bound {largest}")
    # draws happen in field order so streams are stable
    return TransitionDays(**{name: rng.randint(lo, hi) for name, (lo, hi) in sorted(bounds.items())})


def _transition_or_never(value):
    return value if value is not None else float("inf")


def label_at(kind: ProgressionProfileKind, t: TransitionDays, d: int,
             total_days: int | None = None) -> CognitiveLabel:
    """Label on day ``d`` (1-based). Intervals are half-open: a transition day
    already carries the post-transition label."""
    if d < 1 or (total_days is not None and d > total_days):
        raise InputError(f"day {d} outside [1, {total_days}]")
    if kind is K.StableHealthy:
        return L.Healthy
    if kind is K.StableMCI:
        return L.MCI
    if kind is K.StableEarlyAD:
        return L.EarlyAD
    if kind is K.MildProgressor:
        return L.Healthy if d < _transition_or_never(t.d1) else L.MCI
    if kind is K.GradualDecliner:
        if d < _transition_or_never(t.d3):
            return L.Healthy
        return L.MCI if d < _transition_or_never(t.d4) else L.EarlyAD
    if kind is K.FastDecliner:
        if d < _transition_or_never(t.d2):
            return L.MCI
        return L.EarlyAD if d < _transition_or_never(t.d5) else L.ModAD
    raise InputError(f"unknown profile kind {kind!r}")


def build_schedule(user: UserProfile, total_days: int) -> list[tuple[int, CognitiveLabel]]:
    return [(d, label_at(user.profile_kind, user.transitions, d, total_days))
            for d in range(1, total_days + 1)]


def onset_day(user: UserProfile, target: CognitiveLabel, total_days: int) -> int | None:
    """First day the schedule reaches exactly ``target``; None if it never does."""
    for d, lab in build_schedule(user, total_days):
        if lab == target:
            return d
    return None
