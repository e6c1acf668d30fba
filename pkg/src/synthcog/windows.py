"""Columnar session table, vectorised noise and sliding-window feature matrices.

``window_features`` computes the same values as :func:`features.fuse` applied
to every (user, end day) window, but with per-day sums and cumulative sums
instead of Python loops.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .domain import CognitiveLabel, derive_seed
from .errors import InputError
from .features import (BEHAVIOR_FIELDS, BINARY_FIELDS, CLIP_BOUNDS, COUNT_FIELDS, FEATURE_NAMES,
                       NOISE_WIDTH, NoiseSpec)

DEFAULT_WINDOW = 7
BASELINE_DAYS = 5

_F = {name: i for i, name in enumerate(BEHAVIOR_FIELDS)}


@dataclass
class SessionTable:
    """One row per session record; ``behaviors`` columns follow BEHAVIOR_FIELDS."""

    user_index: np.ndarray      # position of the user in ``user_ids``
    day: np.ndarray
    label: np.ndarray
    coherence: np.ndarray
    sentences: np.ndarray
    disfluencies: np.ndarray
    behaviors: np.ndarray       # (n, 9)
    duration: np.ndarray
    user_ids: np.ndarray
    profiles: list              # ProgressionProfileKind per user
    total_days: int

    def __len__(self):
        return self.day.size

    @classmethod
    def from_records(cls, records: Sequence, durations: Mapping[int, float], users: Sequence,
                     total_days: int, noisy: bool = False) -> "SessionTable":
        """Build from SessionRecords. ``noisy`` selects ``coherence_noisy`` over
        ``coherence_clean``; behaviours are taken as stored."""
        uid_pos = {u.user_id: i for i, u in enumerate(users)}
        n = len(records)
        ui = np.empty(n, dtype=np.int64)
        day = np.empty(n, dtype=np.int64)
        lab = np.empty(n, dtype=np.int64)
        coh = np.empty(n)
        sent = np.empty(n)
        dis = np.empty(n)
        beh = np.empty((n, len(BEHAVIOR_FIELDS)))
        dur = np.empty(n)
        for i, r in enumerate(records):
            try:
                ui[i] = uid_pos[r.user_id]
            except KeyError:
                raise InputError(f"record for unknown user {r.user_id}") from None
            day[i] = r.day
            lab[i] = int(r.label)
            coh[i] = r.coherence_noisy if noisy else r.coherence_clean
            sent[i] = r.summary.sentence_count
            dis[i] = r.summary.disfluency_count
            b = r.behaviors
            beh[i] = [getattr(b, f) for f in BEHAVIOR_FIELDS]
            dur[i] = durations[r.video_id]
        return cls(ui, day, lab, coh, sent, dis, beh, dur,
                   np.array([u.user_id for u in users], dtype=np.int64),
                   [u.profile_kind for u in users], total_days)

    def subset_users(self, keep_user_ids) -> "SessionTable":
        keep = np.isin(self.user_ids, np.asarray(list(keep_user_ids)))
        pos = np.flatnonzero(keep)
        remap = np.full(self.user_ids.size, -1)
        remap[pos] = np.arange(pos.size)
        rows = keep[self.user_index]
        return SessionTable(remap[self.user_index[rows]], self.day[rows], self.label[rows],
                            self.coherence[rows], self.sentences[rows], self.disfluencies[rows],
                            self.behaviors[rows], self.duration[rows], self.user_ids[pos],
                            [self.profiles[i] for i in pos], self.total_days)


def apply_noise(table: SessionTable, spec: NoiseSpec, seed: int) -> SessionTable:
    """Noisy copy of a clean table: attenuation and Gaussian jitter on coherence,
    uniform shifts scaled by column span on behaviours, then clipping and rounding."""
    if spec.is_identity():
        return table
    gen = np.random.Generator(np.random.PCG64(seed))
    n = len(table)
    if spec.scope == "day":
        key = table.user_index * (table.total_days + 1) + table.day
        _, inv = np.unique(key, return_inverse=True)
        m = int(inv.max()) + 1 if n else 0
    else:
        inv = np.arange(n)
        m = n
    eps = gen.normal(0.0, spec.sigma, m)[inv] if spec.sigma > 0 else np.zeros(n)
    att = np.array([spec.attenuation[CognitiveLabel(k)] for k in range(len(CognitiveLabel))])
    coh = np.clip(att[table.label] * table.coherence + eps, 0.0, 1.0)

    beh = table.behaviors
    if spec.delta > 0:
        etas = gen.uniform(-spec.delta, spec.delta, (m, len(BEHAVIOR_FIELDS)))[inv]
        widths = np.array([NOISE_WIDTH[f] for f in BEHAVIOR_FIELDS])
        beh = beh + etas * widths
        lo = np.array([CLIP_BOUNDS[f][0] for f in BEHAVIOR_FIELDS])
        hi = np.array([CLIP_BOUNDS[f][1] for f in BEHAVIOR_FIELDS])
        beh = np.clip(beh, lo, hi)
        w = _F["watch_time_s"]
        beh[:, w] = np.minimum(beh[:, w], table.duration)
        for f in COUNT_FIELDS | BINARY_FIELDS:
            beh[:, _F[f]] = np.floor(beh[:, _F[f]] + 0.5)
    return replace(table, coherence=coh, behaviors=beh)


@dataclass
class WindowSet:
    X: np.ndarray               # (m, len(FEATURE_NAMES))
    y: np.ndarray               # label on the window's end day
    user_ids: np.ndarray
    end_day: np.ndarray
    n_sessions: np.ndarray
    feature_names: tuple = FEATURE_NAMES

    def __len__(self):
        return self.y.size

    def select_users(self, user_ids) -> "WindowSet":
        rows = np.isin(self.user_ids, np.asarray(list(user_ids)))
        return WindowSet(self.X[rows], self.y[rows], self.user_ids[rows], self.end_day[rows],
                         self.n_sessions[rows], self.feature_names)

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.feature_names.index(name)]


def _rolling(a: np.ndarray, w: int) -> np.ndarray:
    """Sums over the trailing ``w`` days along axis 1 (shorter at the start)."""
    c = np.cumsum(a, axis=1)
    out = c.copy()
    out[:, w:] -= c[:, :-w]
    return out


def _per_day(table: SessionTable, values: np.ndarray) -> np.ndarray:
    U, T = table.user_ids.size, table.total_days
    key = table.user_index * T + (table.day - 1)
    return np.bincount(key, weights=values, minlength=U * T).reshape(U, T)


def window_features(table: SessionTable, labels_by_day: np.ndarray, window: int = DEFAULT_WINDOW,
                    baseline_days: int = BASELINE_DAYS) -> WindowSet:
    """Feature rows for every (user, end day) whose trailing window holds a session.

    ``labels_by_day`` is (n_users, total_days) with the ground-truth label per day.
    """
    if window < 1:
        raise InputError("window must be >= 1")
    U, T = table.user_ids.size, table.total_days
    ones = np.ones(len(table))
    n_day = _per_day(table, ones)
    coh_day = _per_day(table, table.coherence)
    active = n_day > 0
    mean_day = np.divide(coh_day, n_day, out=np.zeros_like(coh_day), where=active)

    # baselines: coherence of the first active day, watch ratio over the first days
    first = np.where(active.any(axis=1), active.argmax(axis=1), 0)
    base_coh = mean_day[np.arange(U), first]
    ratio = table.behaviors[:, _F["watch_time_s"]] / table.duration
    ratio_day = _per_day(table, ratio)
    early_n = n_day[:, :baseline_days].sum(axis=1)
    early_r = ratio_day[:, :baseline_days].sum(axis=1)
    first_r = ratio_day[np.arange(U), first] / np.maximum(n_day[np.arange(U), first], 1)
    base_ratio = np.where(early_n > 0, early_r / np.maximum(early_n, 1), first_r)

    S_n = _rolling(n_day, window)
    has = S_n > 0
    safe_n = np.where(has, S_n, 1.0)
    S_coh = _rolling(coh_day, window)
    coherence_mean = S_coh / safe_n

    days = np.arange(1, T + 1, dtype=float)[None, :]
    A = _rolling(active.astype(float), window)
    Sx = _rolling(active * days, window)
    Sxx = _rolling(active * days * days, window)
    Sy = _rolling(mean_day, window)
    Sxy = _rolling(mean_day * days, window)
    den = A * Sxx - Sx * Sx
    num = A * Sxy - Sx * Sy
    slope = np.divide(num, den, out=np.zeros_like(num), where=(A >= 2) & (np.abs(den) > 1e-9))

    S_sent = _rolling(_per_day(table, table.sentences), window)
    S_dis = _rolling(_per_day(table, table.disfluencies), window)
    disfl = np.divide(S_dis, S_sent, out=np.zeros_like(S_dis), where=S_sent > 0)

    b = table.behaviors
    events = [b[:, _F["pauses"]], (b[:, _F["skipped_s"]] > 0).astype(float), b[:, _F["replays"]],
              b[:, _F["liked"]], b[:, _F["shared"]]]
    S_ev = np.stack([_rolling(_per_day(table, e), window) for e in events])
    total = S_ev.sum(axis=0)
    p = np.divide(S_ev, total, out=np.zeros_like(S_ev), where=total > 0)
    logp = np.log(np.where(p > 0, p, 1.0))
    entropy = np.maximum(0.0, -(p * logp).sum(axis=0))

    S_ratio = _rolling(ratio_day, window)
    decay = np.divide(S_ratio / safe_n, base_ratio[:, None], out=np.zeros_like(S_ratio),
                      where=base_ratio[:, None] > 0)

    means = {f: _rolling(_per_day(table, b[:, _F[f]]), window) / safe_n for f in BEHAVIOR_FIELDS}
    cols = {
        "coherence_mean": coherence_mean,
        "semantic_drift": base_coh[:, None] - coherence_mean,
        "drift_slope": slope,
        "disfluency_freq": disfl,
        "behavioral_entropy": entropy,
        "decay_ratio": decay,
        "watch_time_s": means["watch_time_s"],
        "skipped_s": means["skipped_s"],
        "pauses": means["pauses"],
        "replays": means["replays"],
        "reaction_time_s": means["reaction_time_s"],
        "like_rate": means["liked"],
        "share_rate": means["shared"],
        "churn_pct": means["churn_pct"],
        "logins_per_day": means["logins_per_day"],
    }
    uu, dd = np.nonzero(has)
    X = np.stack([cols[name][uu, dd] for name in FEATURE_NAMES], axis=1)
    return WindowSet(X, labels_by_day[uu, dd], table.user_ids[uu], dd + 1, S_n[uu, dd].astype(int))


def labels_by_day(users: Sequence, total_days: int) -> np.ndarray:
    from .progression import build_schedule

    out = np.empty((len(users), total_days), dtype=np.int64)
    for i, u in enumerate(users):
        out[i] = [int(lab) for _, lab in build_schedule(u, total_days)]
    return out


def split_users(users: Sequence, validation_fraction: float = 0.2, seed: int = 0) -> tuple[list, list]:
    """Per-profile shuffled split of user ids into (train, validation)."""
    if not 0.0 < validation_fraction < 1.0:
        raise InputError("validation_fraction must lie in (0, 1)")
    by_kind: dict = {}
    for u in users:
        by_kind.setdefault(u.profile_kind.value, []).append(u.user_id)
    rng = random.Random(derive_seed(seed, "split"))
    train, val = [], []
    for kind in sorted(by_kind):
        ids = sorted(by_kind[kind])
        rng.shuffle(ids)
        k = int(round(validation_fraction * len(ids)))
        if len(ids) > 1:
            k = min(max(k, 1), len(ids) - 1)
        val.extend(ids[:k])
        train.extend(ids[k:])
    return sorted(train), sorted(val)
