"""Detection days from daily probabilities, ERDE, time-to-detection and
early precision/recall."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

from .domain import CognitiveLabel
from .errors import InputError


@dataclass(frozen=True)
class DetectionPolicy:
    """A user is flagged on the first day that closes a run of ``persistence_m``
    consecutive days with target probability at or above the threshold."""

    probability_threshold: float = 0.5
    persistence_m: int = 3
    target_label: CognitiveLabel = CognitiveLabel.MCI

    def __post_init__(self):
        if not 0.0 < self.probability_threshold < 1.0:
            raise InputError("probability_threshold must lie in (0, 1)")
        if self.persistence_m < 1:
            raise InputError("persistence_m must be >= 1")

    def to_dict(self) -> dict:
        return {"probability_threshold": self.probability_threshold,
                "persistence_m": self.persistence_m, "target_label": self.target_label.name}


@dataclass(frozen=True)
class DetectionOutcome:
    user_id: int
    detected: bool
    detection_day: int | None = None
    true_onset_day: int | None = None

    def __post_init__(self):
        if self.detected != (self.detection_day is not None):
            raise InputError("detected must be true exactly when detection_day is set")
        if self.detection_day is not None and self.detection_day < 1:
            raise InputError("detection_day must be >= 1")

    @property
    def lead_or_lag_days(self) -> int | None:
        if self.detection_day is None or self.true_onset_day is None:
            return None
        return self.detection_day - self.true_onset_day

    @property
    def at_risk(self) -> bool:
        return self.true_onset_day is not None


def first_detection_day(daily_probs: Sequence[float | None], policy: DetectionPolicy) -> int | None:
    """Day (1-based) ending the first qualifying run; days without a prediction break runs."""
    run = 0
    for day, p in enumerate(daily_probs, start=1):
        if p is not None and not 0.0 <= p <= 1.0:
            raise InputError(f"probability {p} on day {day} outside [0, 1]")
        run = run + 1 if p is not None and p >= policy.probability_threshold else 0
        if run >= policy.persistence_m:
            return day
    return None


def erde(detection_day: int | None, o: float, miss_cost: float = 1.0) -> float:
    """``miss_cost`` without a detection, else ``1 - exp(-d / o)``."""
    if o <= 0:
        raise InputError("observation window o must be positive")
    if not 0.0 <= miss_cost <= 1.0:
        raise InputError("miss_cost must lie in [0, 1]")
    if detection_day is None:
        return miss_cost
    if detection_day <= 0:
        raise InputError("detection day must be positive")
    return 1.0 - math.exp(-detection_day / o)


def mean_erde(outcomes: Sequence[DetectionOutcome], o: float, miss_cost: float = 1.0,
              false_early_cost: float | None = None) -> float:
    """Mean ERDE over at-risk users (those whose schedule reaches the target).

    With ``false_early_cost`` set, a flag raised before the user's onset day is
    a false alarm and costs that amount instead of the (small) early-day value.
    """
    eligible = [x for x in outcomes if x.at_risk]
    if not eligible:
        raise InputError("no at-risk users to score")
    if false_early_cost is not None and not 0.0 <= false_early_cost <= 1.0:
        raise InputError("false_early_cost must lie in [0, 1]")

    def cost(x):
        if false_early_cost is not None and false_early_lead(x) is not None:
            return false_early_cost
        return erde(x.detection_day, o, miss_cost)

    return math.fsum(cost(x) for x in eligible) / len(eligible)


def time_to_detection(outcome: DetectionOutcome) -> int | None:
    """Days from onset to detection; None when undetected or flagged before onset."""
    lag = outcome.lead_or_lag_days
    if lag is None or lag < 0:
        return None
    return lag


def false_early_lead(outcome: DetectionOutcome) -> int | None:
    """How many days before onset a premature detection fired."""
    lag = outcome.lead_or_lag_days
    return -lag if lag is not None and lag < 0 else None


def early_precision_recall(outcomes: Sequence[DetectionOutcome], k: int) -> tuple[float | None, float]:
    """Precision and recall of "flagged by day k" against at-risk status."""
    if k < 1:
        raise InputError("k must be >= 1")
    flagged = [x for x in outcomes if x.detected and x.detection_day <= k]
    at_risk = [x for x in outcomes if x.at_risk]
    hits = sum(1 for x in flagged if x.at_risk)
    precision = hits / len(flagged) if flagged else None
    recall = hits / len(at_risk) if at_risk else 0.0
    return precision, recall


def detection_curve(outcomes: Sequence[DetectionOutcome], total_days: int) -> list[tuple[int, float]]:
    """Cumulative fraction of at-risk users detected by each day."""
    at_risk = [x for x in outcomes if x.at_risk]
    n = len(at_risk)
    per_day = [0] * (total_days + 2)
    for x in at_risk:
        if x.detected and x.detection_day <= total_days:
            per_day[x.detection_day] += 1
    curve = []
    seen = 0
    for day in range(1, total_days + 1):
        seen += per_day[day]
        curve.append((day, seen / n if n else 0.0))
    return curve


def write_curve_csv(curve, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "cumulative_fraction"])
        for day, frac in curve:
            w.writerow([day, f"{frac:.4f}"])


def write_erde_csv(rows, path) -> None:
    """``rows`` are (model, o, erde) triples."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "o", "erde"])
        for model, o, value in rows:
            w.writerow([model, o, f"{value:.4f}"])
