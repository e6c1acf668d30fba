"""Template summaries and QA outcomes with label-conditioned degradation."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

from .domain import CognitiveLabel, VideoMetadata, load_corpus
from .errors import ConfigError

L = CognitiveLabel


@dataclass(frozen=True)
class DegradationPolicy:
    filler_rate: float = 0.0
    vagueness_rate: float = 0.0
    offtopic_rate: float = 0.0

    def __post_init__(self):
        for name in ("filler_rate", "vagueness_rate", "offtopic_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name}={value} outside [0, 1]")

    def as_tuple(self):
        return (self.filler_rate, self.vagueness_rate, self.offtopic_rate)


# MCI and EarlyAD follow the reported frequencies; ModAD/SevAD extrapolate.
DEFAULT_POLICIES = {
    L.Healthy: DegradationPolicy(0.00, 0.00, 0.00),
    L.MCI: DegradationPolicy(0.10, 0.10, 0.10),
    L.EarlyAD: DegradationPolicy(0.35, 0.30, 0.35),
    L.ModAD: DegradationPolicy(0.50, 0.45, 0.50),
    L.SevAD: DegradationPolicy(0.65, 0.60, 0.65),
}

DEFAULT_P_CORRECT = {
    L.Healthy: 0.95,
    L.MCI: 0.75,
    L.EarlyAD: 0.50,
    L.ModAD: 0.35,
    L.SevAD: 0.20,
}

QUESTION_TYPES = ("factual", "emotional", "sequencing")


def check_monotone(policies: Mapping[CognitiveLabel, DegradationPolicy]) -> None:
    ordered = [policies[lab].as_tuple() for lab in sorted(policies)]
    for lo, hi in zip(ordered, ordered[1:]):
        if any(b < a for a, b in zip(lo, hi)):
            raise ConfigError("degradation rates must not decrease with severity")


@dataclass(frozen=True)
class Summary:
    text: str
    sentence_count: int
    disfluency_count: int
    source_video_id: int
    offtopic_count: int = 0

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "sentence_count": self.sentence_count,
            "disfluency_count": self.disfluency_count,
            "source_video_id": self.source_video_id,
            "offtopic_count": self.offtopic_count,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Summary":
        return cls(d["text"], int(d["sentence_count"]), int(d["disfluency_count"]),
                   int(d["source_video_id"]), int(d.get("offtopic_count", 0)))


@dataclass(frozen=True)
class QARecord:
    n_questions: int
    n_correct: int
    question_types: tuple

    def to_dict(self) -> dict:
        return {"n_questions": self.n_questions, "n_correct": self.n_correct,
                "question_types": list(self.question_types)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "QARecord":
        return cls(int(d["n_questions"]), int(d["n_correct"]), tuple(d["question_types"]))


class _Lexicon:
    """Lexicons plus the regexes used to recount injected tokens."""

    def __init__(self, corpus):
        self.fillers = list(corpus["_fillers"])
        self.vague = list(corpus["_vague"])
        self.offtopic = list(corpus["_offtopic"])
        self.offtopic_set = frozenset(self.offtopic)
        self.recap = list(corpus["_recap"])
        content = set()
        for cat_slots in corpus["_slots"].values():
            for words in cat_slots.values():
                content.update(words)
        self.content_words = frozenset(content)
        phrases = sorted(self.fillers + self.vague, key=len, reverse=True)
        self.phrase_re = re.compile(r"(?<!\w)(?:" + "|".join(re.escape(p) for p in phrases) + r")(?!\w)",
                                    re.IGNORECASE)


@lru_cache(maxsize=None)
def lexicon() -> _Lexicon:
    return _Lexicon(load_corpus())


_SENT_SPLIT = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    return [s for s in _SENT_SPLIT.split(text.strip()) if s]


def inject_disfluencies(sentences: Sequence[str], policy: DegradationPolicy, rng) -> tuple[list[str], int]:
    """Degrade each sentence in turn.

    A sentence is first replaced by an off-topic template with probability
    ``offtopic_rate``; surviving sentences have each content word swapped for a
    vague phrase with probability ``vagueness_rate`` and receive one filler
    (initial or medial slot) with probability ``filler_rate``. The returned
    count covers fillers and vague phrases, which are recoverable from the text.
    """
    lex = lexicon()
    out = []
    count = 0
    for sentence in sentences:
        if policy.offtopic_rate and rng.random() < policy.offtopic_rate:
            out.append(rng.choice(lex.offtopic))
            continue
        words = sentence.split(" ")
        if policy.vagueness_rate:
            for i, w in enumerate(words):
                core = w.rstrip(".,").lower()
                if core in lex.content_words and rng.random() < policy.vagueness_rate:
                    words[i] = rng.choice(lex.vague) + w[len(w.rstrip(".,")):]
                    count += 1
        if policy.filler_rate and rng.random() < policy.filler_rate:
            filler = rng.choice(lex.fillers)
            if len(words) > 2 and rng.random() < 0.5:
                pos = rng.randint(1, len(words) - 1)
                words.insert(pos, filler + ",")
            else:
                words[0] = words[0][:1].lower() + words[0][1:]
                words.insert(0, filler.capitalize() + ",")
            count += 1
        out.append(" ".join(words))
    return out, count


def count_disfluencies(text: str) -> tuple[int, int]:
    """Recount (filler + vague tokens, off-topic sentences) from generated text."""
    lex = lexicon()
    tokens = 0
    offtopic = 0
    for sentence in split_sentences(text):
        if sentence in lex.offtopic_set:
            offtopic += 1
        else:
            tokens += len(lex.phrase_re.findall(sentence))
    return tokens, offtopic


def _recap_sentence(video: VideoMetadata, rng) -> str:
    who, what, where = video.tags
    return rng.choice(lexicon().recap).format(who=who, what=what, where=where)


def generate_summary(video: VideoMetadata, label: CognitiveLabel,
                     policy: DegradationPolicy | None = None, rng=None,
                     sentence_range: tuple[int, int] = (1, 3)) -> Summary:
    if policy is None:
        policy = DEFAULT_POLICIES[label]
    lo, hi = sentence_range
    n = rng.randint(lo, hi)
    ref = split_sentences(video.reference_summary)
    if n <= len(ref):
        picked = sorted(rng.sample(range(len(ref)), n))
        sentences = [ref[i] for i in picked]
    else:
        sentences = list(ref)
        while len(sentences) < n:
            sentences.append(_recap_sentence(video, rng))
    degraded, count = inject_disfluencies(sentences, policy, rng)
    offtopic = sum(1 for s in degraded if s in lexicon().offtopic_set)
    return Summary(" ".join(degraded), len(degraded), count, video.video_id, offtopic)


def generate_qa(video: VideoMetadata, label: CognitiveLabel, rng,
                p_correct: float | None = None) -> QARecord:
    p = DEFAULT_P_CORRECT[label] if p_correct is None else p_correct
    n = rng.randint(2, 3)
    types = tuple(sorted(rng.sample(QUESTION_TYPES, n)))
    correct = sum(1 for _ in range(n) if rng.random() < p)
    return QARecord(n, correct, types)
