"""Text similarity: hashed embeddings, coherence, BLEU and ROUGE-L.

All metrics share one tokenizer: Unicode lowercase, runs of word characters.
"""
from __future__ import annotations

import math
import re
import warnings
from collections import Counter
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import DegenerateInputError

DEFAULT_DIM = 256

_TOKEN_RE = re.compile(r"\w+")


class EmptyTextWarning(UserWarning):
    """A similarity metric received empty text and returned 0."""


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """L2-normalised hashed unigram+bigram term frequencies; empty text gives zeros."""
    vec = kernels.hashed_tf(tokenize(text), dim)
    norm = math.sqrt(float(vec @ vec))
    if norm > 0.0:
        vec /= norm
    return vec


@lru_cache(maxsize=4096)
def _cached_embedding(text: str, dim: int) -> np.ndarray:
    vec = embed(text, dim)
    vec.setflags(write=False)
    return vec


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = math.sqrt(float(a @ a))
    nb = math.sqrt(float(b @ b))
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cosine of a zero vector")
    c = float(a @ b) / (na * nb)
    return min(1.0, max(-1.0, c))


def coherence(summary, video, dim: int = DEFAULT_DIM) -> float:
    """Cosine similarity of a summary to its video's reference description."""
    text = summary.text if hasattr(summary, "text") else summary
    if not text.strip() or not video.reference_summary.strip():
        raise DegenerateInputError("coherence needs non-empty summary and reference")
    return cosine(embed(text, dim), _cached_embedding(video.reference_summary, dim))


def embedding_drift(day_embedding: np.ndarray, baseline_embedding: np.ndarray) -> float:
    """One minus cosine against the personal baseline embedding; lies in [0, 2]."""
    return 1.0 - cosine(day_embedding, baseline_embedding)


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, reference: str, max_n: int = 4) -> float:
    """Sentence BLEU with brevity penalty.

    Orders with zero clipped matches get add-one smoothing ``1 / (total + 1)``;
    orders for which the candidate has no n-grams are left out. Zero unigram
    precision yields 0.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand:
        warnings.warn("empty candidate in bleu", EmptyTextWarning, stacklevel=2)
        return 0.0
    if not ref:
        return 0.0
    log_sum = 0.0
    orders = 0
    for n in range(1, max_n + 1):
        cand_ng = _ngrams(cand, n)
        total = sum(cand_ng.values())
        if total == 0:
            break
        ref_ng = _ngrams(ref, n)
        matches = sum(min(c, ref_ng[g]) for g, c in cand_ng.items())
        if matches == 0:
            if n == 1:
                return 0.0
            p = 1.0 / (total + 1)
        else:
            p = matches / total
        log_sum += math.log(p)
        orders += 1
    c, r = len(cand), len(ref)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum / orders)


def rouge_l(candidate: str, reference: str) -> float:
    """LCS-based F1 (beta = 1)."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        warnings.warn("empty text in rouge_l", EmptyTextWarning, stacklevel=2)
        return 0.0
    lcs = kernels.lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    p = lcs / len(cand)
    r = lcs / len(ref)
    return 2 * p * r / (p + r)
