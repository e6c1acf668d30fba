import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from synthcog.config import SimConfig
from synthcog.domain import build_catalog
from synthcog.errors import DegenerateInputError
from synthcog.textgen import Summary
from synthcog.textmetrics import (EmptyTextWarning, bleu, coherence, cosine, embed, rouge_l,
                                  embedding_drift, tokenize)

words = st.text(alphabet="abcdefgh ", min_size=0, max_size=40)


def test_tokenize():
    assert tokenize("The Dog, the cat!") == ["the", "dog", "the", "cat"]


def test_embed_deterministic_and_unit():
    e = embed("the quick brown fox")
    assert np.array_equal(e, embed("the quick brown fox"))
    assert math.isclose(cosine(e, e), 1.0, abs_tol=1e-12)
    assert not embed("").any()


def test_disjoint_tokens_near_orthogonal():
    # with a large dimension two 2-token texts almost surely do not collide
    a, b = embed("alpha beta", 1 << 20), embed("gamma delta", 1 << 20)
    assert abs(cosine(a, b)) < 1e-12


def test_coherence_reference_is_one():
    video = build_catalog(SimConfig(), 1)[0]
    assert math.isclose(coherence(Summary(video.reference_summary, 2, 0, 0), video), 1.0, abs_tol=1e-12)


def test_coherence_off_topic_near_zero():
    video = build_catalog(SimConfig(), 1)[0]
    assert coherence("zzq yyx wwv", video) < 0.2


def test_coherence_empty_raises():
    video = build_catalog(SimConfig(), 1)[0]
    with pytest.raises(DegenerateInputError):
        coherence("  ", video)


def test_embedding_drift_fixed_points():
    v = np.array([1.0, 0.0])
    assert embedding_drift(v, v) == 0.0
    assert math.isclose(embedding_drift(v, np.array([0.0, 1.0])), 1.0)
    assert math.isclose(embedding_drift(v, -v), 2.0)


def test_bleu_identity_and_disjoint():
    assert math.isclose(bleu("a b c d e", "a b c d e"), 1.0)
    assert bleu("a b", "c d") == 0.0


def test_bleu_smoothed_fixture():
    # p1..p4 = 3/4, 2/3, 1/2, smoothed 1/2; equal lengths so no brevity penalty
    assert math.isclose(bleu("a b c d", "a b c e"), 2 ** -0.75, rel_tol=0, abs_tol=1e-12)


def test_bleu_brevity_penalty():
    # exact prefix: all precisions 1, penalty exp(1 - 6/3)
    assert math.isclose(bleu("a b c", "a b c d e f"), math.exp(-1.0), abs_tol=1e-12)


def test_rouge_fixtures():
    assert rouge_l("the dog", "the dog") == 1.0
    assert math.isclose(rouge_l("the dog", "the cat"), 0.5)
    assert rouge_l("a b", "c d") == 0.0


def test_empty_text_warns():
    with pytest.warns(EmptyTextWarning):
        assert rouge_l("", "a") == 0.0
    with pytest.warns(EmptyTextWarning):
        assert bleu("", "a") == 0.0


@given(words, words)
def test_metric_bounds(a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyTextWarning)
        assert 0.0 <= bleu(a, b) <= 1.0 + 1e-12
        assert 0.0 <= rouge_l(a, b) <= 1.0
    if tokenize(a) and tokenize(b):
        c = cosine(embed(a), embed(b))
        assert -1.0 <= c <= 1.0
        assert 0.0 <= embedding_drift(embed(a), embed(b)) <= 2.0


@given(words, words)
def test_rouge_symmetric(a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyTextWarning)
        assert math.isclose(rouge_l(a, b), rouge_l(b, a))
