import math
import random
import statistics
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from synthcog.domain import CognitiveLabel as L, ConfoundKind, VideoMetadata
from synthcog.errors import ConfigError, DegenerateInputError, InputError
from synthcog.features import (BEHAVIOR_FIELDS, CLIP_BOUNDS, COHERENCE_MEANS, EVENT_TYPES,
                               FEATURE_NAMES, MODALITIES, BEHAVIOR_RANGES, REFERENCE_ATTENUATION, BehaviorSample,
                               Baseline, NoiseSpec, apply_confound, behavioral_entropy, draw_noise,
                               engagement_decay, fuse, inject_noise, modality_mask,
                               sample_behaviors, sample_coherence, coherence_drift)

VIDEO = VideoMetadata(0, "News", 80, "t", ("a", "b", "c"), "A b c.")


def _sample(**kw):
    base = dict(watch_time_s=60.0, skipped_s=0.0, pauses=1, replays=2, reaction_time_s=5.0,
                liked=1, shared=0, churn_pct=1.0, logins_per_day=2.0)
    base.update(kw)
    return BehaviorSample(**base)


def test_coherence_means():
    rng = random.Random(2)
    assert abs(statistics.fmean(sample_coherence(L.Healthy, "clean", rng) for _ in range(10_000)) - 0.932) < 0.01
    assert abs(statistics.fmean(sample_coherence(L.MCI, "noisy", rng) for _ in range(10_000)) - 0.421) < 0.01
    assert sample_coherence(L.EarlyAD, "clean", rng, scale=0) == 0.741
    with pytest.raises(InputError):
        sample_coherence(L.MCI, "dirty", rng)


def test_coherence_drift():
    assert math.isclose(coherence_drift(0.9, 0.7), 0.2)
    assert coherence_drift(0.5, 0.5) == 0.0
    assert math.isclose(coherence_drift(0.932, 0.421), 0.511)


def test_entropy_fixtures():
    assert math.isclose(behavioral_entropy(dict.fromkeys(EVENT_TYPES, 3)), math.log(5), abs_tol=1e-12)
    assert behavioral_entropy({"pause": 4}) == 0.0
    assert math.isclose(behavioral_entropy({"pause": 1, "skip": 1}), math.log(2), abs_tol=1e-12)
    with pytest.raises(DegenerateInputError):
        behavioral_entropy({})
    with pytest.raises(InputError):
        behavioral_entropy({"blink": 1})


@given(st.lists(st.integers(0, 50), min_size=5, max_size=5).filter(lambda c: sum(c) > 0))
def test_entropy_bounds(counts):
    h = behavioral_entropy(dict(zip(EVENT_TYPES, counts)))
    assert 0.0 <= h <= math.log(5) + 1e-12


def test_engagement_decay():
    ratios, lam = engagement_decay([(d, 50.0) for d in range(1, 8)])
    assert ratios == [1.0] * 7 and lam == 0.0
    ratios, lam = engagement_decay([(d, 80.0 * math.exp(-0.1 * d)) for d in range(0, 20)])
    assert abs(lam - 0.1) < 1e-9
    half = math.log(2) / 0.1
    ratios, _ = engagement_decay([(0, 80.0), (half, 40.0)])
    assert math.isclose(ratios[1], 0.5)


def test_behaviors_inside_rows():
    rng = random.Random(6)
    for _ in range(500):
        b = sample_behaviors(L.Healthy, VIDEO, rng, clip_to_duration=False)
        assert 85 <= b.watch_time_s <= 100 and 4 <= b.reaction_time_s <= 6
        s = sample_behaviors(L.SevAD, VIDEO, rng, clip_to_duration=False)
        assert 10 <= s.watch_time_s <= 20
    assert BEHAVIOR_RANGES[L.Healthy]["like_pct"] == (65, 80)
    assert BEHAVIOR_RANGES[L.SevAD]["share_pct"][1] <= 3


def test_mci_watch_mean():
    rng = random.Random(9)
    m = statistics.fmean(sample_behaviors(L.MCI, None, rng).watch_time_s for _ in range(10_000))
    assert abs(m - 70) < 1


def test_noise_identity():
    s = _sample()
    assert inject_noise(s, 0.8, NoiseSpec.clean(), L.MCI, random.Random(0)) == (s, 0.8)


def test_reference_attenuation_reproduces_noisy_means():
    for lab in (L.Healthy, L.MCI, L.EarlyAD):
        assert math.isclose(REFERENCE_ATTENUATION[lab] * COHERENCE_MEANS["clean"][lab],
                            COHERENCE_MEANS["noisy"][lab], abs_tol=1e-12)
    # quoted to three decimals
    for lab, quoted in ((L.Healthy, 0.859), (L.MCI, 0.480), (L.EarlyAD, 0.683)):
        assert abs(REFERENCE_ATTENUATION[lab] - quoted) <= 6e-4


def test_noise_sigma_before_clipping():
    rng = random.Random(10)
    eps = [draw_noise(NoiseSpec(0.3, 0.0), rng)[0] for _ in range(10_000)]
    assert abs(statistics.pstdev(eps) - 0.3) < 0.01


@given(st.floats(0, 1), st.floats(0, 0.5), st.floats(0, 2), st.integers(0, 2 ** 31))
def test_noisy_values_stay_in_bounds(c, sigma, delta, seed):
    rng = random.Random(seed)
    s = sample_behaviors(L.EarlyAD, VIDEO, rng)
    b, c2 = inject_noise(s, c, NoiseSpec(sigma, delta), L.EarlyAD, rng, VIDEO.duration_s)
    assert 0.0 <= c2 <= 1.0
    for f in BEHAVIOR_FIELDS:
        lo, hi = CLIP_BOUNDS[f]
        assert lo <= getattr(b, f) <= hi
    assert b.watch_time_s <= VIDEO.duration_s
    assert b.liked in (0, 1) and isinstance(b.pauses, int)


def test_noise_spec_validation_and_scaling():
    with pytest.raises(ConfigError):
        NoiseSpec(-0.1)
    with pytest.raises(ConfigError):
        NoiseSpec(0.1, scope="week")
    spec = NoiseSpec(0.1, 1.0, scope="day")
    assert spec.scaled_to(0.3).delta == pytest.approx(3.0)
    assert spec.scaled_to(0.0).is_identity()
    assert NoiseSpec.from_dict(spec.to_dict()) == spec
    assert NoiseSpec.from_dict({"attenuation": "reference"}).attenuation == REFERENCE_ATTENUATION


def test_confounds():
    s = _sample()
    assert apply_confound(s, set(), VIDEO) == s
    assert apply_confound(s, {ConfoundKind.SlowViewer}, VIDEO).watch_time_s == 80
    assert apply_confound(_sample(replays=2), {ConfoundKind.ImpulsiveReplayer}, VIDEO).replays == 5
    with pytest.raises(InputError):
        apply_confound(s, {ConfoundKind.LowLiker}, VIDEO)


def test_modalities():
    assert MODALITIES["language"] == ("coherence_mean", "semantic_drift", "drift_slope", "disfluency_freq")
    mask = modality_mask(["behavior"])
    assert mask.sum() == 11 and not mask[FEATURE_NAMES.index("coherence_mean")]
    with pytest.raises(ConfigError):
        modality_mask(["smell"])


def _session(day, coh=0.8, sentences=2, disfl=0, **kw):
    return SimpleNamespace(day=day, video_id=0, coherence_noisy=coh,
                           summary=SimpleNamespace(sentence_count=sentences, disfluency_count=disfl),
                           behaviors=_sample(**kw))


def test_fuse_identical_sessions():
    sessions = [_session(d) for d in (1, 2, 3)]
    fv = fuse(sessions, Baseline(0.8, 60.0 / 80.0), {0: 80})
    assert fv.drift_slope == 0.0
    assert fv.semantic_drift == pytest.approx(0.0, abs=1e-12)
    assert fv.decay_ratio == pytest.approx(1.0)


def test_fuse_disfluency_frequency():
    sessions = [_session(1, sentences=3, disfl=1), _session(2, sentences=2, disfl=0),
                _session(3, sentences=1, disfl=2)]
    fv = fuse(sessions, Baseline(0.8, 0.75), {0: 80})
    assert fv.disfluency_freq == pytest.approx(3 / 6)


def test_fuse_slope_and_entropy():
    sessions = [_session(1, coh=0.9), _session(2, coh=0.8), _session(3, coh=0.7)]
    fv = fuse(sessions, Baseline(0.9, 0.75), {0: 80})
    assert fv.drift_slope == pytest.approx(-0.1)
    # per session: 1 pause, 2 replays, 1 like -> counts 3, 0, 6, 3, 0
    p = np.array([3, 6, 3]) / 12
    assert fv.behavioral_entropy == pytest.approx(float(-(p * np.log(p)).sum()))
    assert fv.as_array().shape == (len(FEATURE_NAMES),)


def test_fuse_empty_window():
    with pytest.raises(InputError):
        fuse([], Baseline(0.9, 0.75), {})
