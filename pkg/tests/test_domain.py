from collections import Counter

import pytest

from synthcog.config import SimConfig
from synthcog.domain import (CATEGORIES, CognitiveLabel, ConfoundKind, ProgressionProfileKind,
                             build_catalog, derive_seed, largest_remainder, read_catalog_jsonl,
                             sample_population, write_catalog_jsonl)
from synthcog.errors import ConfigError

K = ProgressionProfileKind


def test_label_order_is_severity():
    assert [int(l) for l in CognitiveLabel] == [0, 1, 2, 3, 4]
    assert CognitiveLabel.parse("EarlyAD") is CognitiveLabel.EarlyAD
    with pytest.raises(ValueError):
        CognitiveLabel.parse("Mild")


def test_catalog_default_shape():
    cat = build_catalog(SimConfig(), 42)
    assert {v.category for v in cat} == set(CATEGORIES)
    assert all(15 <= v.duration_s <= 90 for v in cat)


def test_catalog_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_catalog_jsonl(build_catalog(SimConfig(), 42), a)
    write_catalog_jsonl(build_catalog(SimConfig(), 42), b)
    assert a.read_bytes() == b.read_bytes()
    assert read_catalog_jsonl(a) == build_catalog(SimConfig(), 42)


def test_catalog_counts_and_unique_ids():
    cat = build_catalog(SimConfig(videos_per_category=20), 7)
    assert len(cat) == 100
    assert len({v.video_id for v in cat}) == 100


def test_catalog_rejects_unknown_category():
    with pytest.raises(ConfigError):
        build_catalog(SimConfig(categories=("News", "Knitting"), categories_per_day=2), 1)


def test_population_largest_remainder_counts():
    users = sample_population(200, None, {c: 0.0 for c in ConfoundKind}, master_seed=1)
    counts = Counter(u.profile_kind for u in users)
    assert [counts[k] for k in K] == [34, 34, 33, 33, 33, 33]
    assert all(not u.confounds for u in users)


def test_population_six_users_one_per_kind():
    users = sample_population(6, master_seed=99)
    assert sorted(u.profile_kind.value for u in users) == sorted(k.value for k in K)


def test_population_degenerate_mix():
    users = sample_population(100, {K.StableHealthy: 1.0}, master_seed=9)
    assert all(u.profile_kind is K.StableHealthy and u.transitions.is_empty() for u in users)


def test_population_rejects_bad_mix():
    with pytest.raises(ConfigError):
        sample_population(10, {K.StableHealthy: 0.5})
    with pytest.raises(ConfigError):
        sample_population(10, None, {ConfoundKind.LowLiker: 1.5})
    with pytest.raises(ConfigError):
        sample_population(0)


def test_largest_remainder_sums():
    # quotas 3.5, 1.75, 1.75: the two .75 remainders win
    assert largest_remainder(7, [0.5, 0.25, 0.25]) == [3, 2, 2]
    assert sum(largest_remainder(200, [1 / 6] * 6)) == 200


def test_derive_seed_stable():
    # fixed value guards against accidental changes to the seeding scheme
    assert derive_seed(1, "x") == 18280683524007529382
    assert derive_seed(1, "x") != derive_seed(1, "y")
    assert 0 <= derive_seed(20240601, 3, "sessions") < 2 ** 64
