import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from synthcog.errors import DegenerateInputError, InputError
from synthcog.stats import adaptive_simpson, cohens_d, separability, t_upper_tail, welch_t

samples = st.lists(st.floats(-100, 100), min_size=3, max_size=30).filter(lambda v: np.ptp(v) > 1e-3)


def test_cohens_d_fixtures():
    assert cohens_d([1, 2, 3], [3, 4, 5]) == pytest.approx(-2.0, abs=1e-12)
    assert cohens_d([1, 2, 3], [1, 2, 3]) == 0.0
    with pytest.raises(DegenerateInputError):
        cohens_d([1, 1], [1, 1])
    with pytest.raises(InputError):
        cohens_d([1], [1, 2])


@given(samples, samples, st.floats(0.01, 100))
def test_cohens_d_scale_invariant(a, b, c):
    d = cohens_d(a, b)
    assert math.isclose(abs(cohens_d([c * x for x in a], [c * x for x in b])), abs(d),
                        rel_tol=1e-7, abs_tol=1e-9)


def test_welch_identical_groups():
    t, p = welch_t([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert t == 0.0 and p == pytest.approx(1.0, abs=1e-10)


def test_welch_separated_samples():
    rng = np.random.default_rng(0)
    a, b = rng.normal(0, 1, 100), rng.normal(10, 1, 100)
    _, p = welch_t(a, b)
    assert p < 1e-10


@given(samples, samples)
def test_welch_antisymmetric(a, b):
    t1, p1 = welch_t(a, b)
    t2, p2 = welch_t(b, a)
    assert t1 == pytest.approx(-t2) and p1 == pytest.approx(p2)
    assert 0.0 <= p1 <= 1.0


def test_t_tail_closed_forms():
    # df = 1 is Cauchy; df = 2 has a closed-form tail
    for t in (0.0, 0.5, 2.0, 10.0):
        assert t_upper_tail(t, 1.0) == pytest.approx(0.5 - math.atan(t) / math.pi, abs=1e-12)
        assert t_upper_tail(t, 2.0) == pytest.approx(0.5 * (1 - t / math.sqrt(t * t + 2)), abs=1e-12)
    assert t_upper_tail(-1.0, 5.0) == pytest.approx(1 - t_upper_tail(1.0, 5.0))
    with pytest.raises(InputError):
        t_upper_tail(1.0, 0.0)


def test_t_tail_against_scipy():
    sps = pytest.importorskip("scipy.stats")
    for df in (0.7, 1.5, 3.0, 12.4, 80.0, 400.0):
        for t in (0.1, 1.0, 2.5, 6.0, 30.0):
            assert t_upper_tail(t, df) == pytest.approx(sps.t.sf(t, df), rel=1e-7, abs=1e-300)


def test_welch_against_scipy():
    sps = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(3)
    for shift in (0.0, 0.3, 1.0, 3.0):
        a, b = rng.normal(0, 1, 25), rng.normal(shift, 2, 40)
        t, p = welch_t(a, b)
        ref = sps.ttest_ind(a, b, equal_var=False)
        assert t == pytest.approx(ref.statistic, rel=1e-10)
        assert p == pytest.approx(ref.pvalue, rel=1e-7)


def test_adaptive_simpson():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)
    assert adaptive_simpson(lambda x: x ** 3, 0.0, 2.0) == pytest.approx(4.0, abs=1e-12)


def test_separability_record():
    s = separability("f", ("A", "B"), [1, 2, 3], [3, 4, 5])
    assert s.cohens_d == pytest.approx(-2.0) and s.t_statistic < 0 and 0 < s.p_value < 1
