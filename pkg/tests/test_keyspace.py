import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from harmonic_dht.keyspace import (
    HarmonicSampler,
    InvalidRingError,
    RingParams,
    harmonic_normalizer,
    rank_distance,
    ring_distance,
    sample_shortcut_target,
)


def brute_normalizer(m):
    return sum(1.0 / min(k, m - k) for k in range(1, m))


@pytest.mark.parametrize("a, b, m, d", [(3, 9998, 10000, 5), (7, 7, 50, 0), (0, 5000, 10000, 5000)])
def test_ring_distance_examples(a, b, m, d):
    assert ring_distance(a, b, m) == d


def test_ring_distance_exhaustive_small_rings():
    for m in (2, 3, 7, 64, 511, 512):
        k = np.arange(m)
        d = ring_distance(k[:, None], k[None, :], m)
        assert (d == d.T).all()
        assert d.max() == m // 2
        # triangle inequality through every midpoint
        if m <= 64:
            assert (d[:, None, :] <= d[:, :, None] + d[None, :, :]).all()


@given(st.integers(2, 10**6).flatmap(
    lambda m: st.tuples(st.just(m), st.integers(0, m - 1), st.integers(0, m - 1), st.integers(0, m - 1))))
def test_ring_distance_metric(args):
    m, a, b, c = args
    assert ring_distance(a, b, m) == ring_distance(b, a, m) <= m // 2
    assert ring_distance(a, c, m) <= ring_distance(a, b, m) + ring_distance(b, c, m)


@given(st.integers(2, 10**6).flatmap(
    lambda m: st.tuples(st.just(m), st.integers(0, m - 1), st.integers(0, m - 1), st.integers(0, m - 1))))
def test_rank_distance_orders_like_ring_distance(args):
    m, t, a, b = args
    ra, rb = rank_distance(a, t, m), rank_distance(b, t, m)
    assert (ra == rb) == (a == b)
    if ring_distance(a, t, m) < ring_distance(b, t, m):
        assert ra < rb
    assert rank_distance(np.array([a]), np.array([t]), m)[0] == ra


def test_rank_distance_prefers_clockwise():
    assert rank_distance(20, 15, 100) < rank_distance(10, 15, 100)


@pytest.mark.parametrize("m, z", [(2, 1.0), (4, 2.5), (6, 10 / 3)])
def test_normalizer_examples(m, z):
    assert harmonic_normalizer(m) == pytest.approx(z, abs=1e-12)


@pytest.mark.parametrize("m", [2, 3, 5, 10, 101, 1000, 1001])
def test_normalizer_matches_enumeration(m):
    assert harmonic_normalizer(m) == pytest.approx(brute_normalizer(m), rel=1e-12)


def test_normalizer_rejects_tiny_ring():
    with pytest.raises(InvalidRingError):
        harmonic_normalizer(1)
    with pytest.raises(InvalidRingError):
        RingParams(1, 1)
    with pytest.raises(InvalidRingError):
        RingParams(10, 11)


@pytest.mark.parametrize("m", [2, 4, 5, 64, 1000])
def test_key_pmf_sums_to_one_and_excludes_self(m):
    s = HarmonicSampler(m)
    for k in (0, m // 3, m - 1):
        p = s.key_pmf(k)
        assert p[k] == 0
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        for j in range(m):
            if j != k:
                assert p[j] == pytest.approx(1.0 / ring_distance(k, j, m) / brute_normalizer(m))


def test_m4_probability_of_antipode():
    assert HarmonicSampler(4).key_pmf(0)[2] == pytest.approx(0.2)
    rng = np.random.default_rng(1)
    draws = HarmonicSampler(4).sample(0, rng, size=200_000)
    assert np.mean(draws == 2) == pytest.approx(0.2, abs=4 * np.sqrt(0.2 * 0.8 / 200_000))


def test_sampler_never_returns_self(rng):
    for m in (2, 3, 17, 1000):
        ks = rng.integers(m, size=5000)
        out = HarmonicSampler(m).sample(ks, rng)
        assert (out != ks).all()
        assert ((0 <= out) & (out < m)).all()
    assert sample_shortcut_target(5, 10, rng) != 5


def test_sampler_distance_law_m100(rng):
    m, n = 100, 100_000
    draws = HarmonicSampler(m).sample(0, rng, size=n)
    d = ring_distance(draws, 0, m)
    counts = np.bincount(d, minlength=m // 2 + 1)[1:]
    z = brute_normalizer(m)
    dist = np.arange(1, m // 2 + 1)
    mult = np.where(dist == m // 2, 1, 2)
    p = mult / dist / z
    se = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) <= 4 * se)
    chi2 = stats.chisquare(counts, n * p)
    assert chi2.pvalue > 1e-4


def test_sampler_is_distance_stationary(rng):
    m = 64
    s = HarmonicSampler(m)
    d1 = ring_distance(s.sample(3, rng, size=50_000), 3, m)
    d2 = ring_distance(s.sample(41, rng, size=50_000), 41, m)
    table = np.vstack([np.bincount(d1, minlength=33)[1:], np.bincount(d2, minlength=33)[1:]])
    assert stats.chi2_contingency(table).pvalue > 1e-4


def test_sampler_sides_balanced(rng):
    m = 1000
    draws = HarmonicSampler(m).sample(500, rng, size=40_000)
    cw = np.mean(draws > 500)
    assert cw == pytest.approx(0.5, abs=4 * np.sqrt(0.25 / 40_000) + 1e-3)
