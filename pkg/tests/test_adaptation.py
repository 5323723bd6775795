from fractions import Fraction

import numpy as np
import pytest

from harmonic_dht.adaptation import (
    NoConvergenceError,
    ZeroDistanceError,
    balance_residual,
    harmonic_vector,
    process_answered_query,
    replacement_probability,
    stationary_distribution,
    total_variation,
    transition_matrix,
)
from harmonic_dht.keyspace import ring_distance
from harmonic_dht.overlay import Overlay


def test_replacement_probability_examples():
    assert replacement_probability(0, 5, 95, 100) == 0.5
    assert replacement_probability(0, 9, 1, 100) == pytest.approx(0.9)
    assert replacement_probability(50, 59, 49, 100) == pytest.approx(0.9)
    with pytest.raises(ZeroDistanceError):
        replacement_probability(0, 9, 0, 100)
    with pytest.raises(ZeroDistanceError):
        replacement_probability(3, 3, 9, 100)


def test_requester_equal_to_shortcut_is_noop(rng):
    o = Overlay.from_keys(range(0, 100, 10), 100, rng)
    k = 30
    cur = o.shortcuts(k)[0]
    for _ in range(50):
        assert not process_answered_query(o, k, cur, rng)
        assert o.shortcuts(k) == [cur]


def test_two_node_overlay_noop(rng):
    o = Overlay.seed_pair(1, 6, 10)
    before = o.checksum()
    for _ in range(20):
        process_answered_query(o, 1, 6, rng)
    assert o.checksum() == before


def test_update_acceptance_rate(rng):
    # shortcut at distance 9, requester at distance 1: switch with prob 0.9
    hits = 0
    for _ in range(4000):
        o = Overlay.from_keys([0, 1, 9, 50], 100, shortcuts="none")
        o.set_shortcut(0, 0, 9)
        hits += process_answered_query(o, 0, 1, rng)
    assert hits / 4000 == pytest.approx(0.9, abs=4 * np.sqrt(0.09 / 4000))


def test_update_preserves_invariants(rng):
    o = Overlay.bootstrap(200, 2000, rng, shortcut_count=2)
    keys = o.keys
    for _ in range(3000):
        a, b = rng.choice(len(keys), size=2, replace=False)
        process_answered_query(o, keys[a], keys[b], rng)
    o.check_invariants()


def test_bad_inputs(rng):
    o = Overlay.from_keys([0, 5, 9], 10, rng)
    with pytest.raises(KeyError):
        process_answered_query(o, 0, 4, rng)
    with pytest.raises(ZeroDistanceError):
        process_answered_query(o, 5, 5, rng)


def test_transition_matrix_n2_exact():
    P = transition_matrix(2)
    expect = np.array([[5 / 6, 1 / 6], [1 / 3, 2 / 3]])
    np.testing.assert_allclose(P, expect, atol=1e-15)
    p = np.array([2 / 3, 1 / 3])
    assert p[0] * P[0, 1] == pytest.approx(1 / 9) == p[1] * P[1, 0]


@pytest.mark.parametrize("n", [2, 3, 10, 128, 500])
def test_transition_matrix_stochastic(n):
    P = transition_matrix(n)
    assert (P >= 0).all()
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
    off = P[~np.eye(n, dtype=bool)]
    assert (off > 0).all() and (np.diag(P) > 0).all()


def test_transition_matrix_rejects_one_state():
    with pytest.raises(ValueError):
        transition_matrix(1)


def test_stationary_small_cases():
    np.testing.assert_allclose(stationary_distribution(transition_matrix(2)), [2 / 3, 1 / 3],
                               atol=1e-10)
    np.testing.assert_allclose(stationary_distribution(transition_matrix(3)),
                               [6 / 11, 3 / 11, 2 / 11], atol=1e-10)


@pytest.mark.parametrize("n", [2, 3, 16, 64, 128])
def test_stationary_matches_harmonic(n):
    P = transition_matrix(n)
    p = stationary_distribution(P, 1e-12)
    assert total_variation(p, harmonic_vector(n)) < 1e-8
    assert np.abs(p - p @ P).sum() < 10 * 1e-12 + 1e-15


def test_stationary_iteration_cap():
    with pytest.raises(NoConvergenceError):
        stationary_distribution(transition_matrix(50), tol=1e-300, max_iter=10)


def test_harmonic_vector_exact_for_three_states():
    h = [Fraction(1, x) for x in (1, 2, 3)]
    exact = [float(v / sum(h)) for v in h]
    np.testing.assert_allclose(harmonic_vector(3), exact, rtol=1e-15)


def test_balance_identity_by_substitution():
    for n in range(2, 129):
        assert np.abs(balance_residual(harmonic_vector(n))).max() < 1e-10
    # a non-harmonic vector is not balanced
    assert np.abs(balance_residual(np.full(20, 1 / 20))).max() > 1e-4


def test_single_node_converges_to_oracle(rng):
    n = 256
    o = Overlay.from_keys(range(n), n, rng)
    k = 0
    counts = np.zeros(n // 2 + 1)
    for _ in range(100_000):
        process_answered_query(o, k, int(rng.integers(1, n)), rng)
        counts[ring_distance(k, o.shortcuts(k)[0], n)] += 1
    emp = counts[1:] / counts.sum()
    ref = stationary_distribution(transition_matrix(128))
    assert total_variation(emp, ref) < 0.05
