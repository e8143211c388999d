import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isinglasso.edges import (
    edge_index,
    edge_pair,
    edge_score,
    incremental_edge_score,
    n_edges,
    n_vertices,
    suff_stat,
)


def test_edge_index_first_pairs():
    assert edge_index(1, 2, 3).linear == 0
    assert edge_index(1, 3, 3).linear == 1
    assert edge_index(2, 3, 3).linear == 2


def test_edge_index_rejects_bad_pairs():
    with pytest.raises(ValueError):
        edge_index(2, 2, 3)
    with pytest.raises(ValueError):
        edge_index(3, 1, 3)
    with pytest.raises(ValueError):
        edge_index(1, 4, 3)


@pytest.mark.parametrize("d", [2, 3, 5, 17, 100])
def test_edge_index_bijection(d):
    seen = set()
    for linear in range(n_edges(d)):
        e = edge_pair(linear, d)
        assert edge_index(e.r, e.s, d).linear == linear
        seen.add((e.r, e.s))
    assert len(seen) == n_edges(d)


def test_canonical_order_is_row_major():
    # (1,2), (1,3), (1,4), (2,3), (2,4), (3,4) for d=4
    pairs = [tuple(edge_pair(k, 4)[:2]) for k in range(6)]
    assert pairs == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]


def test_n_vertices_roundtrip():
    for d in range(2, 40):
        assert n_vertices(n_edges(d)) == d
    with pytest.raises(ValueError):
        n_vertices(4)


def test_suff_stat_examples():
    np.testing.assert_array_equal(suff_stat(np.ones(3, dtype=np.int8)), [1, 1, 1])
    y = np.array([1, -1, 1], dtype=np.int8)
    np.testing.assert_array_equal(suff_stat(y), [-1, 1, -1])


@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_suff_stat_negation_invariance(d, seed):
    gen = np.random.default_rng(seed)
    y = gen.choice([-1, 1], size=d).astype(np.int8)
    np.testing.assert_array_equal(suff_stat(y), suff_stat(-y))


def test_edge_score_zero_theta(rng):
    for _ in range(5):
        y = rng.choice([-1, 1], size=6).astype(np.int8)
        assert edge_score(np.zeros(15), y) == 0.0


def test_edge_score_single_edge():
    assert edge_score(np.array([1.0]), np.array([1, 1], dtype=np.int8)) == 1.0


def test_edge_score_matches_dot(rng):
    d = 8
    theta = rng.normal(size=n_edges(d))
    y = rng.choice([-1, 1], size=d).astype(np.int8)
    assert edge_score(theta, y) == pytest.approx(float(theta @ suff_stat(y)))
    assert edge_score(theta, y) == pytest.approx(edge_score(theta, -y))


def test_edge_score_dimension_mismatch():
    with pytest.raises(ValueError):
        edge_score(np.zeros(3), np.ones(4, dtype=np.int8))


def test_incremental_noop_flip(rng):
    d = 5
    theta = rng.normal(size=n_edges(d))
    y = rng.choice([-1, 1], size=d).astype(np.int8)
    prev = edge_score(theta, y)
    assert incremental_edge_score(prev, theta, y, 2, int(y[2])) == prev


def test_incremental_single_edge():
    theta = np.array([1.0])
    y = np.array([1, 1], dtype=np.int8)
    assert incremental_edge_score(1.0, theta, y, 1, -1) == -1.0


def test_incremental_matches_recompute(rng):
    d = 7
    theta = rng.normal(size=n_edges(d))
    y = rng.choice([-1, 1], size=d).astype(np.int8)
    score = edge_score(theta, y)
    for _ in range(10_000):
        site = int(rng.integers(d))
        new = int(rng.choice([-1, 1]))
        score = incremental_edge_score(score, theta, y, site, new)
        y[site] = new
    assert score == pytest.approx(edge_score(theta, y), abs=1e-9)


@pytest.mark.slow
def test_incremental_million_updates(rng):
    d = 12
    theta = rng.normal(size=n_edges(d))
    y = rng.choice([-1, 1], size=d).astype(np.int8)
    score = edge_score(theta, y)
    sites = rng.integers(d, size=1_000_000)
    news = rng.choice([-1, 1], size=1_000_000)
    for site, new in zip(sites, news):
        score = incremental_edge_score(score, theta, y, int(site), int(new))
        y[int(site)] = new
    assert score == pytest.approx(edge_score(theta, y), abs=1e-9)
