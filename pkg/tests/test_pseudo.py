import math

import numpy as np
import pytest

from isinglasso.edges import n_edges
from isinglasso.gibbs import sample_dataset
from isinglasso.pseudo import PlObjective, conditional_prob, pl_grad, pl_nll
from isinglasso.rng import RngSeed
from isinglasso.solver import fista, SolverOptions
from tests.conftest import central_diff


def test_conditional_prob_no_interactions():
    for site in range(4):
        assert conditional_prob(np.zeros(6), np.ones(4, dtype=np.int8), site) == 0.5


def test_conditional_prob_two_site():
    # coupling 1, neighbor +1: P(+1) = e / (e + 1/e)
    got = conditional_prob(np.array([1.0]), np.array([1, 1], dtype=np.int8), 0)
    assert got == pytest.approx(math.e / (math.e + math.exp(-1)), rel=1e-12)


def test_conditional_prob_complementary(rng):
    d = 5
    theta = rng.normal(size=n_edges(d))
    y = rng.choice([-1, 1], size=d).astype(np.int8)
    for site in range(d):
        p = conditional_prob(theta, y, site)
        assert 0.0 < p < 1.0
        # negating every other spin negates the activation
        assert conditional_prob(theta, -y, site) == pytest.approx(1.0 - p, rel=1e-12)


def test_pl_nll_zero_theta():
    data = np.array([[1, 1], [1, -1], [-1, -1]], dtype=np.int8)
    assert pl_nll(np.zeros(1), data) == pytest.approx(2 * math.log(2), rel=1e-12)
    data5 = np.ones((4, 5), dtype=np.int8)
    assert pl_nll(np.zeros(10), data5) == pytest.approx(5 * math.log(2), rel=1e-12)


def test_pl_nll_single_observation():
    # both conditionals evaluate to 1/(1+e^-2)
    data = np.array([[1, 1]], dtype=np.int8)
    expect = 2 * math.log1p(math.exp(-2.0))
    assert pl_nll(np.array([1.0]), data) == pytest.approx(expect, rel=1e-12)


def test_pl_nll_permutation_invariant(rng):
    d = 4
    data = rng.choice([-1, 1], size=(30, d)).astype(np.int8)
    theta = rng.normal(size=n_edges(d))
    shuffled = data[rng.permutation(30)]
    assert pl_nll(theta, data) == pytest.approx(pl_nll(theta, shuffled), rel=1e-12)


def test_pl_grad_at_zero_is_minus_two_correlation(rng):
    d = 5
    data = rng.choice([-1, 1], size=(40, d)).astype(np.int8)
    from isinglasso.mcobj import data_suffstat_mean

    expect = -2.0 * data_suffstat_mean(data)
    np.testing.assert_allclose(pl_grad(np.zeros(n_edges(d)), data), expect, atol=1e-12)


def test_pl_grad_matches_finite_differences(rng):
    d = 6
    data = rng.choice([-1, 1], size=(25, d)).astype(np.int8)
    theta = rng.normal(0, 0.6, size=n_edges(d))
    obj = PlObjective(data)
    fd = central_diff(obj.value, theta)
    g = obj.grad(theta)
    assert np.abs(g - fd).max() / np.abs(fd).max() < 1e-6
    v, g2 = obj.value_grad(theta)
    assert v == pytest.approx(obj.value(theta), rel=1e-12)
    np.testing.assert_allclose(g2, g, atol=1e-15)


def test_pl_grad_small_at_population_optimum():
    data = sample_dataset(np.zeros(n_edges(4)), n=10_000, chain_len=40, seed=RngSeed(8))
    g = pl_grad(np.zeros(n_edges(4)), data)
    assert np.abs(g).max() <= 0.1


def test_pl_convexity_midpoint(rng):
    d = 4
    data = rng.choice([-1, 1], size=(30, d)).astype(np.int8)
    obj = PlObjective(data)
    for _ in range(10):
        t1 = rng.uniform(-1, 1, size=n_edges(d))
        t2 = rng.uniform(-1, 1, size=n_edges(d))
        t = rng.uniform()
        assert obj.value(t * t1 + (1 - t) * t2) <= (
            t * obj.value(t1) + (1 - t) * obj.value(t2) + 1e-9
        )


def test_two_site_pl_matches_exact_mle():
    # for a single edge the pseudolikelihood stationarity condition and the
    # likelihood moment condition coincide: theta_hat = atanh(mean(y1 y2))
    data = sample_dataset(np.array([0.8]), n=2000, chain_len=300, seed=RngSeed(9))
    z = (data[:, 0] * data[:, 1]).astype(float).mean()
    exact_mle = math.atanh(z)
    obj = PlObjective(data)
    fit = fista(obj.value, obj.grad, 0.0, np.zeros(1), SolverOptions(kkt_tol=1e-10))
    assert fit.theta[0] == pytest.approx(exact_mle, abs=1e-3)
