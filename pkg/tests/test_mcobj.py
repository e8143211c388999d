import math

import numpy as np
import pytest

from isinglasso import oracle
from isinglasso.edges import edge_ends, n_edges
from isinglasso.gibbs import MarkovSample, run_chain, sample_dataset
from isinglasso.mcobj import (
    LowEffectiveSampleWarning,
    McObjective,
    WeightDegeneracyError,
    data_suffstat_mean,
)
from isinglasso.rng import RngSeed
from tests.conftest import central_diff


@pytest.fixture(scope="module")
def small_problem():
    d = 3
    gen = np.random.default_rng(42)
    theta_star = gen.uniform(-1, 1, size=n_edges(d))
    data = sample_dataset(theta_star, n=400, chain_len=4000, seed=RngSeed(1))
    sample = run_chain(theta_star, m=50_000, burn_in=2000, seed=RngSeed(2))
    return theta_star, data, McObjective(data, sample)


def test_value_at_instrumental_parameter(small_problem):
    theta_star, data, obj = small_problem
    # equal log-weights: the chain term vanishes exactly
    expect = -float(theta_star @ obj.data_mean)
    assert obj.value(theta_star) == pytest.approx(expect, abs=1e-12)


def test_grad_at_instrumental_is_uniform_chain_mean(small_problem):
    theta_star, data, obj = small_problem
    states = obj.sample.states()
    er, es = edge_ends(obj.d)
    chain_mean = (states[:, er].astype(float) * states[:, es]).mean(axis=0)
    np.testing.assert_allclose(
        obj.grad(theta_star), chain_mean - obj.data_mean, atol=1e-12
    )


def test_grad_matches_finite_differences(small_problem):
    theta_star, _, obj = small_problem
    gen = np.random.default_rng(3)
    theta = theta_star + gen.uniform(-0.3, 0.3, size=theta_star.size)
    g = obj.grad(theta)
    fd = central_diff(obj.value, theta)
    rel = np.abs(g - fd).max() / np.abs(fd).max()
    assert rel < 1e-6


def test_grad_matches_finite_differences_d5():
    d = 5
    gen = np.random.default_rng(4)
    theta_star = gen.uniform(-0.8, 0.8, size=n_edges(d))
    data = sample_dataset(theta_star, n=200, chain_len=2000, seed=RngSeed(3))
    sample = run_chain(theta_star, m=20_000, burn_in=1000, seed=RngSeed(4))
    obj = McObjective(data, sample)
    theta = theta_star + gen.uniform(-0.3, 0.3, size=theta_star.size)
    g = obj.grad(theta)
    fd = central_diff(obj.value, theta)
    assert np.abs(g - fd).max() / np.abs(fd).max() < 1e-6


def test_value_tracks_exact_likelihood(small_problem):
    theta_star, data, obj = small_problem
    log_c_psi = oracle.log_norming_constant(theta_star)
    gen = np.random.default_rng(5)
    for _ in range(5):
        theta = theta_star + gen.uniform(-0.5, 0.5, size=theta_star.size)
        exact, _, _ = oracle.exact_nll_grad_hess(theta, data)
        assert obj.value(theta) == pytest.approx(exact - log_c_psi, abs=0.02)


def test_approximation_error_shrinks_with_m():
    d = 3
    gen = np.random.default_rng(6)
    theta_star = gen.uniform(-0.8, 0.8, size=3)
    data = sample_dataset(theta_star, n=200, chain_len=2000, seed=RngSeed(5))
    theta = theta_star + np.array([0.3, -0.2, 0.25])
    exact, _, _ = oracle.exact_nll_grad_hess(theta, data)
    log_c = oracle.log_norming_constant(theta_star)
    devs = []
    for m in (1000, 100_000):
        sample = run_chain(theta_star, m=m, burn_in=2000, seed=RngSeed(6))
        obj = McObjective(data, sample)
        devs.append(abs(obj.value(theta) - (exact - log_c)))
    assert devs[1] < devs[0]


def test_grad_converges_to_exact(small_problem):
    theta_star, data, obj = small_problem
    _, exact_grad, _ = oracle.exact_nll_grad_hess(theta_star, data)
    np.testing.assert_allclose(obj.grad(theta_star), exact_grad, atol=0.02)


def test_hessian_converges_to_exact(small_problem):
    theta_star, data, obj = small_problem
    _, _, exact_hess = oracle.exact_nll_grad_hess(theta_star, data)
    np.testing.assert_allclose(obj.hessian(theta_star), exact_hess, atol=0.02)


def test_hessian_identity_at_origin():
    d = 5
    sample = run_chain(np.zeros(n_edges(d)), m=100_000, burn_in=500, seed=RngSeed(7))
    obj = McObjective(np.ones((2, d), dtype=np.int8), sample)
    h = obj.hessian(np.zeros(n_edges(d)))
    assert np.abs(h - np.eye(n_edges(d))).max() <= 0.05


def test_hessian_is_psd(small_problem):
    theta_star, _, obj = small_problem
    gen = np.random.default_rng(8)
    for _ in range(3):
        theta = theta_star + gen.uniform(-0.5, 0.5, size=theta_star.size)
        eigs = np.linalg.eigvalsh(obj.hessian(theta))
        assert eigs.min() >= -1e-10


def test_convexity_midpoint(small_problem):
    theta_star, _, obj = small_problem
    gen = np.random.default_rng(9)
    for _ in range(10):
        t1 = gen.uniform(-1, 1, size=theta_star.size)
        t2 = gen.uniform(-1, 1, size=theta_star.size)
        t = gen.uniform()
        lhs = obj.value(t * t1 + (1 - t) * t2)
        rhs = t * obj.value(t1) + (1 - t) * obj.value(t2)
        assert lhs <= rhs + 1e-9


def test_grad_coordinates_bounded(small_problem):
    theta_star, _, obj = small_problem
    gen = np.random.default_rng(10)
    for _ in range(5):
        theta = gen.uniform(-2, 2, size=theta_star.size)
        g = obj.grad(theta)
        assert np.all(np.abs(g) <= 2.0)


def test_value_finite_far_from_instrumental(small_problem):
    # log-domain weights: shifting all log-weights must not overflow
    theta_star, _, obj = small_problem
    v = obj.value(theta_star + 40.0)
    assert math.isfinite(v)
    assert np.all(np.isfinite(obj.grad(theta_star + 40.0)))


def test_stale_instrumental_warns():
    # chain tightly coupled on one pair; reweighting toward the opposite
    # sign concentrates on the handful of disagreeing steps
    psi = np.array([2.5, 0.0, 0.0])
    sample = run_chain(psi, m=50_000, burn_in=2000, seed=RngSeed(21))
    obj = McObjective(np.ones((2, 3), dtype=np.int8), sample)
    theta = psi + np.array([-20.0, 0.0, 0.0])
    with pytest.warns(LowEffectiveSampleWarning):
        v = obj.value(theta)
    assert math.isfinite(v)
    assert obj.ess(theta) < 0.01 * sample.m


def test_weight_degeneracy_raises(small_problem):
    theta_star, _, obj = small_problem
    with pytest.raises(WeightDegeneracyError):
        obj.value(theta_star + 1e308)


def test_rejects_nonfinite_theta(small_problem):
    theta_star, _, obj = small_problem
    bad = theta_star.copy()
    bad[0] = np.nan
    with pytest.raises(ValueError):
        obj.value(bad)


def test_empty_sample_rejected():
    empty = MarkovSample(
        psi=np.zeros(3),
        d=3,
        start=np.ones(3, dtype=np.int8),
        sites=np.empty(0, dtype=np.int32),
        newvals=np.empty(0, dtype=np.int8),
        scores_psi=np.empty(0),
        burn_in=0,
    )
    with pytest.raises(ValueError):
        McObjective(np.ones((2, 3), dtype=np.int8), empty)


def test_dimension_mismatch_rejected(small_problem):
    _, _, obj = small_problem
    with pytest.raises(ValueError):
        McObjective(np.ones((2, 4), dtype=np.int8), obj.sample)


def test_data_suffstat_mean_range(rng):
    data = rng.choice([-1, 1], size=(50, 6)).astype(np.int8)
    mean = data_suffstat_mean(data)
    assert mean.shape == (15,)
    assert np.all(mean >= -1) and np.all(mean <= 1)
