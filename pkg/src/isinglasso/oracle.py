"""Brute-force ground truth for small graphs.

Everything here enumerates the 2^d configuration space, so it is the
independent check for the Monte-Carlo machinery: partition values, exact
likelihood derivatives, the exact single-update transition matrix and its
spectral gap, chain/importance constants, cone invertibility factors, and
the plug-in calculators for the recovery guarantee.

Hard caps (d <= 20 for enumeration, d <= 10 for the dense transition
matrix) are enforced with explicit errors rather than silent truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .edges import edge_ends, n_edges, n_vertices

ENUM_CAP = 20
SPECTRAL_CAP = 10

_STATE_CHUNK = 65_536


def all_configs(d: int) -> np.ndarray:
    """All 2^d spin configurations as an int8 matrix (states ascending by bits).

    State index x has spin +1 at site r iff bit r of x is set.
    """
    if d > ENUM_CAP:
        raise ValueError(f"enumeration capped at d <= {ENUM_CAP}, got d={d}")
    x = np.arange(1 << d, dtype=np.int64)
    bits = (x[:, None] >> np.arange(d, dtype=np.int64)[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


def _energies(theta: np.ndarray, spins: np.ndarray) -> np.ndarray:
    """theta' J(y) for every row of spins, touching only nonzero edges."""
    d = spins.shape[1]
    er, es = edge_ends(d)
    out = np.zeros(spins.shape[0], dtype=np.float64)
    for e in np.flatnonzero(theta):
        out += theta[e] * (spins[:, er[e]].astype(np.float64) * spins[:, es[e]])
    return out


@dataclass(frozen=True)
class ExactDistribution:
    """Exact model distribution over all 2^d configurations."""

    d: int
    log_c: float
    log_probs: np.ndarray

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    @property
    def c(self) -> float:
        return math.exp(self.log_c)


def exact_distribution(theta: np.ndarray) -> ExactDistribution:
    theta = np.asarray(theta, dtype=np.float64)
    d = n_vertices(theta.shape[0])
    e = _energies(theta, all_configs(d))
    emax = e.max()
    log_c = emax + math.log(np.exp(e - emax).sum())
    return ExactDistribution(d=d, log_c=log_c, log_probs=e - log_c)


def log_norming_constant(theta: np.ndarray) -> float:
    """log of the 2^d-term normalizer, computed with max-shifted exponentials."""
    return exact_distribution(theta).log_c


def norming_constant(theta: np.ndarray) -> float:
    return math.exp(log_norming_constant(theta))


def suffstat_moments(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact mean and covariance of J(Y) under the model at theta.

    The covariance is the Hessian of log C; accumulated over state chunks
    so d = 20 stays within memory.
    """
    theta = np.asarray(theta, dtype=np.float64)
    d = n_vertices(theta.shape[0])
    dist = exact_distribution(theta)
    spins = all_configs(d)
    er, es = edge_ends(d)
    d_bar = n_edges(d)
    mean = np.zeros(d_bar)
    second = np.zeros((d_bar, d_bar))
    for lo in range(0, spins.shape[0], _STATE_CHUNK):
        hi = min(lo + _STATE_CHUNK, spins.shape[0])
        block = spins[lo:hi]
        j = block[:, er].astype(np.float64) * block[:, es]
        p = np.exp(dist.log_probs[lo:hi])
        mean += j.T @ p
        second += j.T @ (p[:, None] * j)
    cov = second - np.outer(mean, mean)
    return mean, (cov + cov.T) / 2.0


def exact_nll_grad_hess(
    theta: np.ndarray, data: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Exact negative log-likelihood of the sample, with gradient and Hessian."""
    theta = np.asarray(theta, dtype=np.float64)
    d = n_vertices(theta.shape[0])
    data = np.asarray(data)
    if data.ndim != 2 or data.shape[1] != d:
        raise ValueError("data must be (n, d) with d matching theta")
    er, es = edge_ends(d)
    y = data.astype(np.float64)
    data_mean = (y[:, er] * y[:, es]).mean(axis=0)
    mean, cov = suffstat_moments(theta)
    value = -float(theta @ data_mean) + log_norming_constant(theta)
    grad = mean - data_mean
    return value, grad, cov


def transition_matrix(psi: np.ndarray) -> np.ndarray:
    """Exact 2^d x 2^d single-update transition matrix of the sampler at psi."""
    psi = np.asarray(psi, dtype=np.float64)
    d = n_vertices(psi.shape[0])
    if d > SPECTRAL_CAP:
        raise ValueError(f"dense transition matrix capped at d <= {SPECTRAL_CAP}")
    spins = all_configs(d).astype(np.float64)
    n_states = spins.shape[0]
    er, es = edge_ends(d)
    theta_mat = np.zeros((d, d))
    theta_mat[er, es] = psi
    theta_mat[es, er] = psi
    p = np.zeros((n_states, n_states))
    idx = np.arange(n_states)
    for r in range(d):
        a = spins @ theta_mat[:, r]  # activation excludes r: diagonal is zero
        p_plus = 1.0 / (1.0 + np.exp(-2.0 * a))
        up = idx | (1 << r)
        down = idx & ~(1 << r)
        np.add.at(p, (idx, up), p_plus / d)
        np.add.at(p, (idx, down), (1.0 - p_plus) / d)
    return p


@dataclass(frozen=True)
class ChainConstants:
    """Mixing and importance constants of the instrumental chain."""

    kappa: float
    beta1: float
    beta2: float
    M: float | None = None


def gibbs_spectral_constants(
    psi: np.ndarray, q: np.ndarray | None = None
) -> ChainConstants:
    """kappa (second-largest |eigenvalue|), beta2 = (1-kappa)/(1+kappa), and
    beta1 = sqrt(sum q^2 / h) for initial density q (default: stationary).

    Uses the symmetrized similarity D^{1/2} P D^{-1/2}, real-spectrum by
    reversibility.
    """
    psi = np.asarray(psi, dtype=np.float64)
    p = transition_matrix(psi)
    h = exact_distribution(psi).probs
    droot = np.sqrt(h)
    sym = (droot[:, None] * p) / droot[None, :]
    eigs = np.linalg.eigvalsh((sym + sym.T) / 2.0)
    order = np.argsort(-np.abs(eigs))
    kappa = float(abs(eigs[order[1]]))
    if q is None:
        beta1 = 1.0
    else:
        q = np.asarray(q, dtype=np.float64)
        if q.shape != h.shape or np.any(q < -1e-12) or abs(q.sum() - 1.0) > 1e-9:
            raise ValueError("q must be a probability vector over all 2^d states")
        beta1 = float(np.sqrt((q * q / h).sum()))
    return ChainConstants(kappa=kappa, beta1=beta1, beta2=(1 - kappa) / (1 + kappa))


def importance_ratio_bound(theta_star: np.ndarray, psi: np.ndarray) -> float:
    """Worst-case ratio of the target density to the instrumental density.

    max_y exp(theta*' J(y)) / (h(y) C(theta*)) with h the model density at
    psi; equals 1 exactly when psi = theta*.
    """
    theta_star = np.asarray(theta_star, dtype=np.float64)
    psi = np.asarray(psi, dtype=np.float64)
    if theta_star.shape != psi.shape:
        raise ValueError("theta_star and psi must have equal length")
    d = n_vertices(theta_star.shape[0])
    diff = _energies(theta_star - psi, all_configs(d))
    return math.exp(
        float(diff.max()) + log_norming_constant(psi) - log_norming_constant(theta_star)
    )


def cone_factor(
    xi: float,
    support: frozenset[int] | set[int],
    sigma: np.ndarray,
    n_draws: int = 100_000,
    seed: int = 0,
    refine_rounds: int = 3,
) -> float:
    """Search-based upper bound of the cone invertibility factor.

    Approximates inf over {theta != 0 : |theta_{T^c}|_1 <= xi |theta_T|_1}
    of theta' Sigma theta / (|theta_T|_1 |theta|_inf) by random cone draws
    normalized to |theta|_inf = 1 (the ratio is scale-invariant) plus local
    coordinate refinement.  Random search cannot certify the infimum, so
    the returned value is an upper bound of the true factor.
    """
    if xi <= 1:
        raise ValueError("xi must exceed 1")
    t_idx = np.array(sorted(support), dtype=np.int64)
    if t_idx.size == 0:
        raise ValueError("support set must be nonempty")
    sigma = np.asarray(sigma, dtype=np.float64)
    d_bar = sigma.shape[0]
    if sigma.shape != (d_bar, d_bar):
        raise ValueError("sigma must be square")
    scale = max(np.abs(sigma).max(), 1.0)
    if np.linalg.eigvalsh((sigma + sigma.T) / 2.0).min() < -1e-8 * scale:
        raise ValueError("sigma is not positive semidefinite")
    c_idx = np.setdiff1d(np.arange(d_bar), t_idx)

    def ratio(theta: np.ndarray) -> float:
        t1 = np.abs(theta[t_idx]).sum()
        if t1 <= 0:
            return math.inf
        sup = np.abs(theta).max()
        return float(theta @ sigma @ theta) / (t1 * sup)

    def clip_to_cone(theta: np.ndarray) -> np.ndarray:
        t1 = np.abs(theta[t_idx]).sum()
        c1 = np.abs(theta[c_idx]).sum() if c_idx.size else 0.0
        if c1 > xi * t1:
            theta = theta.copy()
            theta[c_idx] *= (xi * t1) / c1
        return theta

    gen = np.random.default_rng(seed)
    best = math.inf
    best_theta = None
    for i in range(n_draws):
        theta = np.zeros(d_bar)
        theta[t_idx] = gen.uniform(-1.0, 1.0, size=t_idx.size)
        if not np.any(theta[t_idx]):
            continue
        if c_idx.size and i % 4 != 0:  # every 4th draw stays supported on T
            direction = gen.uniform(-1.0, 1.0, size=c_idx.size)
            l1 = np.abs(direction).sum()
            if l1 > 0:
                budget = gen.uniform(0.0, 1.0) * xi * np.abs(theta[t_idx]).sum()
                theta[c_idx] = direction * (budget / l1)
        theta /= np.abs(theta).max()
        r = ratio(theta)
        if r < best:
            best, best_theta = r, theta

    # local coordinate refinement around the incumbent
    if best_theta is not None:
        steps = (0.3, 0.1, 0.03, 0.01)
        for _ in range(refine_rounds):
            improved = False
            for j in range(d_bar):
                for delta in steps:
                    for sign in (1.0, -1.0):
                        cand = best_theta.copy()
                        cand[j] += sign * delta
                        cand = clip_to_cone(cand)
                        sup = np.abs(cand).max()
                        if sup <= 0:
                            continue
                        cand /= sup
                        r = ratio(cand)
                        if r < best:
                            best, best_theta, improved = r, cand, True
            if not improved:
                break
    return best


@dataclass(frozen=True)
class TheoremReport:
    """Plug-in evaluation of the recovery guarantee's quantities."""

    xi: float
    epsilon: float
    alpha: float
    lam: float
    r_bound: float
    n_required: float
    m_required: float
    ncond_ok: bool
    mcond_ok: bool


def estimation_error_bound(xi: float, lam: float, F: float) -> float:
    """Sup-norm estimation-error bound 2 e xi alpha lam / ((xi+1)(alpha-2) F)."""
    if xi <= 1:
        raise ValueError("xi must exceed 1")
    alpha = 2.0 + math.e / (xi - 1.0)
    return 2.0 * math.e * xi * alpha * lam / ((xi + 1.0) * (alpha - 2.0) * F)


def theorem_report(
    xi: float,
    epsilon: float,
    n: int,
    m: int,
    d: int,
    d0: int,
    F: float,
    M: float,
    beta1: float,
    beta2: float,
) -> TheoremReport:
    """Evaluate alpha(xi), the theoretical penalty level, the estimation-error
    bound, and the two sample-size conditions for the given constants.
    """
    if xi <= 1:
        raise ValueError("xi must exceed 1")
    if epsilon <= 0 or n <= 0 or m <= 0 or d < 2 or d0 <= 0:
        raise ValueError("epsilon, n, m, d, d0 must be positive (d >= 2)")
    d_bar = n_edges(d)
    alpha = 2.0 + math.e / (xi - 1.0)
    lam = ((xi + 1.0) / (xi - 1.0)) * max(
        2.0 * math.sqrt(2.0 * math.log(2.0 * d_bar / epsilon) / n),
        8.0 * M * math.sqrt(math.log((2.0 * d_bar + 1.0) * beta1 / epsilon) / (m * beta2)),
    )
    r_bound = estimation_error_bound(xi, lam, F)
    n_required = (
        8.0 * (1.0 + xi) ** 4 * alpha**2 * d0**2 * math.log(2.0 * d_bar / epsilon) / F**2
    )
    m_required = (
        64.0
        * (1.0 + xi) ** 4
        * alpha**2
        * d0**2
        * M**2
        * math.log(2.0 * d_bar * (d_bar + 1.0) * beta1 / epsilon)
        / (F**2 * beta2)
    )
    return TheoremReport(
        xi=xi,
        epsilon=epsilon,
        alpha=alpha,
        lam=lam,
        r_bound=r_bound,
        n_required=n_required,
        m_required=m_required,
        ncond_ok=n >= n_required,
        mcond_ok=m >= m_required,
    )
