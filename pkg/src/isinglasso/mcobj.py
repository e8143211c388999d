"""Monte-Carlo approximation of the negative log-likelihood.

With a chain Y^1..Y^m stationary at the instrumental parameter psi, the
intractable normalizer is replaced by an importance-sampling average, and
(up to an additive constant that does not depend on theta) the objective
becomes

    value(theta) = -theta' mean_i J(Y_i) + logsumexp_k (theta-psi)' J(Y^k) - log m.

Log-domain weights with max subtraction keep the softmax stable however far
theta drifts from psi; the effective sample size of the weights is exposed
as a staleness diagnostic.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import backend
from .edges import edge_ends, n_edges
from .gibbs import MarkovSample

ESS_WARN_FRACTION = 0.01

_HESS_CHUNK = 8192


class WeightDegeneracyError(RuntimeError):
    """Importance weights collapsed; the instrumental parameter is unusable."""


class LowEffectiveSampleWarning(UserWarning):
    """ESS of the importance weights fell below the staleness threshold."""


def data_suffstat_mean(data: np.ndarray) -> np.ndarray:
    """Mean of J over the observations: entry (r,s) is mean_i Y_i(r) Y_i(s)."""
    data = np.asarray(data)
    n, d = data.shape
    y = data.astype(np.float64)
    gram = (y.T @ y) / n
    er, es = edge_ends(d)
    return gram[er, es]


class McObjective:
    """Value/gradient/Hessian of the chain-approximated likelihood.

    The chain is frozen for the lifetime of the object; repeated
    evaluations at one point share the replayed per-step scores.
    """

    def __init__(self, data: np.ndarray, sample: MarkovSample):
        data = np.asarray(data)
        if data.ndim != 2:
            raise ValueError("data must be an (n, d) matrix")
        if data.shape[1] != sample.d:
            raise ValueError(
                f"data has d={data.shape[1]} but the sample has d={sample.d}"
            )
        if sample.m < 1:
            raise ValueError("the chain sample is empty")
        self.d = sample.d
        self.d_bar = n_edges(self.d)
        self.m = sample.m
        self.psi = np.asarray(sample.psi, dtype=np.float64)
        self.data_mean = data_suffstat_mean(data)
        self.sample = sample
        self._eval = backend.ChainEvaluator(
            self.d, sample.start, sample.sites, sample.newvals
        )
        self._cache_theta: np.ndarray | None = None
        self._cache: tuple | None = None

    def _weights(self, theta: np.ndarray):
        """(scores, logsumexp, normalized weights, ess) at theta, cached."""
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.d_bar,):
            raise ValueError(f"theta must have length {self.d_bar}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta contains non-finite entries")
        if self._cache_theta is not None and np.array_equal(
            self._cache_theta, theta
        ):
            return self._cache
        with np.errstate(over="ignore"):  # overflow lands in the check below
            s = self._eval.scores(theta - self.psi)
        if not np.all(np.isfinite(s)):
            raise WeightDegeneracyError(
                "non-finite importance log-weights; instrumental parameter "
                "is too far from theta"
            )
        smax = float(s.max())
        w = np.exp(s - smax)
        total = float(w.sum())
        if not math.isfinite(total) or total <= 0.0:
            raise WeightDegeneracyError("importance weights sum to zero")
        lse = smax + math.log(total)
        wnorm = w / total
        ess = 1.0 / float(wnorm @ wnorm)
        if ess < ESS_WARN_FRACTION * self.m:
            warnings.warn(
                f"effective sample size {ess:.1f} of {self.m} chain steps; "
                "the instrumental parameter looks stale",
                LowEffectiveSampleWarning,
                stacklevel=3,
            )
        self._cache_theta = theta.copy()
        self._cache = (s, lse, wnorm, ess)
        return self._cache

    def value(self, theta: np.ndarray) -> float:
        _, lse, _, _ = self._weights(theta)
        theta = np.asarray(theta, dtype=np.float64)
        return -float(theta @ self.data_mean) + lse - math.log(self.m)

    def grad(self, theta: np.ndarray) -> np.ndarray:
        _, _, wnorm, _ = self._weights(theta)
        return self._eval.weighted_mean(wnorm) - self.data_mean

    def ess(self, theta: np.ndarray) -> float:
        return self._weights(theta)[3]

    def hessian(self, theta: np.ndarray) -> np.ndarray:
        """Weighted covariance of J over the chain (symmetric PSD).

        Dense d_bar x d_bar accumulation over state chunks; meant for
        moderate d, not the solver hot path.
        """
        _, _, wnorm, _ = self._weights(theta)
        states = self.sample.states()
        er, es = edge_ends(self.d)
        mean = np.zeros(self.d_bar)
        second = np.zeros((self.d_bar, self.d_bar))
        for lo in range(0, self.m, _HESS_CHUNK):
            hi = min(lo + _HESS_CHUNK, self.m)
            block = states[lo:hi]
            j = block[:, er].astype(np.float64) * block[:, es]
            w = wnorm[lo:hi]
            mean += j.T @ w
            second += j.T @ (w[:, None] * j)
        h = second - np.outer(mean, mean)
        return (h + h.T) / 2.0


def mc_nll(theta: np.ndarray, state: McObjective) -> float:
    return state.value(theta)


def mc_grad(theta: np.ndarray, state: McObjective) -> np.ndarray:
    return state.grad(theta)


def mc_hessian(theta: np.ndarray, state: McObjective) -> np.ndarray:
    return state.hessian(theta)
