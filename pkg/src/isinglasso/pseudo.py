"""Pseudolikelihood baseline: product of per-site conditionals.

Each conditional is free of the intractable normalizer and logistic in
form, so the negative log-pseudolikelihood and its gradient cost O(n d^2)
dense matrix work per evaluation.
"""

from __future__ import annotations

import numpy as np

from .edges import edge_ends, n_vertices


def theta_matrix(theta: np.ndarray, d: int | None = None) -> np.ndarray:
    """Symmetric zero-diagonal (d, d) coupling matrix from the edge vector."""
    theta = np.asarray(theta, dtype=np.float64)
    if d is None:
        d = n_vertices(theta.shape[0])
    er, es = edge_ends(d)
    mat = np.zeros((d, d))
    mat[er, es] = theta
    mat[es, er] = theta
    return mat


def conditional_prob(theta: np.ndarray, y: np.ndarray, site: int) -> float:
    """P(Y(site) = +1 | the other spins) under the model at theta; 0-based site.

    Equals 1 / (1 + exp(-2 a)) with a = sum_{r != site} theta_{r,site} y(r):
    the logistic regression form with the other spins as covariates.
    """
    d = y.shape[0]
    if not 0 <= site < d:
        raise ValueError(f"site {site} out of range for d={d}")
    mat = theta_matrix(theta, d)
    a = float(mat[:, site] @ y)  # diagonal is zero, so y(site) drops out
    return 0.5 * (1.0 + np.tanh(a))


class PlObjective:
    """Negative log-pseudolikelihood and gradient on a frozen dataset."""

    def __init__(self, data: np.ndarray):
        data = np.asarray(data)
        if data.ndim != 2 or data.shape[0] < 1:
            raise ValueError("data must be a nonempty (n, d) matrix")
        self.n, self.d = data.shape
        self._y = data.astype(np.float64)
        self._er, self._es = edge_ends(self.d)

    def _margins(self, theta: np.ndarray) -> np.ndarray:
        """z[i, s] = Y_i(s) * activation_{i,s}; the per-conditional margin."""
        act = self._y @ theta_matrix(theta, self.d)
        return self._y * act

    def value(self, theta: np.ndarray) -> float:
        z = self._margins(theta)
        return float(np.logaddexp(0.0, -2.0 * z).sum() / self.n)

    def grad(self, theta: np.ndarray) -> np.ndarray:
        z = self._margins(theta)
        # d/da of log(1+exp(-2 y a)) is -2 y sigma(-2 y a)
        b = (-2.0 / self.n) * self._y * (0.5 * (1.0 + np.tanh(-z)))
        g = self._y.T @ b
        return g[self._er, self._es] + g[self._es, self._er]

    def value_grad(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        z = self._margins(theta)
        value = float(np.logaddexp(0.0, -2.0 * z).sum() / self.n)
        b = (-2.0 / self.n) * self._y * (0.5 * (1.0 + np.tanh(-z)))
        g = self._y.T @ b
        return value, g[self._er, self._es] + g[self._es, self._er]


def pl_nll(theta: np.ndarray, data: np.ndarray) -> float:
    return PlObjective(data).value(theta)


def pl_grad(theta: np.ndarray, data: np.ndarray) -> np.ndarray:
    return PlObjective(data).grad(theta)
