"""Warm-started penalty paths and support selection.

The chain-based path walks a decreasing penalty grid; at every step it
simulates a fresh Gibbs chain whose stationary law sits at the previous
solution (the instrumental refresh), solves the penalized problem
warm-started from that solution, and rolls forward.  The pseudolikelihood
path reuses the identical grid and solver with no chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .edges import n_edges
from .gibbs import MarkovSample, run_chain
from .mcobj import McObjective, WeightDegeneracyError
from .pseudo import PlObjective
from .rng import RngSeed
from .solver import FitResult, SolverDivergenceError, SolverOptions, fista

_TAG_STEP = 3


@dataclass
class PathStep:
    lam: float
    theta: np.ndarray
    psi: np.ndarray | None
    kkt_violation: float
    iterations: int
    converged: bool
    failed: bool
    objective: float
    ess: float | None = None
    seed: RngSeed | None = None


@dataclass
class PathResult:
    d: int
    lambdas: np.ndarray
    steps: list[PathStep] = field(default_factory=list)

    @property
    def thetas(self) -> list[np.ndarray]:
        return [s.theta for s in self.steps]

    @property
    def psi_trace(self) -> list[np.ndarray | None]:
        return [s.psi for s in self.steps]


def lambda_grid_from_c1(c1_values, d: int, n: int) -> np.ndarray:
    """Penalty grid lambda = c1 * sqrt(log(d (d-1)) / n), largest first."""
    c1 = np.unique(np.asarray(c1_values, dtype=np.float64))[::-1]
    if c1.size == 0 or c1[-1] <= 0:
        raise ValueError("c1 values must be positive")
    return c1 * math.sqrt(math.log(d * (d - 1)) / n)


def threshold_grid_from_c2(c2_values, d: int, n: int) -> np.ndarray:
    """Threshold grid delta = c2 * sqrt(log(d (d-1)) / n), ascending."""
    c2 = np.asarray(c2_values, dtype=np.float64)
    if np.any(c2 < 0):
        raise ValueError("c2 values must be nonnegative")
    return c2 * math.sqrt(math.log(d * (d - 1)) / n)


def _check_lambdas(lambdas) -> np.ndarray:
    lambdas = np.asarray(lambdas, dtype=np.float64)
    if lambdas.ndim != 1 or lambdas.size == 0:
        raise ValueError("need a nonempty 1-d penalty grid")
    if np.any(lambdas <= 0):
        raise ValueError("penalties must be positive")
    if np.any(np.diff(lambdas) >= 0):
        raise ValueError("penalty grid must be strictly decreasing")
    return lambdas


def lambda_max(data: np.ndarray, sample0: MarkovSample) -> float:
    """Smallest penalty at which the all-zero vector is already optimal.

    sample0 must be a chain at the zero instrumental parameter; the value
    is the sup-norm of the objective gradient at zero.
    """
    if np.any(sample0.psi != 0.0):
        raise ValueError("sample0 must be generated at the zero parameter")
    obj = McObjective(data, sample0)
    return float(np.abs(obj.grad(np.zeros(obj.d_bar))).max())


def run_path(
    data: np.ndarray,
    lambdas,
    m: int,
    burn_in: int | None = None,
    opts: SolverOptions | None = None,
    seed: RngSeed = RngSeed(0),
) -> PathResult:
    """Chain-based penalty path with warm starts and instrumental refresh.

    Each step simulates a fresh chain stationary at the previous solution
    (zero for the first step), fits at the current penalty, and feeds the
    solution forward.  A failed solve marks its step and keeps the previous
    instrumental parameter so the rest of the path continues.
    """
    lambdas = _check_lambdas(lambdas)
    data = np.asarray(data)
    d = data.shape[1]
    d_bar = n_edges(d)
    opts = opts if opts is not None else SolverOptions()

    psi = np.zeros(d_bar)
    warm = np.zeros(d_bar)
    result = PathResult(d=d, lambdas=lambdas)
    for i, lam in enumerate(lambdas):
        step_seed = seed.split(_TAG_STEP, i)
        sample = run_chain(psi, m=m, burn_in=burn_in, seed=step_seed)
        obj = McObjective(data, sample)
        psi_used = psi.copy()
        try:
            fit: FitResult = fista(obj.value, obj.grad, float(lam), warm, opts)
            ess = obj.ess(fit.theta)
        except (SolverDivergenceError, WeightDegeneracyError):
            result.steps.append(
                PathStep(
                    lam=float(lam),
                    theta=warm.copy(),
                    psi=psi_used,
                    kkt_violation=math.inf,
                    iterations=0,
                    converged=False,
                    failed=True,
                    objective=math.nan,
                    ess=None,
                    seed=step_seed,
                )
            )
            continue
        result.steps.append(
            PathStep(
                lam=float(lam),
                theta=fit.theta,
                psi=psi_used,
                kkt_violation=fit.kkt_violation,
                iterations=fit.iterations,
                converged=fit.converged,
                failed=False,
                objective=fit.objective,
                ess=ess,
                seed=step_seed,
            )
        )
        warm = fit.theta
        psi = fit.theta
    return result


def run_pl_path(
    data: np.ndarray,
    lambdas,
    opts: SolverOptions | None = None,
) -> PathResult:
    """Warm-started pseudolikelihood path over the same penalty grid."""
    lambdas = _check_lambdas(lambdas)
    obj = PlObjective(data)
    opts = opts if opts is not None else SolverOptions()
    warm = np.zeros(n_edges(obj.d))
    result = PathResult(d=obj.d, lambdas=lambdas)
    for lam in lambdas:
        try:
            fit = fista(obj.value, obj.grad, float(lam), warm, opts)
        except SolverDivergenceError:
            result.steps.append(
                PathStep(
                    lam=float(lam),
                    theta=warm.copy(),
                    psi=None,
                    kkt_violation=math.inf,
                    iterations=0,
                    converged=False,
                    failed=True,
                    objective=math.nan,
                )
            )
            continue
        result.steps.append(
            PathStep(
                lam=float(lam),
                theta=fit.theta,
                psi=None,
                kkt_violation=fit.kkt_violation,
                iterations=fit.iterations,
                converged=fit.converged,
                failed=False,
                objective=fit.objective,
            )
        )
        warm = fit.theta
    return result


def threshold_support(theta: np.ndarray, delta: float) -> frozenset[int]:
    """Linear edge indices with |theta| strictly above delta."""
    if delta < 0:
        raise ValueError("threshold must be nonnegative")
    return frozenset(np.flatnonzero(np.abs(theta) > delta).tolist())


@dataclass(frozen=True)
class SelectionMetrics:
    exact_recovery: int
    true_positives: int
    false_positives: int
    true_positive_rate: float
    false_positive_rate: float


def selection_metrics(
    est: frozenset[int] | set[int],
    truth: frozenset[int] | set[int],
    d_bar: int,
) -> SelectionMetrics:
    """Support-recovery score of an estimated edge set against the truth."""
    est = frozenset(est)
    truth = frozenset(truth)
    if est and (min(est) < 0 or max(est) >= d_bar):
        raise ValueError("estimated support out of range")
    if truth and (min(truth) < 0 or max(truth) >= d_bar):
        raise ValueError("true support out of range")
    tp = len(est & truth)
    fp = len(est - truth)
    negatives = d_bar - len(truth)
    return SelectionMetrics(
        exact_recovery=int(est == truth),
        true_positives=tp,
        false_positives=fp,
        true_positive_rate=tp / len(truth) if truth else 1.0,
        false_positive_rate=fp / negatives if negatives else 0.0,
    )
