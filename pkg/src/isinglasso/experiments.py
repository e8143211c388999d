"""Simulation harness: scenario generators and the replication grid.

Three synthetic edge patterns are supported (a correlated clique on the
first five vertices, a chain over the first ten, and two four-vertex
blocks), each with random signs.  For every (d, n) cell the harness draws
datasets, runs the chain-based and pseudolikelihood paths over a shared
penalty grid, scores thresholded supports against the truth, and reports
exact-recovery frequencies per grid cell.

Desk-scale defaults keep a full run in minutes; `paper_scale()` restores
the original study sizes (20 sign configurations x 20 replications,
m = 1e5 chain steps, data chains of 1e6 updates).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Iterator, TextIO

import numpy as np

from .edges import edge_index, n_edges
from .gibbs import sample_dataset
from .path import (
    lambda_grid_from_c1,
    run_path,
    run_pl_path,
    selection_metrics,
    threshold_grid_from_c2,
    threshold_support,
)
from .rng import RngSeed, uniform_block
from .solver import SolverOptions

SCENARIO_KINDS = ("M1", "M2", "M3")

_TAG_SIGNS = 11
_TAG_DATA = 12
_TAG_PATH = 13

_C1_DEFAULT = tuple(np.arange(1.0, 4.0 + 1e-9, 0.25).tolist())
_C1_WIDE = tuple(np.arange(1.0, 8.0 + 1e-9, 0.25).tolist())
_C2_DEFAULT = (0.0, 0.04, 0.08, 0.12, 0.16)


@dataclass(frozen=True)
class Scenario:
    """One true parameter draw: pattern, magnitude, and random signs."""

    kind: str
    d: int
    vartheta: float
    sign_seed: RngSeed
    theta_star: np.ndarray
    support: frozenset[int]


def _pattern_edges(kind: str, d: int) -> list[tuple[int, int]]:
    """1-based (r, s) pairs of the true support for the given pattern."""
    if kind == "M1":
        if d < 10:
            raise ValueError("M1 needs d >= 10")
        return [(r, s) for s in range(2, 6) for r in range(1, s)]
    if kind == "M2":
        if d < 10:
            raise ValueError("M2 needs d >= 10")
        return [(r - 1, r) for r in range(2, 11)]
    if kind == "M3":
        if d < 8:
            raise ValueError("M3 needs d >= 8")
        block1 = [(r, s) for s in range(2, 5) for r in range(1, s)]
        block2 = [(r, s) for s in range(6, 9) for r in range(5, s)]
        return block1 + block2
    raise ValueError(f"unknown scenario kind {kind!r}")


def default_vartheta(kind: str) -> float:
    return 2.0 if kind == "M3" else 1.0


def make_scenario(
    kind: str,
    d: int,
    vartheta: float | None = None,
    sign_seed: RngSeed = RngSeed(0),
) -> Scenario:
    """Deterministic true parameter for (kind, d, magnitude, sign seed)."""
    if vartheta is None:
        vartheta = default_vartheta(kind)
    pairs = _pattern_edges(kind, d)
    linear = [edge_index(r, s, d).linear for r, s in pairs]
    signs = np.where(uniform_block(sign_seed.key(), 0, len(linear)) < 0.5, -1.0, 1.0)
    theta = np.zeros(n_edges(d))
    theta[linear] = vartheta * signs
    return Scenario(
        kind=kind,
        d=d,
        vartheta=float(vartheta),
        sign_seed=sign_seed,
        theta_star=theta,
        support=frozenset(linear),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one simulation study; JSON round-trippable."""

    scenario: str
    vartheta: float | None = None
    d_values: tuple[int, ...] = (20,)
    n_values: tuple[int, ...] = (500,)
    sign_configs: int = 20
    reps_per_sign: int = 1
    m: int = 20_000
    burn_in: int | None = None
    data_chain_len: int = 20_000
    c1_grid: tuple[float, ...] | None = None
    c2_grid: tuple[float, ...] = _C2_DEFAULT
    seed: int = 0
    kkt_tol: float = 1e-6
    max_iters: int = 5000

    @property
    def replications(self) -> int:
        return self.sign_configs * self.reps_per_sign

    def resolved_vartheta(self) -> float:
        return (
            self.vartheta if self.vartheta is not None else default_vartheta(self.scenario)
        )

    def resolved_c1(self) -> tuple[float, ...]:
        if self.c1_grid is not None:
            return self.c1_grid
        return _C1_WIDE if self.scenario == "M2" else _C1_DEFAULT

    def paper_scale(self) -> "ExperimentConfig":
        """The original study sizes: 400 runs per cell, long chains."""
        return replace(
            self,
            sign_configs=20,
            reps_per_sign=20,
            m=100_000,
            data_chain_len=1_000_000,
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        unknown = set(raw) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        for key in ("d_values", "n_values", "c1_grid", "c2_grid"):
            if raw.get(key) is not None:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass
class RepOutcome:
    """Per-replication recovery grid for one method (c1 rows, c2 columns)."""

    method: str
    exact: np.ndarray  # bool (n_c1, n_c2)
    true_pos: np.ndarray  # int (n_c1, n_c2)
    false_pos: np.ndarray  # int (n_c1, n_c2)
    failed_steps: np.ndarray  # bool (n_c1,)


@dataclass
class CellTable:
    """Aggregated exact-recovery frequencies for one (d, n) cell."""

    d: int
    n: int
    c1_grid: tuple[float, ...]
    c2_grid: tuple[float, ...]
    frequency: dict[str, np.ndarray]  # method -> (n_c1, n_c2)
    completed: dict[str, np.ndarray]  # method -> (n_c1,) replication counts
    failures: dict[str, int]

    def best_cell(self, method: str, thresholded: bool) -> tuple[float, float, float]:
        """(c1, c2, frequency) of the best grid cell; plain uses only c2 = 0."""
        freq = self.frequency[method]
        if thresholded:
            flat = int(np.argmax(freq))
            i, j = divmod(flat, freq.shape[1])
        else:
            col = [j for j, c2 in enumerate(self.c2_grid) if c2 == 0.0]
            if not col:
                raise ValueError("plain selection needs c2 = 0 in the grid")
            j = col[0]
            i = int(np.argmax(freq[:, j]))
        return self.c1_grid[i], self.c2_grid[j], float(freq[i, j])


def _evaluate_path(steps, scenario: Scenario, deltas: np.ndarray):
    n_c1 = len(steps)
    n_c2 = deltas.shape[0]
    exact = np.zeros((n_c1, n_c2), dtype=bool)
    tp = np.zeros((n_c1, n_c2), dtype=np.int64)
    fp = np.zeros((n_c1, n_c2), dtype=np.int64)
    failed = np.zeros(n_c1, dtype=bool)
    d_bar = n_edges(scenario.d)
    for i, step in enumerate(steps):
        if step.failed:
            failed[i] = True
            continue
        for j, delta in enumerate(deltas):
            got = threshold_support(step.theta, float(delta))
            metrics = selection_metrics(got, scenario.support, d_bar)
            exact[i, j] = bool(metrics.exact_recovery)
            tp[i, j] = metrics.true_positives
            fp[i, j] = metrics.false_positives
    return exact, tp, fp, failed


def run_replication(
    cfg: ExperimentConfig, d: int, n: int, rep: int
) -> dict[str, RepOutcome]:
    """One dataset scored by both methods over the full (c1, c2) grid.

    The c1 grid is walked largest-penalty-first (warm starts); row order in
    the outcome matches cfg.resolved_c1() ascending.
    """
    base = RngSeed(cfg.seed)
    sign_idx = rep // cfg.reps_per_sign
    scenario = make_scenario(
        cfg.scenario,
        d,
        cfg.resolved_vartheta(),
        sign_seed=base.split(_TAG_SIGNS, d, n, sign_idx),
    )
    data = sample_dataset(
        scenario.theta_star,
        n,
        chain_len=cfg.data_chain_len,
        seed=base.split(_TAG_DATA, d, n, rep),
    )
    c1 = np.asarray(cfg.resolved_c1(), dtype=np.float64)
    if c1.size == 0 or np.any(np.diff(c1) <= 0):
        raise ValueError("c1 grid must be strictly increasing")
    lambdas = lambda_grid_from_c1(c1, d, n)  # descending; c1 descending too
    deltas = threshold_grid_from_c2(np.asarray(cfg.c2_grid), d, n)
    opts = SolverOptions(max_iters=cfg.max_iters, kkt_tol=cfg.kkt_tol)

    mc = run_path(
        data,
        lambdas,
        m=cfg.m,
        burn_in=cfg.burn_in,
        opts=opts,
        seed=base.split(_TAG_PATH, d, n, rep),
    )
    pl = run_pl_path(data, lambdas, opts=opts)

    out = {}
    for method, path_result in (("mcmc", mc), ("pl", pl)):
        exact, tp, fp, failed = _evaluate_path(path_result.steps, scenario, deltas)
        # flip back to ascending c1 order
        out[method] = RepOutcome(
            method=method,
            exact=exact[::-1],
            true_pos=tp[::-1],
            false_pos=fp[::-1],
            failed_steps=failed[::-1],
        )
    return out


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: list[CellTable]

    def summary_rows(self) -> list[dict]:
        rows = []
        for cell in self.cells:
            for method in ("pl", "mcmc"):
                for estimator in ("lasso", "thresholded"):
                    c1, c2, freq = cell.best_cell(method, estimator == "thresholded")
                    rows.append(
                        {
                            "method": method,
                            "estimator": estimator,
                            "d": cell.d,
                            "n": cell.n,
                            "c1": c1,
                            "c2": c2,
                            "frequency": freq,
                            "failures": cell.failures[method],
                        }
                    )
        return rows


def _raw_rows(
    cfg: ExperimentConfig, d: int, n: int, rep: int, outcomes: dict[str, RepOutcome]
) -> Iterator[str]:
    c1s = cfg.resolved_c1()
    c2s = cfg.c2_grid
    for method in ("pl", "mcmc"):
        out = outcomes[method]
        for i, c1 in enumerate(c1s):
            if out.failed_steps[i]:
                yield f"{d}\t{n}\t{rep}\t{method}\t{c1:.17g}\t\t\t\t\tfailed"
                continue
            for j, c2 in enumerate(c2s):
                yield (
                    f"{d}\t{n}\t{rep}\t{method}\t{c1:.17g}\t{c2:.17g}\t"
                    f"{int(out.exact[i, j])}\t{int(out.true_pos[i, j])}\t"
                    f"{int(out.false_pos[i, j])}\tok"
                )


RAW_HEADER = "d\tn\trep\tmethod\tc1\tc2\texact\ttp\tfp\tstatus"


def run_experiment(
    cfg: ExperimentConfig,
    threads: int = 1,
    raw_stream: TextIO | None = None,
    progress: bool = False,
) -> ExperimentResult:
    """Run every (d, n) cell of the study; aggregation is order-independent.

    Replications execute on a thread pool with pre-assigned seed streams,
    and raw rows stream in replication order, so outputs are byte-stable at
    any thread count.
    """
    if raw_stream is not None:
        raw_stream.write(RAW_HEADER + "\n")
    cells = []
    reps = cfg.replications
    c1s = cfg.resolved_c1()
    c2s = cfg.c2_grid
    for d in cfg.d_values:
        for n in cfg.n_values:
            with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
                futures = [
                    pool.submit(run_replication, cfg, d, n, rep) for rep in range(reps)
                ]
                freq = {m: np.zeros((len(c1s), len(c2s))) for m in ("pl", "mcmc")}
                completed = {
                    m: np.zeros(len(c1s), dtype=np.int64) for m in ("pl", "mcmc")
                }
                failures = {m: 0 for m in ("pl", "mcmc")}
                for rep, fut in enumerate(futures):
                    outcomes = fut.result()
                    for method, out in outcomes.items():
                        ok = ~out.failed_steps
                        completed[method] += ok
                        failures[method] += int(out.failed_steps.sum())
                        freq[method][ok] += out.exact[ok]
                    if raw_stream is not None:
                        for line in _raw_rows(cfg, d, n, rep, outcomes):
                            raw_stream.write(line + "\n")
                        raw_stream.flush()
                    if progress:
                        print(f"cell d={d} n={n}: replication {rep + 1}/{reps} done")
            for method in ("pl", "mcmc"):
                denom = np.maximum(completed[method], 1)[:, None]
                freq[method] = freq[method] / denom
            cells.append(
                CellTable(
                    d=d,
                    n=n,
                    c1_grid=tuple(c1s),
                    c2_grid=tuple(c2s),
                    frequency=freq,
                    completed=completed,
                    failures=failures,
                )
            )
    return ExperimentResult(config=cfg, cells=cells)
