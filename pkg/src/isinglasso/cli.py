"""Command-line entry point.

Subcommands: sample-data, fit-mc, fit-pl, path, experiment, oracle.  Every
run that writes files also writes a manifest (resolved configuration,
seeds, digests) next to them.  Exit codes: 0 success, 1 usage or input
error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, dataio
from .backend import BACKEND
from .edges import n_edges
from .experiments import ExperimentConfig, run_experiment
from .gibbs import DEFAULT_DATA_CHAIN_LEN, run_chain, sample_dataset
from .mcobj import McObjective, WeightDegeneracyError
from .oracle import (
    cone_factor,
    exact_nll_grad_hess,
    gibbs_spectral_constants,
    importance_ratio_bound,
    log_norming_constant,
    norming_constant,
    theorem_report,
)
from .path import (
    lambda_grid_from_c1,
    run_path,
    run_pl_path,
    threshold_support,
)
from .pseudo import PlObjective
from .rng import RngSeed
from .solver import SolverDivergenceError, SolverOptions, fista

USAGE_ERROR = 1
NUMERICAL_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _now():
    return datetime.now(timezone.utc)


def _read_data(path: str) -> np.ndarray:
    try:
        return dataio.read_dataset_csv(path)
    except OSError as exc:
        raise SystemExit(f"cannot read dataset {path}: {exc}") from exc


def _read_theta(path: str, d: int | None) -> tuple[np.ndarray, int]:
    try:
        return dataio.read_theta_tsv(path, d)
    except OSError as exc:
        raise SystemExit(f"cannot read parameters {path}: {exc}") from exc


def _parse_grid(text: str) -> list[float]:
    """Either comma-separated values or start:stop:step (inclusive stop)."""
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        return np.arange(start, stop + 1e-9, step).tolist()
    return [float(p) for p in text.split(",")]


def _solver_opts(args) -> SolverOptions:
    return SolverOptions(
        max_iters=args.max_iters,
        kkt_tol=args.kkt_tol,
        active_set=getattr(args, "active_set", False),
    )


def _add_solver_flags(sub):
    sub.add_argument("--kkt-tol", type=float, default=1e-6)
    sub.add_argument("--max-iters", type=int, default=5000)
    sub.add_argument("--active-set", action="store_true")


def _cmd_sample_data(args) -> int:
    started = _now()
    theta, d = _read_theta(args.theta, args.d)
    data = sample_dataset(
        theta, args.n, chain_len=args.chain_len, seed=RngSeed(args.seed)
    )
    dataio.write_dataset_csv(args.out, data)
    dataio.write_manifest(
        dataio.manifest_path_for(args.out),
        "sample-data",
        {
            "theta": args.theta,
            "n": args.n,
            "d": d,
            "chain_len": args.chain_len,
            "seed": args.seed,
            "out": args.out,
        },
        inputs=[args.theta],
        outputs=[args.out],
        started=started,
    )
    print(f"wrote {args.n} observations of d={d} to {args.out}")
    return 0


def _fit_common(args, out_theta: np.ndarray, d: int, diagnostics: dict) -> None:
    dataio.write_theta_tsv(args.out, out_theta, d)
    for key, value in diagnostics.items():
        print(f"{key} = {value}")


def _cmd_fit_mc(args) -> int:
    started = _now()
    data = _read_data(args.data)
    d = data.shape[1]
    if args.psi is not None:
        psi, _ = _read_theta(args.psi, d)
    else:
        psi = np.zeros(n_edges(d))
    sample = run_chain(psi, m=args.m, burn_in=args.burn_in, seed=RngSeed(args.seed))
    obj = McObjective(data, sample)
    fit = fista(obj.value, obj.grad, args.lam, np.zeros(n_edges(d)), _solver_opts(args))
    _fit_common(
        args,
        fit.theta,
        d,
        {
            "converged": fit.converged,
            "iterations": fit.iterations,
            "kkt_violation": f"{fit.kkt_violation:.3e}",
            "objective": f"{fit.objective:.6f}",
            "ess": f"{obj.ess(fit.theta):.1f}",
            "nonzero_edges": len(threshold_support(fit.theta, 0.0)),
        },
    )
    dataio.write_manifest(
        dataio.manifest_path_for(args.out),
        "fit-mc",
        {
            "data": args.data,
            "lambda": args.lam,
            "m": args.m,
            "burn_in": args.burn_in,
            "psi": args.psi,
            "seed": args.seed,
            "kkt_tol": args.kkt_tol,
            "max_iters": args.max_iters,
            "out": args.out,
        },
        inputs=[args.data] + ([args.psi] if args.psi else []),
        outputs=[args.out],
        started=started,
    )
    return 0


def _cmd_fit_pl(args) -> int:
    started = _now()
    data = _read_data(args.data)
    d = data.shape[1]
    obj = PlObjective(data)
    fit = fista(obj.value, obj.grad, args.lam, np.zeros(n_edges(d)), _solver_opts(args))
    _fit_common(
        args,
        fit.theta,
        d,
        {
            "converged": fit.converged,
            "iterations": fit.iterations,
            "kkt_violation": f"{fit.kkt_violation:.3e}",
            "objective": f"{fit.objective:.6f}",
            "nonzero_edges": len(threshold_support(fit.theta, 0.0)),
        },
    )
    dataio.write_manifest(
        dataio.manifest_path_for(args.out),
        "fit-pl",
        {
            "data": args.data,
            "lambda": args.lam,
            "kkt_tol": args.kkt_tol,
            "max_iters": args.max_iters,
            "out": args.out,
        },
        inputs=[args.data],
        outputs=[args.out],
        started=started,
    )
    return 0


def _path_tsv(result, d: int) -> str:
    from .edges import edge_pair

    names = [
        "step",
        "lambda",
        "converged",
        "failed",
        "iterations",
        "kkt_violation",
        "ess",
        "objective",
        "nonzero_edges",
    ]
    edge_names = [
        f"theta_{edge_pair(e, d).r}_{edge_pair(e, d).s}" for e in range(n_edges(d))
    ]
    lines = ["\t".join(names + edge_names)]
    for i, step in enumerate(result.steps):
        row = [
            str(i),
            dataio.FORMAT_FLOAT % step.lam,
            str(int(step.converged)),
            str(int(step.failed)),
            str(step.iterations),
            dataio.FORMAT_FLOAT % step.kkt_violation,
            dataio.FORMAT_FLOAT % step.ess if step.ess is not None else "",
            dataio.FORMAT_FLOAT % step.objective,
            str(len(threshold_support(step.theta, 0.0))),
        ]
        row += [dataio.FORMAT_FLOAT % v for v in step.theta]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def _cmd_path(args) -> int:
    started = _now()
    data = _read_data(args.data)
    d = data.shape[1]
    if (args.lambdas is None) == (args.c1_grid is None):
        raise SystemExit("provide exactly one of --lambdas or --c1-grid")
    if args.lambdas is not None:
        lambdas = np.asarray(sorted(_parse_grid(args.lambdas), reverse=True))
    else:
        lambdas = lambda_grid_from_c1(_parse_grid(args.c1_grid), d, data.shape[0])
    if args.method == "mc":
        result = run_path(
            data,
            lambdas,
            m=args.m,
            burn_in=args.burn_in,
            opts=_solver_opts(args),
            seed=RngSeed(args.seed),
        )
    else:
        result = run_pl_path(data, lambdas, opts=_solver_opts(args))
    dataio.atomic_write_text(args.out, _path_tsv(result, d))
    dataio.write_manifest(
        dataio.manifest_path_for(args.out),
        "path",
        {
            "data": args.data,
            "method": args.method,
            "lambdas": [float(v) for v in lambdas],
            "m": args.m,
            "burn_in": args.burn_in,
            "seed": args.seed,
            "kkt_tol": args.kkt_tol,
            "max_iters": args.max_iters,
            "out": args.out,
        },
        inputs=[args.data],
        outputs=[args.out],
        started=started,
    )
    n_failed = sum(s.failed for s in result.steps)
    print(f"path of {len(result.steps)} steps written to {args.out} "
          f"({n_failed} failed)")
    return 0


def _results_tsv(result) -> str:
    header = "method\testimator\td\tn\tc1\tc2\tfrequency\tfailures"
    lines = [header]
    for row in result.summary_rows():
        lines.append(
            f"{row['method']}\t{row['estimator']}\t{row['d']}\t{row['n']}\t"
            f"{row['c1']:.17g}\t{row['c2']:.17g}\t{row['frequency']:.17g}\t"
            f"{row['failures']}"
        )
    return "\n".join(lines) + "\n"


def _cmd_experiment(args) -> int:
    started = _now()
    try:
        cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    except OSError as exc:
        raise SystemExit(f"cannot read config {args.config}: {exc}") from exc
    if args.paper_scale:
        cfg = cfg.paper_scale()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw_path = out_dir / "raw_records.tsv"
    with open(raw_path, "w") as raw:
        result = run_experiment(
            cfg, threads=args.threads, raw_stream=raw, progress=not args.quiet
        )
    results_path = out_dir / "results.tsv"
    dataio.atomic_write_text(results_path, _results_tsv(result))
    summary_path = out_dir / "summary.json"
    summary = {
        "config": json.loads(cfg.to_json()),
        "cells": [
            {
                "d": cell.d,
                "n": cell.n,
                "c1_grid": list(cell.c1_grid),
                "c2_grid": list(cell.c2_grid),
                "frequency": {k: v.tolist() for k, v in cell.frequency.items()},
                "completed": {k: v.tolist() for k, v in cell.completed.items()},
                "failures": cell.failures,
            }
            for cell in result.cells
        ],
    }
    dataio.atomic_write_text(summary_path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    dataio.write_manifest(
        out_dir / "run.manifest.json",
        "experiment",
        {"config": json.loads(cfg.to_json()), "threads": args.threads},
        inputs=[args.config],
        outputs=[raw_path, results_path, summary_path],
        started=started,
    )
    if not args.quiet:
        for row in result.summary_rows():
            print(
                f"{row['method']:>5} {row['estimator']:>11} d={row['d']} "
                f"n={row['n']}: frequency {row['frequency']:.4f} "
                f"at c1={row['c1']}, c2={row['c2']}"
            )
    return 0


def _cmd_oracle(args) -> int:
    what = args.what
    report: dict[str, object] = {}
    if what == "C":
        theta, _ = _read_theta(args.theta, args.d)
        report["C"] = norming_constant(theta)
        report["log_C"] = log_norming_constant(theta)
    elif what == "nll":
        theta, _ = _read_theta(args.theta, args.d)
        data = _read_data(args.data)
        value, grad, hess = exact_nll_grad_hess(theta, data)
        report["nll"] = value
        report["grad_linf"] = float(np.abs(grad).max())
        report["hessian_min_eig"] = float(np.linalg.eigvalsh(hess).min())
    elif what == "spectral":
        theta, _ = _read_theta(args.theta, args.d)
        constants = gibbs_spectral_constants(theta)
        report["kappa"] = constants.kappa
        report["beta1"] = constants.beta1
        report["beta2"] = constants.beta2
    elif what == "M":
        theta, d = _read_theta(args.theta, args.d)
        if args.psi is not None:
            psi, _ = _read_theta(args.psi, d)
        else:
            psi = np.zeros(n_edges(d))
        report["M"] = importance_ratio_bound(theta, psi)
    elif what == "cone":
        theta, d = _read_theta(args.theta, args.d)
        support = frozenset(np.flatnonzero(theta).tolist())
        _, _, hess = exact_nll_grad_hess(theta, np.ones((1, d), dtype=np.int8))
        value = cone_factor(args.xi, support, hess, n_draws=args.draws)
        report["F_upper"] = value
        report["xi"] = args.xi
        report["support_size"] = len(support)
    elif what == "theorem":
        rep = theorem_report(
            xi=args.xi,
            epsilon=args.epsilon,
            n=args.n,
            m=args.m,
            d=args.d,
            d0=args.d0,
            F=args.F,
            M=args.M,
            beta1=args.beta1,
            beta2=args.beta2,
        )
        report.update(
            {
                "alpha": rep.alpha,
                "lambda": rep.lam,
                "R": rep.r_bound,
                "n_required": rep.n_required,
                "m_required": rep.m_required,
                "ncond_ok": rep.ncond_ok,
                "mcond_ok": rep.mcond_ok,
            }
        )
    for key, value in report.items():
        if isinstance(value, float):
            print(f"{key} = {value:.12g}")
        else:
            print(f"{key} = {value}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="isinglasso", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample-data", help="draw i.i.d. observations by Gibbs sampling")
    p.add_argument("--theta", required=True, help="true parameter TSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--chain-len", type=int, default=DEFAULT_DATA_CHAIN_LEN)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample_data)

    p = sub.add_parser("fit-mc", help="penalized chain-approximated likelihood fit")
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--m", type=int, default=100_000)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--psi", default=None, help="instrumental parameter TSV (default 0)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_fit_mc)

    p = sub.add_parser("fit-pl", help="penalized pseudolikelihood fit")
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_fit_pl)

    p = sub.add_parser("path", help="warm-started penalty path")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=("mc", "pl"), default="mc")
    p.add_argument("--lambdas", default=None, help="comma list or start:stop:step")
    p.add_argument("--c1-grid", default=None, help="comma list or start:stop:step")
    p.add_argument("--m", type=int, default=100_000)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_path)

    p = sub.add_parser("experiment", help="replication study over a (c1, c2) grid")
    p.add_argument("--config", required=True, help="ExperimentConfig JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--paper-scale", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("oracle", help="exact small-graph reference quantities")
    p.add_argument(
        "--what", required=True, choices=("C", "nll", "spectral", "M", "cone", "theorem")
    )
    p.add_argument("--theta", default=None)
    p.add_argument("--psi", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--xi", type=float, default=2.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--d0", type=int, default=1)
    p.add_argument("--F", type=float, default=1.0)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--beta1", type=float, default=1.0)
    p.add_argument("--beta2", type=float, default=1.0)
    p.add_argument("--draws", type=int, default=100_000)
    p.set_defaults(func=_cmd_oracle)

    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (SolverDivergenceError, WeightDegeneracyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
