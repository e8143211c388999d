"""File formats and run manifests.

Parameter vectors travel as TSV (header `r	s	value`, 1-based vertex ids,
r < s, omitted pairs are zero); datasets as header-less CSV with one +-1
row per observation.  Every CLI run writes a JSON manifest next to its
outputs with the resolved configuration, seeds, and content digests, which
is enough to reproduce the outputs byte-for-byte.

All writes are atomic (temp file + rename) so interrupted runs never leave
truncated tables behind.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .edges import edge_index, edge_pair, n_edges

FORMAT_FLOAT = "%.17g"


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_theta_tsv(path: str | Path, theta: np.ndarray, d: int) -> None:
    """Sparse edge-parameter TSV; only nonzero entries are written."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape[0] != n_edges(d):
        raise ValueError(f"theta has length {theta.shape[0]}, expected {n_edges(d)}")
    lines = ["r\ts\tvalue"]
    for linear in np.flatnonzero(theta):
        e = edge_pair(int(linear), d)
        lines.append(f"{e.r}\t{e.s}\t{FORMAT_FLOAT % theta[linear]}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_theta_tsv(path: str | Path, d: int | None = None) -> tuple[np.ndarray, int]:
    """Read an edge-parameter TSV; infers d from the largest vertex if omitted."""
    rows = []
    with open(path) as handle:
        header = handle.readline()
        if header.strip().lower().split("\t") != ["r", "s", "value"]:
            raise ValueError(f"{path}: expected header 'r\\ts\\tvalue'")
        for ln, line in enumerate(handle, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{ln}: expected 3 tab-separated fields")
            r, s, value = int(parts[0]), int(parts[1]), float(parts[2])
            if not r < s:
                raise ValueError(f"{path}:{ln}: need r < s, got ({r}, {s})")
            rows.append((r, s, value))
    if d is None:
        d = max((s for _, s, _ in rows), default=2)
    theta = np.zeros(n_edges(d))
    for r, s, value in rows:
        theta[edge_index(r, s, d).linear] = value
    return theta, d


def write_dataset_csv(path: str | Path, data: np.ndarray) -> None:
    data = np.asarray(data)
    if data.ndim != 2 or not np.all(np.abs(data) == 1):
        raise ValueError("dataset must be an (n, d) matrix of +-1 entries")
    lines = [",".join(str(int(v)) for v in row) for row in data]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_dataset_csv(path: str | Path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
    if not np.all(np.abs(data) == 1):
        raise ValueError(f"{path}: dataset entries must be -1 or 1")
    return data.astype(np.int8)


def sha256_of(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    manifest_path: str | Path,
    subcommand: str,
    config: dict,
    inputs: list[str | Path],
    outputs: list[str | Path],
    started: datetime,
) -> None:
    """Record everything needed to bit-reproduce the run."""
    from . import __version__

    manifest = {
        "subcommand": subcommand,
        "config": config,
        "library_version": __version__,
        "backend": _backend_name(),
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "inputs": {str(p): sha256_of(p) for p in inputs},
        "outputs": {str(p): sha256_of(p) for p in outputs},
    }
    atomic_write_text(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _backend_name() -> str:
    from .backend import BACKEND

    return BACKEND


def manifest_path_for(output: str | Path) -> Path:
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")
