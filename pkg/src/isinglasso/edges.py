"""Edge indexing and pairwise sufficient statistics for binary graphs.

A configuration is a vector y in {-1,+1}^d.  The model works with the
pairwise products y(r)*y(s) collected over the d*(d-1)/2 unordered vertex
pairs; every module in the package shares the canonical edge ordering
defined here: row-major over pairs (r, s) with r < s, i.e.
(1,2), (1,3), ..., (1,d), (2,3), ...

Vertices are 1-based in file formats and in :func:`edge_index` /
:func:`edge_pair` (the bridge to those formats); everything else in the
package indexes vertices from 0.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np


class EdgeIndex(NamedTuple):
    """One vertex pair (1-based, r < s) with its canonical linear position."""

    r: int
    s: int
    linear: int


def n_edges(d: int) -> int:
    """Number of unordered vertex pairs for d vertices."""
    return d * (d - 1) // 2


def n_vertices(d_bar: int) -> int:
    """Inverse of :func:`n_edges`; rejects lengths that are not d*(d-1)/2."""
    d = int((1 + np.sqrt(1 + 8 * d_bar)) / 2 + 0.5)
    if n_edges(d) != d_bar:
        raise ValueError(f"{d_bar} is not d*(d-1)/2 for any integer d")
    return d


def edge_index(r: int, s: int, d: int) -> EdgeIndex:
    """Canonical linear position of the pair (r, s), 1-based, r < s."""
    if not (1 <= r < s <= d):
        raise ValueError(f"need 1 <= r < s <= d, got r={r}, s={s}, d={d}")
    r0, s0 = r - 1, s - 1
    linear = r0 * (2 * d - r0 - 1) // 2 + (s0 - r0 - 1)
    return EdgeIndex(r, s, linear)


def edge_pair(linear: int, d: int) -> EdgeIndex:
    """Inverse of :func:`edge_index` for a linear position in [0, d*(d-1)/2)."""
    if not (0 <= linear < n_edges(d)):
        raise ValueError(f"linear index {linear} out of range for d={d}")
    er, es = edge_ends(d)
    return EdgeIndex(int(er[linear]) + 1, int(es[linear]) + 1, linear)


@lru_cache(maxsize=None)
def edge_ends(d: int) -> tuple[np.ndarray, np.ndarray]:
    """0-based endpoint arrays (er, es) of every edge in canonical order."""
    er, es = np.triu_indices(d, k=1)
    er = er.astype(np.int32)
    es = es.astype(np.int32)
    er.setflags(write=False)
    es.setflags(write=False)
    return er, es


@lru_cache(maxsize=None)
def site_tables(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-site lookup tables used by the incremental score updates.

    Returns (edge_of, other) with shape (d, d-1): row r lists, with the
    other endpoint ascending, the linear index of every edge touching r
    and that other endpoint.
    """
    edge_of = np.empty((d, d - 1), dtype=np.int32)
    other = np.empty((d, d - 1), dtype=np.int32)
    for r in range(d):
        cols = [s for s in range(d) if s != r]
        other[r] = cols
        for j, s in enumerate(cols):
            lo, hi = (r, s) if r < s else (s, r)
            edge_of[r, j] = lo * (2 * d - lo - 1) // 2 + (hi - lo - 1)
    edge_of.setflags(write=False)
    other.setflags(write=False)
    return edge_of, other


def suff_stat(y: np.ndarray) -> np.ndarray:
    """Pairwise products (y(r)*y(s))_{r<s} in canonical order, entries +-1."""
    y = np.asarray(y)
    er, es = edge_ends(y.shape[0])
    return (y[er] * y[es]).astype(np.int8)


def edge_score(theta: np.ndarray, y: np.ndarray) -> float:
    """Inner product of an edge parameter vector with the pair products of y."""
    theta = np.asarray(theta, dtype=np.float64)
    d = n_vertices(theta.shape[0])
    if y.shape[0] != d:
        raise ValueError(f"config has {y.shape[0]} sites, parameter implies {d}")
    return float(theta @ suff_stat(y))


def incremental_edge_score(
    prev: float,
    theta: np.ndarray,
    y_prev: np.ndarray,
    site: int,
    new_value: int,
) -> float:
    """Score after overwriting one site, in O(d) instead of O(d^2).

    `site` is 0-based.  Only the d-1 pair products touching `site` can
    change, and each changes by (new - old) * y(other), so the update is
    prev + (new - old) * sum_{s != site} theta_{site,s} y(s).
    """
    d = y_prev.shape[0]
    if not 0 <= site < d:
        raise ValueError(f"site {site} out of range for d={d}")
    if new_value not in (-1, 1):
        raise ValueError(f"spin value must be -1 or +1, got {new_value}")
    edge_of, other = site_tables(d)
    a = float(theta[edge_of[site]] @ y_prev[other[site]])
    return prev + (new_value - int(y_prev[site])) * a
