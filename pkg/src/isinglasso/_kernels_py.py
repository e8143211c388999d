"""Pure NumPy/Python backend for the hot loops.

Chain generation follows the identical integer/floating-point recipe as the
compiled backend (same counter-based RNG, same summation order, same libm
exp), so delta-encoded chains are bit-equal across backends.  Replay
evaluation is vectorized over chain steps instead of incrementally updated,
which agrees with the compiled backend to machine precision but not bitwise.
"""

from __future__ import annotations

import math

import numpy as np

from . import rng
from ._replay import materialize_states
from .edges import edge_ends, n_edges

NAME = "pure"

# Full score recomputation cadence; bounds incremental drift.
RECOMPUTE_EVERY = 100_000

_RNG_CHUNK = 8192
_EVAL_CHUNK = 8192
_CACHE_LIMIT = 25_000_000  # cached float64 pair-product entries (~200 MB)


def _full_score(d, ptr, adj_site, adj_val, y):
    """psi' J(y) summed over edges ascending in (r, s); matches compiled order."""
    total = 0.0
    for r in range(d):
        yr = y[r]
        for j in range(ptr[r], ptr[r + 1]):
            s = adj_site[j]
            if s > r:
                total += adj_val[j] * yr * y[s]
    return total


def gibbs_chain(d, nbr_ptr, nbr_site, nbr_val, y0, burn_in, m, key):
    """Run burn_in + m single-site updates; record the last m as deltas.

    Returns (start, sites, newvals, scores, final): `start` is the state
    after burn-in, `scores[k]` is psi' J(state after recorded step k),
    `final` the last state.
    """
    total = burn_in + m
    ptr = [int(v) for v in nbr_ptr]
    adj_site = [int(v) for v in nbr_site]
    adj_val = [float(v) for v in nbr_val]
    y = [int(v) for v in y0]

    sites = np.empty(m, dtype=np.int32)
    newvals = np.empty(m, dtype=np.int8)
    scores = np.empty(m, dtype=np.float64)
    start = np.asarray(y0, dtype=np.int8).copy()

    cur = _full_score(d, ptr, adj_site, adj_val, y)
    exp = math.exp
    ud = np.uint64(d)
    t = 0
    while t < total:
        n_chunk = min(_RNG_CHUNK, total - t)
        raws = rng.raw_block(key, 2 * t, 2 * n_chunk)
        picks = (raws[0::2] % ud).astype(np.int64)
        us = (raws[1::2] >> np.uint64(11)).astype(np.float64) * 2.0**-53
        for i in range(n_chunk):
            r = int(picks[i])
            a = 0.0
            for j in range(ptr[r], ptr[r + 1]):
                a += adj_val[j] * y[adj_site[j]]
            new = 1 if us[i] < 1.0 / (1.0 + exp(-2.0 * a)) else -1
            if new != y[r]:
                y[r] = new
                cur += 2.0 * new * a
            step = t + i
            if (step + 1) % RECOMPUTE_EVERY == 0:
                cur = _full_score(d, ptr, adj_site, adj_val, y)
            if step >= burn_in:
                k = step - burn_in
                sites[k] = r
                newvals[k] = new
                scores[k] = cur
            elif step == burn_in - 1:
                start = np.array(y, dtype=np.int8)
        t += n_chunk

    final = np.array(y, dtype=np.int8)
    return start, sites, newvals, scores, final


class ChainEvaluator:
    """Per-step scores and weighted pair-product means for a frozen chain.

    Materializes the chain once; evaluations are chunked matrix products
    (exact per-state, no incremental drift).
    """

    def __init__(self, d, start, sites, newvals):
        self.d = int(d)
        self.m = int(sites.shape[0])
        self.d_bar = n_edges(self.d)
        self._states = materialize_states(self.d, start, sites, newvals)
        er, es = edge_ends(self.d)
        self._er, self._es = er, es
        if self.m * self.d_bar <= _CACHE_LIMIT:
            s = self._states
            self._pairs = s[:, er].astype(np.float64) * s[:, es]
        else:
            self._pairs = None

    def _pair_chunk(self, lo, hi):
        s = self._states[lo:hi]
        return s[:, self._er].astype(np.float64) * s[:, self._es]

    def scores(self, u):
        """u' J(state_k) for every recorded step k."""
        u = np.asarray(u, dtype=np.float64)
        if self._pairs is not None:
            return self._pairs @ u
        out = np.empty(self.m, dtype=np.float64)
        for lo in range(0, self.m, _EVAL_CHUNK):
            hi = min(lo + _EVAL_CHUNK, self.m)
            out[lo:hi] = self._pair_chunk(lo, hi) @ u
        return out

    def weighted_mean(self, wnorm):
        """sum_k wnorm[k] * J(state_k) for normalized weights wnorm."""
        wnorm = np.asarray(wnorm, dtype=np.float64)
        if self._pairs is not None:
            return self._pairs.T @ wnorm
        acc = np.zeros(self.d_bar, dtype=np.float64)
        for lo in range(0, self.m, _EVAL_CHUNK):
            hi = min(lo + _EVAL_CHUNK, self.m)
            acc += self._pair_chunk(lo, hi).T @ wnorm[lo:hi]
        return acc
