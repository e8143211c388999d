# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled backend for the hot loops.

Mirrors isinglasso._kernels_py exactly: same counter-based RNG, same update
order, same libm exp, so chain generation is bit-equal to the pure backend.
Replay evaluation maintains scores incrementally (O(m*d) per call with a
full recomputation every RECOMPUTE_EVERY steps to bound drift).
"""

from libc.math cimport exp
from libc.stdint cimport int8_t, int32_t, int64_t, uint64_t

import numpy as np

from .edges import edge_ends, n_edges, site_tables

NAME = "compiled"

RECOMPUTE_EVERY = 100_000

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef double INV53 = 1.0 / 9007199254740992.0
cdef long RECOMPUTE = 100_000


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t raw64(uint64_t key, uint64_t counter) noexcept nogil:
    return mix64(key + (counter + 1) * GOLDEN)


cdef double full_score(int d, int64_t[::1] ptr, int32_t[::1] adj_site,
                       double[::1] adj_val, int8_t[::1] y) noexcept nogil:
    cdef double total = 0.0
    cdef double yr
    cdef int r
    cdef int64_t j
    for r in range(d):
        yr = y[r]
        for j in range(ptr[r], ptr[r + 1]):
            if adj_site[j] > r:
                total += adj_val[j] * yr * y[adj_site[j]]
    return total


def gibbs_chain(int d, nbr_ptr, nbr_site, nbr_val, y0, long burn_in, long m,
                key):
    """Run burn_in + m single-site updates; record the last m as deltas.

    Returns (start, sites, newvals, scores, final); see the pure backend
    for the exact contract.
    """
    cdef int64_t[::1] ptr = np.ascontiguousarray(nbr_ptr, dtype=np.int64)
    cdef int32_t[::1] adj_site = np.ascontiguousarray(nbr_site, dtype=np.int32)
    cdef double[::1] adj_val = np.ascontiguousarray(nbr_val, dtype=np.float64)

    y_arr = np.ascontiguousarray(y0, dtype=np.int8).copy()
    cdef int8_t[::1] y = y_arr
    start_arr = y_arr.copy()

    sites_arr = np.empty(m, dtype=np.int32)
    newvals_arr = np.empty(m, dtype=np.int8)
    scores_arr = np.empty(m, dtype=np.float64)
    cdef int32_t[::1] sites = sites_arr
    cdef int8_t[::1] newvals = newvals_arr
    cdef double[::1] scores = scores_arr
    cdef int8_t[::1] start = start_arr

    cdef uint64_t ukey = <uint64_t> (key & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t ud = <uint64_t> d
    cdef long total = burn_in + m
    cdef long step, k
    cdef int r, i, new
    cdef int64_t j
    cdef double a, cur, u2

    cur = full_score(d, ptr, adj_site, adj_val, y)
    with nogil:
        for step in range(total):
            r = <int> (raw64(ukey, 2 * <uint64_t> step) % ud)
            u2 = (raw64(ukey, 2 * <uint64_t> step + 1) >> 11) * INV53
            a = 0.0
            for j in range(ptr[r], ptr[r + 1]):
                a += adj_val[j] * y[adj_site[j]]
            new = 1 if u2 < 1.0 / (1.0 + exp(-2.0 * a)) else -1
            if new != y[r]:
                y[r] = <int8_t> new
                cur += 2.0 * new * a
            if (step + 1) % RECOMPUTE == 0:
                cur = full_score(d, ptr, adj_site, adj_val, y)
            if step >= burn_in:
                k = step - burn_in
                sites[k] = r
                newvals[k] = <int8_t> new
                scores[k] = cur
            elif step == burn_in - 1:
                for i in range(d):
                    start[i] = y[i]

    return start_arr, sites_arr, newvals_arr, scores_arr, y_arr


cdef class ChainEvaluator:
    """Per-step scores and weighted pair-product means for a frozen chain."""

    cdef int d, d_bar
    cdef long m
    cdef int8_t[::1] start
    cdef int32_t[::1] sites
    cdef int8_t[::1] newvals
    cdef int32_t[:, ::1] edge_of
    cdef int32_t[:, ::1] other
    cdef int32_t[::1] er
    cdef int32_t[::1] es

    def __init__(self, int d, start, sites, newvals):
        self.d = d
        self.d_bar = n_edges(d)
        self.m = sites.shape[0]
        self.start = np.ascontiguousarray(start, dtype=np.int8)
        self.sites = np.ascontiguousarray(sites, dtype=np.int32)
        self.newvals = np.ascontiguousarray(newvals, dtype=np.int8)
        edge_of, other = site_tables(d)  # cached tables are read-only: copy
        self.edge_of = np.array(edge_of, dtype=np.int32)
        self.other = np.array(other, dtype=np.int32)
        er, es = edge_ends(d)
        self.er = np.array(er, dtype=np.int32)
        self.es = np.array(es, dtype=np.int32)

    cdef double _full_dot(self, double[::1] u, int8_t[::1] y) noexcept nogil:
        cdef double total = 0.0
        cdef int e
        for e in range(self.d_bar):
            total += u[e] * y[self.er[e]] * y[self.es[e]]
        return total

    def scores(self, u):
        """u' J(state_k) for every recorded step k."""
        cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
        out_arr = np.empty(self.m, dtype=np.float64)
        cdef double[::1] out = out_arr
        y_arr = np.asarray(self.start).copy()
        cdef int8_t[::1] y = y_arr
        cdef long k
        cdef int r, nb, j, v
        cdef double a, cur
        nb = self.d - 1
        cur = self._full_dot(uv, y)
        with nogil:
            for k in range(self.m):
                r = self.sites[k]
                v = self.newvals[k]
                if v != y[r]:
                    a = 0.0
                    for j in range(nb):
                        a += uv[self.edge_of[r, j]] * y[self.other[r, j]]
                    cur += 2.0 * v * a
                    y[r] = <int8_t> v
                if (k + 1) % RECOMPUTE == 0:
                    cur = self._full_dot(uv, y)
                out[k] = cur
        return out_arr

    def weighted_mean(self, wnorm):
        """sum_k wnorm[k] * J(state_k) for normalized weights wnorm.

        Uses the sparse-update identity: the weighted sum equals the total
        weight times J(first state) plus, for every later flip, the suffix
        weight times the change in J at that flip.
        """
        cdef double[::1] w = np.ascontiguousarray(wnorm, dtype=np.float64)
        acc_arr = np.zeros(self.d_bar, dtype=np.float64)
        cdef double[::1] acc = acc_arr
        suffix_arr = np.empty(self.m, dtype=np.float64)
        cdef double[::1] suffix = suffix_arr
        y_arr = np.asarray(self.start).copy()
        cdef int8_t[::1] y = y_arr
        cdef long k
        cdef int r, nb, j, v, e
        cdef double run, coef

        nb = self.d - 1
        with nogil:
            run = 0.0
            for k in range(self.m - 1, -1, -1):
                run += w[k]
                suffix[k] = run
            # step 0 establishes the base state
            r = self.sites[0]
            v = self.newvals[0]
            if v != y[r]:
                y[r] = <int8_t> v
            for e in range(self.d_bar):
                acc[e] = suffix[0] * y[self.er[e]] * y[self.es[e]]
            for k in range(1, self.m):
                r = self.sites[k]
                v = self.newvals[k]
                if v != y[r]:
                    coef = suffix[k] * 2.0 * v
                    for j in range(nb):
                        acc[self.edge_of[r, j]] += coef * y[self.other[r, j]]
                    y[r] = <int8_t> v
        return acc_arr
