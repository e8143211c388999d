"""Random-scan Gibbs sampling for the pairwise binary model.

One update picks a site uniformly at random and redraws its spin from the
exact conditional: the new spin is +1 with probability
1 / (1 + exp(-2 a_r)) where a_r = sum_{s != r} psi_{rs} y(s).  Chains are
stored delta-encoded (one site/value pair per step plus the post-burn-in
state), which keeps memory at O(m + d) and lets downstream evaluations run
in O(m d) by replaying flips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from ._replay import materialize_states as _materialize
from .edges import n_vertices, site_tables
from .rng import RngSeed, raw_block, uniform_block

DEFAULT_BURN_IN_PER_SITE = 1000
DEFAULT_DATA_CHAIN_LEN = 1_000_000

# sub-stream tags so different consumers of one RngSeed never collide
_TAG_CHAIN = 0
_TAG_INIT = 1
_TAG_OBS = 2


@dataclass(frozen=True)
class MarkovSample:
    """Delta-encoded Gibbs chain at instrumental parameter psi.

    `start` is the state after burn-in; recorded step k overwrote
    `sites[k]` with `newvals[k]` (possibly a no-op) and `scores_psi[k]`
    caches psi' J(state after step k).
    """

    psi: np.ndarray
    d: int
    start: np.ndarray
    sites: np.ndarray
    newvals: np.ndarray
    scores_psi: np.ndarray
    burn_in: int
    seed: RngSeed | None = None
    final: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    @property
    def m(self) -> int:
        return int(self.sites.shape[0])

    def states(self) -> np.ndarray:
        """Decode deltas into the dense (m, d) int8 state matrix."""
        return _materialize(self.d, self.start, self.sites, self.newvals)


def _adjacency(psi: np.ndarray, d: int):
    """CSR-style neighbor lists of the nonzero edges, other endpoint ascending."""
    edge_of, other = site_tables(d)
    counts = np.zeros(d, dtype=np.int64)
    site_list = []
    val_list = []
    for r in range(d):
        vals = psi[edge_of[r]]
        nz = vals != 0.0
        site_list.append(other[r][nz])
        val_list.append(vals[nz])
        counts[r] = int(nz.sum())
    ptr = np.zeros(d + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    nbr_site = (
        np.concatenate(site_list).astype(np.int32)
        if site_list
        else np.empty(0, np.int32)
    )
    nbr_val = (
        np.concatenate(val_list).astype(np.float64)
        if val_list
        else np.empty(0, np.float64)
    )
    return ptr, nbr_site, nbr_val


def _check_psi(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.float64)
    if not np.all(np.isfinite(psi)):
        raise ValueError("instrumental parameter contains non-finite entries")
    return psi


def random_config(d: int, seed: RngSeed) -> np.ndarray:
    """i.i.d. uniform +-1 configuration drawn from the seed's init stream."""
    u = uniform_block(seed.key(_TAG_INIT), 0, d)
    return np.where(u < 0.5, -1, 1).astype(np.int8)


def gibbs_step(
    y: np.ndarray, psi: np.ndarray, key: int, counter: int = 0
) -> tuple[np.ndarray, int, int]:
    """One random-scan update; returns (new config, site, new spin value).

    Reference implementation of the kernel's single step; the chosen site
    comes from counter `counter`, the spin decision from `counter + 1`.
    """
    psi = _check_psi(psi)
    d = y.shape[0]
    raws = raw_block(key, counter, 2)
    r = int(raws[0] % np.uint64(d))
    u2 = float(raws[1] >> np.uint64(11)) * 2.0**-53
    edge_of, other = site_tables(d)
    a = 0.0
    for j in range(d - 1):
        a += psi[edge_of[r, j]] * y[other[r, j]]
    new = 1 if u2 < 1.0 / (1.0 + math.exp(-2.0 * a)) else -1
    out = y.copy()
    out[r] = new
    return out, r, new


def run_chain(
    psi: np.ndarray,
    m: int,
    burn_in: int | None = None,
    init: np.ndarray | None = None,
    seed: RngSeed = RngSeed(0),
) -> MarkovSample:
    """Delta-encoded chain of m post-burn-in states, stationary at psi."""
    psi = _check_psi(psi)
    d = n_vertices(psi.shape[0])
    if m < 1:
        raise ValueError("chain length m must be >= 1")
    if burn_in is None:
        burn_in = DEFAULT_BURN_IN_PER_SITE * d
    if init is None:
        init = random_config(d, seed)
    else:
        init = np.asarray(init, dtype=np.int8)
        if init.shape[0] != d or not np.all(np.abs(init) == 1):
            raise ValueError("init must be a +-1 vector of length d")
    ptr, nbr_site, nbr_val = _adjacency(psi, d)
    start, sites, newvals, scores, final = backend.gibbs_chain(
        d, ptr, nbr_site, nbr_val, init, burn_in, m, seed.key(_TAG_CHAIN)
    )
    return MarkovSample(
        psi=psi,
        d=d,
        start=start,
        sites=sites,
        newvals=newvals,
        scores_psi=scores,
        burn_in=burn_in,
        seed=seed,
        final=final,
    )


def sample_dataset(
    theta_star: np.ndarray,
    n: int,
    chain_len: int = DEFAULT_DATA_CHAIN_LEN,
    seed: RngSeed = RngSeed(0),
) -> np.ndarray:
    """n i.i.d. observations, each the final state of its own Gibbs chain.

    Every observation runs chain_len single-site updates from an
    independent uniform random start; only the final configuration is kept.
    """
    theta_star = _check_psi(theta_star)
    d = n_vertices(theta_star.shape[0])
    if n < 1 or chain_len < 1:
        raise ValueError("need n >= 1 and chain_len >= 1")
    ptr, nbr_site, nbr_val = _adjacency(theta_star, d)
    out = np.empty((n, d), dtype=np.int8)
    for i in range(n):
        si = seed.split(_TAG_OBS, i)
        init = random_config(d, si)
        _, _, _, _, final = backend.gibbs_chain(
            d, ptr, nbr_site, nbr_val, init, chain_len, 0, si.key(_TAG_CHAIN)
        )
        out[i] = final
    return out
