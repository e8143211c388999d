"""Decoding delta-encoded Gibbs chains back into explicit states."""

from __future__ import annotations

import numpy as np


def materialize_states(
    d: int, start: np.ndarray, sites: np.ndarray, newvals: np.ndarray
) -> np.ndarray:
    """Dense (m, d) state matrix; row k is the configuration after step k.

    `start` is the configuration just before the first recorded step.  The
    per-site value at row k is the most recent recorded write to that site,
    falling back to `start`.
    """
    m = sites.shape[0]
    out = np.empty((m, d), dtype=np.int8)
    ks = np.arange(m)
    for r in range(d):
        touch = np.flatnonzero(sites == r)
        if touch.size == 0:
            out[:, r] = start[r]
            continue
        pos = np.searchsorted(touch, ks, side="right") - 1
        vals = newvals[touch]
        out[:, r] = np.where(pos >= 0, vals[np.maximum(pos, 0)], np.int8(start[r]))
    return out
