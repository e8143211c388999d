"""Counter-based random numbers with explicit stream splitting.

Every consumer of randomness in the package draws from a splitmix64-style
generator addressed by (key, counter).  Because the k-th variate is a pure
function of the key and k, chains can be replayed exactly, replications can
be assigned disjoint streams up front, and results do not depend on
scheduling.  The compiled and pure backends implement the identical integer
recurrence, so chains are bit-equal across backends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer: a bijective 64-bit scrambler."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_key(seed: int, *path: int) -> int:
    """Hash (seed, path...) into a 64-bit stream key.

    Components may be any non-negative ints; distinct paths give
    statistically independent streams.
    """
    key = mix64((seed & _MASK) + GOLDEN)
    for part in path:
        key = mix64(key + mix64((part & _MASK) + GOLDEN))
    return key


def uniform(key: int, counter: int) -> float:
    """The counter-th uniform [0,1) variate of the stream `key`."""
    z = mix64((key + ((counter + 1) * GOLDEN)) & _MASK)
    return (z >> 11) * 2.0**-53


def raw_block(key: int, start: int, count: int) -> np.ndarray:
    """Raw 64-bit outputs for counters start..start+count-1 (uint64 array)."""
    counters = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(key) + counters * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def uniform_block(key: int, start: int, count: int) -> np.ndarray:
    """Vectorized :func:`uniform` for counters start..start+count-1."""
    return (raw_block(key, start, count) >> np.uint64(11)).astype(
        np.float64
    ) * 2.0**-53


@dataclass(frozen=True)
class RngSeed:
    """A (seed, stream) pair; identical pairs yield bit-identical draws."""

    seed: int
    stream: int = 0

    def key(self, *path: int) -> int:
        return derive_key(self.seed, self.stream, *path)

    def split(self, *path: int) -> "RngSeed":
        """Child seed for a sub-task; disjoint paths never collide."""
        return RngSeed(self.seed, derive_key(self.stream, *path))
