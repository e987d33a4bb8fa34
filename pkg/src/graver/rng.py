"""Deterministic 64-bit RNG used by all search components.

A splitmix64 generator with its state held in a one-element uint64 array so
that the same stream can be advanced from Python wrappers and from compiled
kernels. Every random decision of a search flows through one such stream,
which is what makes searches reproducible from a single seed.
"""

import numpy as np
from numba import njit

U64_MASK = 0xFFFFFFFFFFFFFFFF

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / float(1 << 53)


def mix64(x: int) -> int:
    """Scramble an integer into a well-distributed 64-bit value."""
    x = (x + 0x9E3779B97F4A7C15) & U64_MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & U64_MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & U64_MASK
    return x ^ (x >> 31)


def make_state(seed: int) -> np.ndarray:
    """Create a generator state array from an arbitrary integer seed."""
    return np.array([mix64(seed & U64_MASK)], dtype=np.uint64)


def derive_seed(seed: int, stream: int) -> int:
    """Derive an independent child seed (used for per-turn search seeds)."""
    return mix64((seed & U64_MASK) ^ mix64(stream & U64_MASK))


@njit(inline="always")
def rng_next(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(inline="always")
def rng_f64(state):
    # uniform in [0, 1)
    return float(rng_next(state) >> _S11) * _INV53


@njit(inline="always")
def rng_below(state, n):
    # uniform integer in [0, n); modulo bias is ~1e-17 for the n used here
    return int(rng_next(state) % np.uint64(n))
