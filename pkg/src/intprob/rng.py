"""Reproducible random streams.

Every stochastic routine takes a :class:`numpy.random.Generator`. Streams are
built on the counter-based Philox-4x64 bit generator (10 rounds, numpy's
reference implementation) keyed by a 64-bit seed. Replica ``i`` of a run with
master seed ``m`` uses the key ``derive_seed(m, i)``, where the mixer is the
SplitMix64 finalizer::

    z = x + 0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

with all arithmetic modulo 2**64, and
``derive_seed(m, i) = splitmix64(m ^ splitmix64(i))``. Gaussian variates come
from numpy's ziggurat sampler (``Generator.standard_normal``).
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 step applied to a 64-bit integer."""
    z = (int(x) + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of replica ``index`` under ``master_seed``."""
    return splitmix64((int(master_seed) & MASK64) ^ splitmix64(index))


def make_rng(seed: int) -> np.random.Generator:
    """Philox-backed generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64))


def replica_rng(master_seed: int, index: int) -> np.random.Generator:
    return make_rng(derive_seed(master_seed, index))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an integer seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return make_rng(0)
    return make_rng(int(rng))


def uniform_below(rng: np.random.Generator, n: int) -> int:
    """Exactly uniform integer in [0, n) for arbitrary-precision n."""
    if n <= 0:
        raise ValueError("need n > 0")
    if n < (1 << 62):
        return int(rng.integers(0, n))
    bits = n.bit_length()
    words = (bits + 31) // 32
    while True:
        chunks = rng.integers(0, 1 << 32, size=words, dtype=np.uint64)
        v = 0
        for w in chunks:
            v = (v << 32) | int(w)
        v >>= words * 32 - bits
        if v < n:
            return v
