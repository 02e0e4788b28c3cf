"""Counter-based seed splitting.

Every stochastic sub-computation asks for a generator keyed by a path of
labels below the root seed, so its stream does not depend on how many other
computations ran before it or on which thread it runs.
"""
import zlib

import numpy as np


def _key(label):
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    return zlib.crc32(str(label).encode())


def rng_for(seed, *path):
    """Return a ``numpy.random.Generator`` for ``seed`` and a key path."""
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=tuple(_key(p) for p in path))
    return np.random.default_rng(ss)


def complex_normal(rng, shape):
    """Standard complex Gaussian samples, E|g|^2 = 1."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
