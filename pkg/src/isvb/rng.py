"""Reproducible random-number streams.

All stochastic operations in the package take an explicit
``numpy.random.Generator``. Independent substreams are derived from a
root seed plus an integer key path via ``SeedSequence`` spawn keys, so
results never depend on execution order or parallel scheduling.
"""

import numpy as np


def rng_stream(seed, *key):
    """Generator for the substream identified by ``(seed, *key)``.

    The same (seed, key) pair always yields an identical stream;
    distinct key paths yield statistically independent streams.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))
