"""Seed handling.

Each chain or particle run splits its seed into independent substreams, one
per purpose, so that variants which skip a purpose (LMC draws no batch
indices, SGLD draws no estimator pairs) stay pathwise coupled with those
that use it.
"""

import numpy as np

NOISE, BATCH, ESTIMATOR, INIT = range(4)


def substreams(seed, count=4):
    ss = np.random.SeedSequence(int(seed))
    return [np.random.default_rng(child) for child in ss.spawn(count)]


def cell_seed(master_seed, key):
    """Counter-based per-run seed: depends only on the master seed and the key.

    ``key`` is a tuple of nonnegative integers (for sweeps, the index of each
    axis value), so appending values to an axis leaves existing runs alone.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
