"""Seeding conventions.

Every randomized routine takes an explicit integer seed and builds a
``numpy.random.Generator`` on the PCG64 bit generator from it. Sub-seeds for
independent trials or retries come from :func:`split_seed`, which hashes
``(seed, index)`` through ``numpy.random.SeedSequence``.
"""
import numpy as np

SEED_MASK = (1 << 64) - 1


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed) & SEED_MASK))


def split_seed(seed, index):
    """Deterministic 64-bit child seed number ``index`` of ``seed``."""
    ss = np.random.SeedSequence([int(seed) & SEED_MASK, int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
