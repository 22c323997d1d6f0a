"""Seeding helpers.

All randomness goes through numpy's PCG64 bit generator, seeded via
``numpy.random.SeedSequence``. PCG64 output and the integer/uniform draws used
here are stable across platforms, so a seed pins a run bit-for-bit.
"""
from __future__ import annotations

import numpy as np


def make_rng(seed: int | None, *keys: int) -> np.random.Generator:
    """Generator for ``seed``, optionally on an independent child stream."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 63-bit integer seed for the child stream ``keys``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))
