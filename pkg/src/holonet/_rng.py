"""Seeded, splittable random streams.

Every sampled experiment derives its generator from one 64-bit seed plus a
tuple of integer keys, through ``SeedSequence`` and the counter-based Philox
bit generator. Streams for different keys are independent and do not depend
on worker scheduling.
"""
import zlib

import numpy as np


def _key(part):
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    return zlib.crc32(str(part).encode())


def stream(seed, *keys):
    if seed is None:
        raise ValueError("a seed is required for sampled experiments")
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
