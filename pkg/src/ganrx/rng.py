"""Seeded random streams.

Every stochastic routine in the package draws from a PCG64 generator keyed
by (user seed, purpose string) through numpy's SeedSequence, so distinct
purposes ("endmembers", "noise", "shuffle", ...) get independent streams
that are reproducible from the single user-facing seed.
"""

import zlib

import numpy as np


def stream(seed: int, purpose: str) -> np.random.Generator:
    """A PCG64 generator dedicated to one purpose under one seed."""
    key = zlib.crc32(purpose.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), key])))


def derive_seed(seed: int, purpose: str) -> int:
    """A stable derived integer seed (e.g. for network initialization)."""
    key = zlib.crc32(purpose.encode("utf-8"))
    return int(np.random.SeedSequence([int(seed), key]).generate_state(1, np.uint64)[0])
