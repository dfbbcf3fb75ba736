"""Counter-based random streams.

Every consumer derives its own stream from ``(seed, *key)`` so runs are reproducible
independently of scheduling order and platform.
"""
from typing import Sequence

import numpy as np

# spawn-key namespaces
STREAM_DATA = 0
STREAM_SOLVER = 1


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for ``seed`` on the sub-stream identified by ``key``."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def cumulative(probabilities: Sequence[float]) -> np.ndarray:
    cdf = np.cumsum(np.asarray(probabilities, dtype=float))
    cdf[-1] = 1.0
    return cdf


def sample_categorical(rng: np.random.Generator, cdf: np.ndarray, size: int) -> np.ndarray:
    """Inverse-CDF sampling of ``size`` indices from a precomputed cumulative distribution."""
    u = rng.random(size)
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
