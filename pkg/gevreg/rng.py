"""Reproducible random streams.

Every stochastic draw in gevreg comes from a counter-based Philox generator
keyed by the experiment seed and the indices of the point and shot being
evaluated, so results do not depend on scheduling order.
"""

import numpy as np


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return the generator for ``(seed, *keys)``.

    Args:
        seed (int): 64-bit experiment seed.
        *keys (int): Sub-stream indices, e.g. point index then shot index.

    Returns:
        numpy.random.Generator: Independent, reproducible stream.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
