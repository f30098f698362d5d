"""Seeded, counter-based random streams.

Every random draw in the package goes through Philox keyed by a
``SeedSequence`` built from integer keys, so a stream is fully named by
its key tuple and independent of draw order elsewhere.
"""

from __future__ import annotations

import numpy as np

# stream tags used as the last key component
SIGNAL_STREAM = 0
NOISE_STREAM = 1
JITTER_STREAM = 2


def philox(*keys: int) -> np.random.Generator:
    """Return a Philox generator keyed by ``keys`` (non-negative ints)."""
    if not keys:
        raise ValueError("at least one key is required")
    for k in keys:
        if int(k) < 0:
            raise ValueError(f"seed keys must be non-negative, got {k}")
    seq = np.random.SeedSequence([int(k) for k in keys])
    return np.random.Generator(np.random.Philox(seq))


def open_unit(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    # random() returns multiples of 2**-53 in [0, 1); half a step shifts it off both ends
    return rng.random(size) + 2.0**-54
