"""Seedable random streams: the single source of all randomness.

Every path derives its streams from (master seed, path index, purpose tag)
via numpy's SeedSequence spawn keys over the counter-based Philox bit
generator. Streams for distinct purposes or paths are statistically
independent and need no cross-path coordination, so paths can run in any
order (or in parallel) and still produce bit-identical results.
"""

from __future__ import annotations

import math

import numpy as np

# Purpose tags, mapped to stable spawn-key codes. Adding a purpose must not
# renumber existing ones or historical streams change.
PURPOSES = {
    "brownian": 0,
    "demand-noise": 1,
}


class RandomStream:
    """Deterministic normal-variate stream for one (seed, path, purpose)."""

    def __init__(self, seed: int, path_index: int, purpose: str):
        if purpose not in PURPOSES:
            raise ValueError(f"unknown stream purpose: {purpose!r}")
        self.seed = seed
        self.path_index = path_index
        self.purpose = purpose
        seq = np.random.SeedSequence(
            entropy=seed, spawn_key=(path_index, PURPOSES[purpose]))
        self._gen = np.random.Generator(np.random.Philox(seq))

    def normal(self) -> float:
        """One standard-normal draw."""
        return float(self._gen.standard_normal())

    def normals(self, n: int) -> np.ndarray:
        """Batch of n standard-normal draws (for statistical tests)."""
        return self._gen.standard_normal(n)


def brownian_increment(stream: RandomStream, dt: float) -> float:
    """Draw a Brownian increment ~ Normal(0, dt).

    Successive increments accumulate into the Brownian value W_t. The
    degenerate dt == 0 returns exactly 0.0 without consuming a draw.
    """
    if dt < 0.0:
        raise ValueError("dt must be >= 0")
    if dt == 0.0:
        return 0.0
    return stream.normal() * math.sqrt(dt)


def demand_noise(stream: RandomStream, magnitude: float) -> float:
    """Per-tick demand noise: an i.i.d. standard-normal draw times magnitude.

    magnitude == 0 still consumes a draw so that runs differing only in
    the noise magnitude stay aligned on every other stream.
    """
    if magnitude < 0.0:
        raise ValueError("noise magnitude must be >= 0")
    return stream.normal() * magnitude
