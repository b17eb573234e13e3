"""Seeded random stream for reproducible runs."""

from __future__ import annotations
from typing import Any, Dict

import numpy as np

MAX_SEED = 2**64 - 1


class RngStream:
    """
    Deterministic uniform stream backed by numpy's PCG64.

    Identical seed + identical call sequence gives identical samples, bit-exact.
    Every uniform drawn is counted in `draws` so runs can be audited for replay.
    """

    def __init__(self, seed: int) -> None:
        seed = int(seed)
        if not (0 <= seed <= MAX_SEED):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self._seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self.draws = 0

    @property
    def seed(self) -> int:
        return self._seed

    def uniform(self, size: int) -> np.ndarray:
        """Return `size` samples from U[0, 1)."""
        size = int(size)
        self.draws += size
        return self._gen.random(size)

    @property
    def state(self) -> Dict[str, Any]:
        """Opaque generator state (JSON-serialisable dict)."""
        return self._gen.bit_generator.state

    def __repr__(self) -> str:
        return f"RngStream(seed={self._seed}, draws={self.draws})"
