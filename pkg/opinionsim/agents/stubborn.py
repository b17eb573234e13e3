"""
Stubborn agent.

An immutable input signal: its row of W is replaced by e_i, so under X' = WX its
opinion never changes while neighbours still mix it into their own.
"""

from __future__ import annotations

import numpy as np

from .neighbors import check_agent_index


def apply_stubborn(W, i: int) -> np.ndarray:
    """Return a copy of W with row i replaced by the basis vector e_i."""
    out = np.array(W, dtype=float, copy=True)
    i = check_agent_index(out.shape[0], i)
    out[i, :] = 0.0
    out[i, i] = 1.0
    return out
