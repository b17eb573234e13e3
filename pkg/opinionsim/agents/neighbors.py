"""Neighbour sets of a single agent."""

from __future__ import annotations

import numpy as np

from ..errors import AgentIndexError


def check_agent_index(n: int, i: int) -> int:
    if not (0 <= i < n):
        raise AgentIndexError(f"agent index {i} outside [0, {n})")
    return int(i)


def neighbor_set(A, i: int) -> np.ndarray:
    """
    Indices j with a_ij = 1, strictly increasing.

    Args:
        A: n x n adjacency (hollow, so i itself never appears)
        i: owner agent index

    Returns:
        int array of neighbour indices (possibly empty)
    """
    A = np.asarray(A)
    i = check_agent_index(A.shape[0], i)
    return np.flatnonzero(A[i])
