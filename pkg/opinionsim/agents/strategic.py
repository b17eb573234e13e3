"""
Strategic agent

Steers the network towards a goal opinion g. Neighbour j is weighted by its
distance ||x_j - g||_1; the goal itself is appended with the smallest neighbour
distance, so after normalisation it weighs as much as the closest neighbour.
Negative rho concentrates on the goal and nearby neighbours (heavy-handed),
positive rho on the most distant neighbours (gentle). For finite rho the goal
weight stays strictly positive.
"""

from __future__ import annotations
from typing import Sequence

import numpy as np

from ..runtime.matrix_ops import DEFAULT_EPS_NORM
from .neighbors import check_agent_index, neighbor_set
from .popular import emphasized_weights


def strategic_weights(
    X,
    nbrs: Sequence[int],
    goal,
    rho: float,
    eps_norm: float = DEFAULT_EPS_NORM,
) -> np.ndarray:
    """
    Weights over the neighbours followed by the goal (length len(nbrs) + 1).

    Raises:
        ValueError: empty neighbour set
    """
    nbrs = np.asarray(nbrs, dtype=int)
    if nbrs.size == 0:
        raise ValueError("strategic_weights needs at least one neighbour")
    g = np.asarray(goal, dtype=float)
    d = np.abs(np.asarray(X, dtype=float)[nbrs] - g).sum(axis=1)
    return emphasized_weights(np.append(d, d.min()), rho, eps_norm)


def apply_strategic(
    X,
    A,
    i: int,
    goal,
    rho: float,
    eps_norm: float = DEFAULT_EPS_NORM,
) -> np.ndarray:
    """Next opinion of strategic agent i: weights . [X[nbrs]; g]. Isolated agents hold."""
    X = np.asarray(X, dtype=float)
    i = check_agent_index(X.shape[0], i)
    nbrs = neighbor_set(A, i)
    if nbrs.size == 0:
        return X[i].copy()
    w = strategic_weights(X, nbrs, goal, rho, eps_norm)
    stacked = np.vstack([X[nbrs], np.asarray(goal, dtype=float)])
    return np.clip(w @ stacked, 0.0, 1.0)
