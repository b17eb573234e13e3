"""
Popular agent

Has no opinion of its own: it posts a combination of its neighbours' opinions,
weighted by how different each neighbour is from the rest of the neighbourhood
and sharpened by the Hadamard power rho.

    rho << 0   "people pleaser"  -> mean of the most typical neighbours
    rho == 0   "conciliator"     -> plain neighbour mean
    rho >> 0   "popularizer"     -> mean of the most fringe neighbours
"""

from __future__ import annotations
from typing import Sequence

import numpy as np

from ..runtime.matrix_ops import DEFAULT_EPS_NORM, renorm_hadamard_power, row_normalize
from .neighbors import check_agent_index, neighbor_set


def emphasized_weights(d, rho: float, eps_norm: float = DEFAULT_EPS_NORM) -> np.ndarray:
    """
    R(R(d)^rho) for a non-negative distance vector d.

    An all-zero d (identical opinions, or a single neighbour) carries no contrast;
    it gets uniform weights for every rho.
    """
    d = np.asarray(d, dtype=float)
    omega = row_normalize(d, eps_norm)
    if not omega.any():
        return np.full(d.shape, 1.0 / d.size)
    return renorm_hadamard_power(omega, rho, eps_norm)


def popular_weights(
    X,
    nbrs: Sequence[int],
    rho: float,
    eps_norm: float = DEFAULT_EPS_NORM,
) -> np.ndarray:
    """
    Emphasised neighbour weight vector.

    d_j is the summed 1-norm distance from neighbour j to every other neighbour;
    the weights are R(R(d)^rho).

    Args:
        X: n x m opinion matrix
        nbrs: non-empty ascending neighbour indices
        rho: Hadamard power
        eps_norm: normalisation guard

    Returns:
        stochastic vector aligned with nbrs

    Raises:
        ValueError: empty neighbour set
    """
    nbrs = np.asarray(nbrs, dtype=int)
    if nbrs.size == 0:
        raise ValueError("popular_weights needs at least one neighbour")
    rows = np.asarray(X, dtype=float)[nbrs]
    # the diagonal of the pairwise matrix is zero, so a plain row sum skips l == j
    d = np.abs(rows[:, None, :] - rows[None, :, :]).sum(axis=(1, 2))
    return emphasized_weights(d, rho, eps_norm)


def apply_popular(X, A, i: int, rho: float, eps_norm: float = DEFAULT_EPS_NORM) -> np.ndarray:
    """
    Next opinion of popular agent i: popular_weights . X[nbrs].

    With no neighbours the agent keeps its current opinion.
    """
    X = np.asarray(X, dtype=float)
    i = check_agent_index(X.shape[0], i)
    nbrs = neighbor_set(A, i)
    if nbrs.size == 0:
        return X[i].copy()
    w = popular_weights(X, nbrs, rho, eps_norm)
    return np.clip(w @ X[nbrs], 0.0, 1.0)
