"""
Opinion / topology co-evolution

One synchronous time step of the standard-agent model is:
    W     = S_N(X) o A + (I - diag([S_N(X) o A] 1))     weight_matrix
    X'    = W X                                         opinion_step
    S_hat = R(S_N(X)^theta)                             edge_probabilities
    A'    = one uniform draw per unordered pair         resample_edges

Controllers override rows on top of this (see opinionsim.agents); the engine
in opinionsim.graph.engine composes the pieces.
"""

from __future__ import annotations
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import DimensionMismatchError, MatrixDomainError, NonStochasticError
from .matrix_ops import DEFAULT_EPS_NORM, renorm_hadamard_power, row_similarity_matrix
from .rng import RngStream

STANDARD = -1  # role tag for a standard agent; controllers carry their spec index
DEFAULT_EPS_EDGE = 0.001
STOCHASTIC_TOL = 1e-6


class EdgeParams(BaseModel):
    """Edge formation parameters: theta sharpens similarities, eps_edge floors probabilities."""

    model_config = ConfigDict(frozen=True)

    theta: int = Field(default=7, ge=1)
    eps_edge: float = Field(default=DEFAULT_EPS_EDGE, ge=0.0, lt=1.0)


def check_adjacency(A) -> np.ndarray:
    """Return A as a bool array after checking it is square, symmetric and hollow."""
    arr = np.asarray(A)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"adjacency must be square, got shape {arr.shape}")
    arr = arr.astype(bool)
    if arr.diagonal().any():
        raise MatrixDomainError("adjacency must be hollow")
    if not np.array_equal(arr, arr.T):
        raise MatrixDomainError("adjacency must be symmetric")
    return arr


def weight_matrix(X, A, eps_norm: float = DEFAULT_EPS_NORM) -> np.ndarray:
    """
    Similarity-weighted, row-stochastic influence matrix.

    Off-diagonal weights are the similarities masked by the adjacency; the diagonal
    takes whatever is left so each row sums to 1. An isolated agent gets e_i.

    Args:
        X: n x m opinion matrix
        A: n x n adjacency
        eps_norm: normalisation guard

    Returns:
        n x n row-stochastic W

    Raises:
        DimensionMismatchError: X and A disagree on n
    """
    X = np.asarray(X, dtype=float)
    A = check_adjacency(A)
    n = X.shape[0]
    if A.shape[0] != n:
        raise DimensionMismatchError(f"X has {n} rows but A is {A.shape[0]}x{A.shape[0]}")
    if n == 1:
        return np.ones((1, 1))
    masked = row_similarity_matrix(X, eps_norm) * A
    W = masked + np.diag(1.0 - masked.sum(axis=1))
    return W


def opinion_step(X, W) -> np.ndarray:
    """
    French-DeGroot update X' = W X.

    Raises:
        DimensionMismatchError: W is not n x n for the n rows of X
        NonStochasticError: a row of W sums outside 1 +- 1e-6
    """
    X = np.asarray(X, dtype=float)
    W = np.asarray(W, dtype=float)
    n = X.shape[0]
    if W.shape != (n, n):
        raise DimensionMismatchError(f"W has shape {W.shape}, expected ({n}, {n})")
    sums = W.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > STOCHASTIC_TOL)
    if bad.size:
        raise NonStochasticError(
            f"W rows {bad[:10].tolist()} are not stochastic (sums {sums[bad[:10]].tolist()})"
        )
    if (W < 0).any():
        raise NonStochasticError("W has negative entries")
    # convex combinations of [0,1] values; the clip only absorbs ulp-level overshoot
    return np.clip(W @ X, 0.0, 1.0)


def edge_probabilities(X, params: EdgeParams, eps_norm: float = DEFAULT_EPS_NORM) -> np.ndarray:
    """Edge probability matrix S_hat = R(S_N(X)^theta); hollow, entries in [0, 1]."""
    return renorm_hadamard_power(row_similarity_matrix(X, eps_norm), params.theta, eps_norm)


def resample_edges(
    S_hat,
    params: EdgeParams,
    roles: Sequence[int],
    rng: RngStream,
) -> np.ndarray:
    """
    Draw the next adjacency matrix.

    Exactly one uniform sample per unordered pair i < j, in row-major upper-triangle
    order; the pair is connected iff gamma < max(s_hat_ij, eps_edge), using the
    upper-triangle entry for both directions. Pairs of two controllers are never
    connected (their samples are still drawn so the stream position only depends on n).

    Args:
        S_hat: n x n hollow matrix with entries in [0, 1]
        params: EdgeParams (eps_edge floor)
        roles: per-agent role, STANDARD or a controller index
        rng: stream advanced by n(n-1)/2 draws

    Returns:
        n x n symmetric hollow bool adjacency
    """
    S_hat = np.asarray(S_hat, dtype=float)
    n = S_hat.shape[0]
    if S_hat.ndim != 2 or S_hat.shape != (n, n):
        raise DimensionMismatchError(f"S_hat must be square, got {S_hat.shape}")
    if len(roles) != n:
        raise DimensionMismatchError(f"{len(roles)} roles for {n} agents")
    if not np.isfinite(S_hat).all() or (S_hat < 0).any() or (S_hat > 1.0 + 1e-12).any():
        raise MatrixDomainError("S_hat entries must lie in [0, 1]")
    if S_hat.diagonal().any():
        raise MatrixDomainError("S_hat must be hollow")

    iu, ju = np.triu_indices(n, k=1)
    gammas = rng.uniform(iu.size)
    edges = gammas < np.maximum(S_hat[iu, ju], params.eps_edge)

    is_ctrl = np.asarray(roles) != STANDARD
    edges &= ~(is_ctrl[iu] & is_ctrl[ju])

    A = np.zeros((n, n), dtype=bool)
    A[iu, ju] = edges
    return A | A.T
