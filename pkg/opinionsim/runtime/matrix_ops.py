"""
Stochastic matrix operators

Dense row-wise operators shared by the network dynamics and the controllers:
- row_normalize:           diag(M1 + eps1)^-1 M
- row_diff_matrix:         row-normalised pairwise 1-norm distances (D_N)
- row_similarity_matrix:   row-normalised 1 - (I + D_N) (S_N)
- renorm_hadamard_power:   elementwise power followed by row normalisation

All functions are pure; inputs are never modified. 1-D inputs are treated as a
single row and returned 1-D.
"""

from __future__ import annotations
from typing import Tuple

import numpy as np

from ..errors import MatrixDomainError

DEFAULT_EPS_NORM = 1e-12
MAX_EPS_NORM = 1e-6


def check_eps_norm(eps_norm: float) -> float:
    """Validate the normalisation guard (0 < eps_norm <= 1e-6)."""
    if not np.isfinite(eps_norm) or not (0.0 < eps_norm <= MAX_EPS_NORM):
        raise MatrixDomainError(f"eps_norm must lie in (0, {MAX_EPS_NORM}], got {eps_norm!r}")
    return float(eps_norm)


def _as_rows(M) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(M, dtype=float)
    if arr.ndim == 1:
        return arr.reshape(1, -1), True
    if arr.ndim != 2:
        raise MatrixDomainError(f"expected a vector or matrix, got {arr.ndim}-d input")
    return arr, False


def _check_entries(arr: np.ndarray, what: str) -> None:
    if not np.isfinite(arr).all():
        raise MatrixDomainError(f"{what}: non-finite entries")
    if (arr < 0).any():
        raise MatrixDomainError(f"{what}: negative entries")


def row_normalize(M, eps_norm: float = DEFAULT_EPS_NORM) -> np.ndarray:
    """
    Row-normalisation operator R(M).

    Each row with positive sum s maps to x / (s + eps_norm); an all-zero row stays
    all-zero (it is NOT stochastic, callers decide what that means).

    Args:
        M: non-negative finite matrix (or vector)
        eps_norm: normalisation guard

    Returns:
        New array of the same shape

    Raises:
        MatrixDomainError: negative or non-finite entries, bad eps_norm
    """
    eps_norm = check_eps_norm(eps_norm)
    arr, squeeze = _as_rows(M)
    _check_entries(arr, "row_normalize")
    out = arr / (arr.sum(axis=1, keepdims=True) + eps_norm)
    return out[0] if squeeze else out


def pairwise_l1(X) -> np.ndarray:
    """Un-normalised difference matrix D with d_ij = ||x_i - x_j||_1 (exactly symmetric, hollow)."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise MatrixDomainError("opinion matrix must be 2-d")
    return np.abs(arr[:, None, :] - arr[None, :, :]).sum(axis=2)


def row_diff_matrix(X, eps_norm: float = DEFAULT_EPS_NORM) -> np.ndarray:
    """
    Row-wise difference matrix D_N(X) = R(D(X)).

    Raises:
        MatrixDomainError: fewer than two rows, or invalid entries
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise MatrixDomainError(f"row_diff_matrix needs n >= 2 rows, got shape {arr.shape}")
    _check_entries(arr, "row_diff_matrix")
    return row_normalize(pairwise_l1(arr), eps_norm)


def row_similarity_matrix(X, eps_norm: float = DEFAULT_EPS_NORM) -> np.ndarray:
    """
    Row-wise similarity matrix S_N(X) = R(11^T - (I + D_N(X))).

    Hollow with entries in [0, 1]. Not force-symmetrised: rows renormalised by
    different sums can differ slightly between (i, j) and (j, i).

    The guard in D_N leaves 1 - d_ij/(s_i + eps) = eps/(s_i + eps) where the exact
    value is 0 (a row whose whole distance mass sits on one agent). Such entries
    are zeroed before the second normalisation; otherwise a row made only of
    residues would be renormalised back up to O(1), e.g. a distinct pair would
    look fully similar.
    """
    D_N = row_diff_matrix(X, eps_norm)
    n = D_N.shape[0]
    D = pairwise_l1(X)
    s = D.sum(axis=1, keepdims=True)
    pre = np.ones((n, n)) - (np.eye(n) + D_N)
    # summing zeros is exact, so d_ij == s_i marks the residue entries exactly
    pre[(D >= s) & (s > 0)] = 0.0
    pre = np.clip(pre, 0.0, 1.0)
    return row_normalize(pre, eps_norm)


def renorm_hadamard_power(M, p: float, eps_norm: float = DEFAULT_EPS_NORM) -> np.ndarray:
    """
    Renormalised Hadamard power R(M^p).

    p >= 0: x -> x^p with 0^0 = 1, so p = 0 gives uniform rows.
    p < 0:  entries are floored at eps_norm before powering, so exact zeros
            (e.g. a neighbour sitting on the goal) dominate the row instead of
            producing a division by zero.

    The power is evaluated as exp(p*log x - rowmax) so that |p| up to a few hundred
    neither overflows nor underflows; the per-row shift cancels in the normalisation.

    Args:
        M: non-negative matrix or vector
        p: finite real exponent
        eps_norm: normalisation guard and negative-power floor

    Returns:
        Row-normalised powered array, same shape as M
    """
    eps_norm = check_eps_norm(eps_norm)
    if p is None or not np.isfinite(p):
        raise MatrixDomainError(f"Hadamard exponent must be finite, got {p!r}")
    arr, squeeze = _as_rows(M)
    _check_entries(arr, "renorm_hadamard_power")

    if p == 0:
        powered = np.ones_like(arr)
    else:
        base = np.maximum(arr, eps_norm) if p < 0 else arr
        with np.errstate(divide="ignore"):
            logs = float(p) * np.log(base)
        top = logs.max(axis=1, keepdims=True)
        top = np.where(np.isfinite(top), top, 0.0)  # all-zero rows stay all-zero
        powered = np.exp(logs - top)

    out = row_normalize(powered, eps_norm)
    return out[0] if squeeze else out
