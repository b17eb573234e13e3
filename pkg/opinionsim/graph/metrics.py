"""
Network metrics recorded every step.

Components and dispersion quantify echo chambers: agents split into
disconnected groups whose members sit close to their group's opinion centroid.
"""

from __future__ import annotations
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .state import SimulationState, StabilityCriterion, StepMetrics


def connected_components(A) -> Tuple[np.ndarray, int]:
    """
    Undirected component labelling.

    Returns:
        (labels, count) with labels[i] in [0, count)
    """
    A = np.asarray(A, dtype=bool)
    count, labels = _cc(csr_matrix(A), directed=False, return_labels=True)
    return labels, int(count)


def intra_cluster_dispersion(X, labels: np.ndarray, count: int) -> float:
    """Mean over components of the mean 1-norm distance to the component centroid."""
    X = np.asarray(X, dtype=float)
    sizes = np.bincount(labels, minlength=count).astype(float)
    sums = np.zeros((count, X.shape[1]))
    np.add.at(sums, labels, X)
    centroids = sums / sizes[:, None]
    dist = np.abs(X - centroids[labels]).sum(axis=1)
    per_component = np.bincount(labels, weights=dist, minlength=count) / sizes
    return float(per_component.mean())


def detect_stability(history: Sequence[float], criterion: StabilityCriterion) -> bool:
    """
    True iff the mean opinion change over the last `window` steps is below tol.

    Args:
        history: per-step mean |delta X| values, oldest first
        criterion: tolerance and window

    Returns:
        False when fewer than `window` values are available
    """
    if len(history) < criterion.window:
        return False
    recent = np.asarray(history[-criterion.window:], dtype=float)
    return bool(recent.mean() < criterion.tol)


def measure(state: SimulationState, previous_X: Optional[np.ndarray] = None) -> StepMetrics:
    """Compute StepMetrics for a state; previous_X feeds the mean |delta X| column."""
    X, A = state.X, state.A
    mask = state.standard_mask
    mean_all = X.mean(axis=0)
    # a network made only of controllers has no standard agents to average
    mean_std = X[mask].mean(axis=0) if mask.any() else mean_all
    labels, count = connected_components(A)
    degree = A.sum(axis=1)
    change = 0.0 if previous_X is None else float(np.abs(X - previous_X).mean())
    return StepMetrics(
        k=state.k,
        mean_opinion=tuple(float(v) for v in mean_std),
        mean_opinion_all=tuple(float(v) for v in mean_all),
        component_count=count,
        mean_degree=float(degree.mean()),
        max_degree=int(degree.max()),
        isolated_count=int((degree == 0).sum()),
        intra_cluster_dispersion=intra_cluster_dispersion(X, labels, count),
        mean_abs_change=change,
    )
