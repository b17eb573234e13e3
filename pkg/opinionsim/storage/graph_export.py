"""
Graph snapshots for external rendering.

Two formats:
- dot:  undirected DOT via networkx + pydot; node attributes opinion_0..opinion_{m-1},
        plus an RGB "color" (#rrggbb, channel = round(255 * opinion)) when m == 3
- json: {"n": n, "edges": [[i, j], ...] with i < j, "opinions": n x m}
"""

from __future__ import annotations
import json
import logging
from pathlib import Path
from typing import Tuple, Union

import networkx as nx
import numpy as np
from networkx.drawing.nx_pydot import to_pydot

from ..errors import DimensionMismatchError
from ..runtime.network import check_adjacency
from .atomic import atomic_write_text

logger = logging.getLogger(__name__)

GRAPH_FORMATS = ("dot", "json")


def opinion_color(row) -> str:
    """Hex colour of a 3-topic opinion, one channel per topic."""
    r, g, b = (int(round(255 * float(v))) for v in row)
    return f"#{r:02x}{g:02x}{b:02x}"


def to_networkx(A, X) -> nx.Graph:
    """Build an undirected networkx graph carrying the opinions as node attributes."""
    A = check_adjacency(A)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != A.shape[0]:
        raise DimensionMismatchError(f"X has shape {X.shape} but A is {A.shape[0]}x{A.shape[0]}")
    m = X.shape[1]

    G = nx.Graph()
    for i, row in enumerate(X):
        attrs = {f"opinion_{j}": float(row[j]) for j in range(m)}
        if m == 3:
            attrs["color"] = opinion_color(row)
        G.add_node(i, **attrs)
    iu, ju = np.nonzero(np.triu(A, k=1))
    G.add_edges_from(zip(iu.tolist(), ju.tolist()))
    return G


def render_dot(A, X) -> str:
    return to_pydot(to_networkx(A, X)).to_string()


def render_adjacency_json(A, X) -> str:
    A = check_adjacency(A)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != A.shape[0]:
        raise DimensionMismatchError(f"X has shape {X.shape} but A is {A.shape[0]}x{A.shape[0]}")
    iu, ju = np.nonzero(np.triu(A, k=1))
    doc = {
        "n": int(A.shape[0]),
        "edges": [[int(i), int(j)] for i, j in zip(iu, ju)],
        "opinions": X.tolist(),
    }
    return json.dumps(doc) + "\n"


def export_graph(A, X, path: Union[str, Path], fmt: str = "dot") -> Path:
    """
    Write one graph snapshot.

    Args:
        A: n x n adjacency
        X: n x m opinions
        path: destination file
        fmt: "dot" or "json"

    Returns:
        The written path

    Raises:
        ValueError: unknown format
        DimensionMismatchError: X and A disagree on n
        OSError: the file could not be written
    """
    if fmt == "dot":
        text = render_dot(A, X)
    elif fmt == "json":
        text = render_adjacency_json(A, X)
    else:
        raise ValueError(f"unknown graph format '{fmt}', expected one of {GRAPH_FORMATS}")
    path = atomic_write_text(path, text)
    logger.debug(f"[EXPORT] graph fmt={fmt} -> {path}")
    return path


def import_graph_json(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """Read an adjacency-JSON snapshot back into (A, X)."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    n = int(doc["n"])
    A = np.zeros((n, n), dtype=bool)
    for i, j in doc["edges"]:
        A[i, j] = A[j, i] = True
    X = np.asarray(doc["opinions"], dtype=float).reshape(n, -1)
    return A, X
