"""
Per-step metrics table.

One header row, then one row per recorded step. Floats are written with repr(),
the shortest string that round-trips, so the same trajectory always produces the
same bytes. Files are written to a temp file and renamed into place.
"""

from __future__ import annotations
import csv
import io
import logging
from pathlib import Path
from typing import List, Sequence, Union

from ..graph.state import StepMetrics
from .atomic import atomic_write_text

logger = logging.getLogger(__name__)


def metrics_header(m: int) -> List[str]:
    return (
        ["step"]
        + [f"mean_op_{j}" for j in range(m)]
        + [f"mean_op_all_{j}" for j in range(m)]
        + ["component_count", "mean_degree", "intra_cluster_dispersion", "max_degree"]
    )


def metrics_row(metrics: StepMetrics) -> List[str]:
    return (
        [str(metrics.k)]
        + [repr(float(v)) for v in metrics.mean_opinion]
        + [repr(float(v)) for v in metrics.mean_opinion_all]
        + [
            str(metrics.component_count),
            repr(float(metrics.mean_degree)),
            repr(float(metrics.intra_cluster_dispersion)),
            str(metrics.max_degree),
        ]
    )


def render_metrics_csv(trajectory: Sequence[StepMetrics]) -> str:
    """Render a trajectory as CSV text (LF line endings)."""
    if not trajectory:
        raise ValueError("cannot write an empty trajectory")
    m = len(trajectory[0].mean_opinion)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(metrics_header(m))
    for metrics in trajectory:
        writer.writerow(metrics_row(metrics))
    return buf.getvalue()


def write_metrics_csv(trajectory: Sequence[StepMetrics], path: Union[str, Path]) -> Path:
    """
    Write one MetricsRow per step.

    Args:
        trajectory: recorded StepMetrics, non-empty
        path: destination file

    Returns:
        The written path

    Raises:
        ValueError: empty trajectory
        OSError: the file could not be written (message carries the path)
    """
    text = render_metrics_csv(trajectory)
    path = atomic_write_text(path, text)
    logger.debug(f"[EXPORT] metrics rows={len(trajectory)} -> {path}")
    return path
