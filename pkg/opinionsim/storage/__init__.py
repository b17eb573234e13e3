"""
opinionsim storage layer

File artifacts only, every writer atomic (temp file + rename):
- write_metrics_csv: per-step MetricsRow table
- export_graph / import_graph_json: DOT and adjacency-JSON snapshots
- RunStorage: artifact set of a run or an experiment under one directory
"""

from .graph_export import GRAPH_FORMATS, export_graph, import_graph_json
from .metrics_csv import metrics_header, write_metrics_csv
from .runs import RunStorage

__all__ = [
    "GRAPH_FORMATS",
    "export_graph",
    "import_graph_json",
    "metrics_header",
    "write_metrics_csv",
    "RunStorage",
]
