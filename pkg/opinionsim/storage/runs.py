"""
Run Storage - Persist simulation artifacts under one output directory.

Single run (`opinionsim run`):
- metrics.csv                per-step MetricsRow table
- graph_initial.<fmt>        snapshot at k = 0
- graph_final.<fmt>          snapshot after the last step
- summary.json               final metrics, stabilisation step, rng draws and state, config echo

Experiment / sweep:
- raw.csv                    one row per completed (variation, seed)
- aggregate.csv              one row per variation
- failures.csv               only when some runs failed
- result.json                the whole ExperimentResult
- trajectories/<variation>/seed_<s>.csv

Nothing written here carries a timestamp, so outputs depend only on (config, seed).
"""

from __future__ import annotations
import csv
import io
import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Optional, Sequence, Union

from ..graph.state import RunResult, SimulationState, StepMetrics
from ..utils import ulog
from .atomic import atomic_write_text
from .graph_export import export_graph
from .metrics_csv import write_metrics_csv

if TYPE_CHECKING:
    from ..experiments.suite import ExperimentResult

logger = logging.getLogger(__name__)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


class RunStorage:
    """
    Manages artifact persistence for one output directory.

    Counters:
    - artifacts_saved: files written by this instance
    - written: their paths, in write order
    """

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self.artifacts_saved = 0
        self.written: List[Path] = []

    def _track(self, kind: str, path: Path) -> Path:
        self.artifacts_saved += 1
        self.written.append(path)
        ulog.artifact_written(kind, str(path))
        return path

    def _write_json(self, name: str, doc: Dict[str, Any], kind: str) -> Path:
        path = atomic_write_text(self.out_dir / name, json.dumps(doc, indent=2) + "\n")
        return self._track(kind, path)

    # ==========================================================================
    # Public API - Single run
    # ==========================================================================

    def save_metrics(self, trajectory: Sequence[StepMetrics], name: str = "metrics.csv") -> Path:
        return self._track("metrics", write_metrics_csv(trajectory, self.out_dir / name))

    def save_graph(self, state: SimulationState, kind: str, formats: Sequence[str]) -> List[Path]:
        """
        Write graph_<kind>.<fmt> for every requested graph format.

        Args:
            state: snapshot to export
            kind: "initial" or "final"
            formats: any of "dot", "json" (other entries are ignored)
        """
        paths = []
        for fmt in formats:
            if fmt not in ("dot", "json"):
                continue
            path = export_graph(state.A, state.X, self.out_dir / f"graph_{kind}.{fmt}", fmt)
            paths.append(self._track(f"graph-{fmt}", path))
        return paths

    def save_summary(self, result: RunResult, config: Optional[Dict[str, Any]] = None) -> Path:
        """
        Write summary.json.

        Args:
            result: completed run
            config: serialisable echo of the run configuration
        """
        final_state = result.final_state
        doc = {
            "steps": final_state.k,
            "n": final_state.n,
            "m": final_state.m,
            "rng_draws": final_state.rng.draws,
            # enough to resume the stream where the run stopped
            "rng_state": final_state.rng.state,
            "stabilized_at": result.stabilized_at,
            "initial": result.initial.model_dump(mode="json"),
            "final": result.final.model_dump(mode="json"),
            "config": config,
        }
        return self._write_json("summary.json", doc, "summary")

    def save_run(
        self,
        initial_state: SimulationState,
        result: RunResult,
        formats: Sequence[str],
        config: Optional[Dict[str, Any]] = None,
    ) -> List[Path]:
        """Write every artifact of a single run for the requested formats."""
        paths: List[Path] = []
        if "csv" in formats:
            paths.append(self.save_metrics(result.trajectory))
        paths += self.save_graph(initial_state, "initial", formats)
        paths += self.save_graph(result.final_state, "final", formats)
        paths.append(self.save_summary(result, config))
        logger.info(f"[EXPORT] run artifacts={len(paths)} -> {self.out_dir}")
        return paths

    # ==========================================================================
    # Public API - Experiments
    # ==========================================================================

    def save_experiment(self, result: "ExperimentResult") -> List[Path]:
        """Write raw.csv, aggregate.csv, failures.csv (if any) and result.json."""
        m = max((len(r.final_mean_opinion) for r in result.runs), default=0)
        paths = []

        raw_header = (
            ["variation", "seed", "steps"]
            + [f"mean_op_{j}" for j in range(m)]
            + [f"mean_op_all_{j}" for j in range(m)]
            + ["distance_to_goal", "component_count", "intra_cluster_dispersion",
               "initial_dispersion", "stabilized_at"]
        )
        raw_rows = [
            [r.variation, r.seed, r.steps, *r.final_mean_opinion, *r.final_mean_opinion_all,
             r.distance_to_goal, r.component_count, r.intra_cluster_dispersion,
             r.initial_dispersion, r.stabilized_at]
            for r in result.runs
        ]
        path = atomic_write_text(self.out_dir / "raw.csv", _csv_text(raw_header, raw_rows))
        paths.append(self._track("raw", path))

        agg_header = (
            ["variation", "completed", "failed"]
            + [f"{stat}_op_{j}" for stat in ("mean", "std", "min", "max") for j in range(m)]
            + ["distance_mean", "distance_std"]
        )
        agg_rows = []
        for agg in result.aggregates:
            stats = []
            for values in (agg.mean, agg.std, agg.min, agg.max):
                stats += list(values) if values else [None] * m
            agg_rows.append([agg.variation, agg.completed, agg.failed, *stats,
                             agg.distance_mean, agg.distance_std])
        path = atomic_write_text(self.out_dir / "aggregate.csv", _csv_text(agg_header, agg_rows))
        paths.append(self._track("aggregate", path))

        if result.failures:
            rows = [[f.variation, f.seed, f.error] for f in result.failures]
            path = atomic_write_text(self.out_dir / "failures.csv",
                                     _csv_text(["variation", "seed", "error"], rows))
            paths.append(self._track("failures", path))
            logger.warning(f"[EXPORT] {len(result.failures)} failed runs listed in {path}")

        paths.append(self._write_json("result.json", result.model_dump(mode="json"), "result"))
        logger.info(f"[EXPORT] experiment {result.name} -> {self.out_dir}")
        return paths
