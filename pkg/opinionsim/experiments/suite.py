"""
Experiment suite

Named, parameterised controller studies plus the generic seed sweep they run on:

- popular_spectrum_experiment:    control + people pleasers / popularizers at 1..50 agents
- strategic_spectrum_experiment:  control + one strategic agent over a rho grid
- strategic_vs_stubborn_experiment: stubborn vs strategic(rho=2) at three edge floors
- seed_sweep:                     every (variation, seed) pair, aggregated per variation

All variations of one seed start from the same standard-agent network: the base
network is drawn first and the variation's controllers are attached without edges.
"""

from __future__ import annotations
import logging
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..agents.spec import ControllerSpec
from ..errors import ExperimentError
from ..graph.engine import RunTask, TaskOutcome, run_batch
from ..graph.state import StabilityCriterion
from ..runtime.matrix_ops import DEFAULT_EPS_NORM
from ..runtime.network import DEFAULT_EPS_EDGE, EdgeParams
from ..storage.metrics_csv import write_metrics_csv
from ..storage.runs import RunStorage
from ..utils import ulog

logger = logging.getLogger(__name__)

POPULAR_COUNTS = (1, 2, 5, 10, 50)
POPULAR_RHOS = (-10.0, 10.0)
STRATEGIC_RHOS = (-100.0, -10.0, -5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0, 10.0, 100.0)
EDGE_FLOORS = (0.0, 0.001, 0.01)


class BaseNetwork(BaseModel):
    """Shared network settings; defaults follow the 50-agent, 3-topic, theta=7 setup."""

    model_config = ConfigDict(frozen=True)

    n_standard: int = Field(default=50, ge=1)
    m: int = Field(default=3, ge=1)
    theta: int = Field(default=7, ge=1)
    eps_edge: float = Field(default=DEFAULT_EPS_EDGE, ge=0.0, lt=1.0)
    eps_norm: float = DEFAULT_EPS_NORM


class Variation(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    controllers: Tuple[ControllerSpec, ...] = ()
    eps_edge: Optional[float] = Field(default=None, ge=0.0, lt=1.0)
    theta: Optional[int] = Field(default=None, ge=1)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    base: BaseNetwork = Field(default_factory=BaseNetwork)
    variations: Tuple[Variation, ...]
    seeds: Tuple[int, ...]
    horizon: int = Field(ge=1)
    goal: Optional[Tuple[float, ...]] = None
    criterion: Optional[StabilityCriterion] = None
    stop_on_stable: bool = False
    # False: controllers take part in the initial edge draw, exactly as a single `run`
    shared_base: bool = True

    @field_validator("seeds")
    @classmethod
    def _non_empty(cls, v):
        if not v:
            raise ValueError("seed list must not be empty")
        return v

    def tasks(self) -> List[RunTask]:
        """Variation-major task grid."""
        out = []
        for var in self.variations:
            params = EdgeParams(
                theta=var.theta if var.theta is not None else self.base.theta,
                eps_edge=var.eps_edge if var.eps_edge is not None else self.base.eps_edge,
            )
            for seed in self.seeds:
                out.append(RunTask(
                    variation=var.name,
                    seed=seed,
                    n_standard=self.base.n_standard,
                    m=self.base.m,
                    controllers=var.controllers,
                    params=params,
                    eps_norm=self.base.eps_norm,
                    steps=self.horizon,
                    criterion=self.criterion,
                    stop_on_stable=self.stop_on_stable,
                    shared_base=self.shared_base,
                ))
        return out


class RunRecord(BaseModel):
    """Final metrics of one completed (variation, seed) run."""

    model_config = ConfigDict(frozen=True)

    variation: str
    seed: int
    steps: int
    final_mean_opinion: Tuple[float, ...]
    final_mean_opinion_all: Tuple[float, ...]
    distance_to_goal: Optional[float] = None
    component_count: int
    intra_cluster_dispersion: float
    initial_dispersion: float
    stabilized_at: Optional[int] = None
    trajectory_path: Optional[str] = None


class RunFailure(BaseModel):
    variation: str
    seed: int
    error: str


class VariationAggregate(BaseModel):
    variation: str
    completed: int
    failed: int
    mean: Tuple[float, ...]
    std: Tuple[float, ...]
    min: Tuple[float, ...]
    max: Tuple[float, ...]
    distance_mean: Optional[float] = None
    distance_std: Optional[float] = None


class ExperimentResult(BaseModel):
    name: str
    goal: Optional[Tuple[float, ...]] = None
    runs: List[RunRecord]
    failures: List[RunFailure] = Field(default_factory=list)
    aggregates: List[VariationAggregate]

    @property
    def variations(self) -> List[str]:
        return [a.variation for a in self.aggregates]

    def runs_for(self, variation: str) -> List[RunRecord]:
        return [r for r in self.runs if r.variation == variation]

    def aggregate(self, variation: str) -> VariationAggregate:
        for agg in self.aggregates:
            if agg.variation == variation:
                return agg
        raise KeyError(variation)


def _to_record(
    outcome: TaskOutcome,
    goal: Optional[Tuple[float, ...]] = None,
    trajectory_dir: Optional[str] = None,
):
    """Worker-side reduction: keep final metrics, spill the trajectory to disk if asked."""
    task = outcome.task
    if not outcome.ok:
        return RunFailure(variation=task.variation, seed=task.seed, error=outcome.error)
    result = outcome.result
    final = result.final
    path = None
    if trajectory_dir is not None:
        target = Path(trajectory_dir) / task.variation / f"seed_{task.seed}.csv"
        target.parent.mkdir(parents=True, exist_ok=True)
        path = str(write_metrics_csv(result.trajectory, target))
    return RunRecord(
        variation=task.variation,
        seed=task.seed,
        steps=final.k,
        final_mean_opinion=final.mean_opinion,
        final_mean_opinion_all=final.mean_opinion_all,
        distance_to_goal=final.distance_to(goal) if goal is not None else None,
        component_count=final.component_count,
        intra_cluster_dispersion=final.intra_cluster_dispersion,
        initial_dispersion=result.initial.intra_cluster_dispersion,
        stabilized_at=result.stabilized_at,
        trajectory_path=path,
    )


def aggregate_runs(
    variations: Sequence[str],
    runs: Sequence[RunRecord],
    failures: Sequence[RunFailure],
) -> List[VariationAggregate]:
    """Across-seed statistics per variation, computed over completed runs only."""
    out = []
    for name in variations:
        done = [r for r in runs if r.variation == name]
        failed = sum(1 for f in failures if f.variation == name)
        if not done:
            out.append(VariationAggregate(variation=name, completed=0, failed=failed,
                                          mean=(), std=(), min=(), max=()))
            continue
        finals = np.array([r.final_mean_opinion for r in done])
        dists = [r.distance_to_goal for r in done if r.distance_to_goal is not None]
        out.append(VariationAggregate(
            variation=name,
            completed=len(done),
            failed=failed,
            mean=tuple(finals.mean(axis=0).tolist()),
            std=tuple(finals.std(axis=0).tolist()),
            min=tuple(finals.min(axis=0).tolist()),
            max=tuple(finals.max(axis=0).tolist()),
            distance_mean=float(np.mean(dists)) if dists else None,
            distance_std=float(np.std(dists)) if dists else None,
        ))
    return out


def seed_sweep(
    config: ExperimentConfig,
    n_jobs: int = 1,
    out_dir: Optional[Path] = None,
) -> ExperimentResult:
    """
    Run every (variation, seed) pair and aggregate final metrics per variation.

    Args:
        config: experiment definition
        n_jobs: joblib workers (1 = sequential, -1 = all cores)
        out_dir: when given, per-run trajectories plus raw/aggregate tables are written here

    Returns:
        ExperimentResult; failed runs are listed in `failures`, never dropped silently
    """
    tasks = config.tasks()
    logger.info(f"[SWEEP] {config.name}: {len(config.variations)} variations x {len(config.seeds)} seeds")
    reducer = partial(
        _to_record,
        goal=config.goal,
        trajectory_dir=str(Path(out_dir) / "trajectories") if out_dir is not None else None,
    )
    outputs = run_batch(tasks, n_jobs=n_jobs, reducer=reducer)

    runs = [o for o in outputs if isinstance(o, RunRecord)]
    failures = [o for o in outputs if isinstance(o, RunFailure)]
    result = ExperimentResult(
        name=config.name,
        goal=config.goal,
        runs=runs,
        failures=failures,
        aggregates=aggregate_runs([v.name for v in config.variations], runs, failures),
    )
    for agg in result.aggregates:
        ulog.sweep_progress(agg.completed, agg.completed + agg.failed, agg.variation)
    if out_dir is not None:
        RunStorage(out_dir).save_experiment(result)
    return result


# ---------------------------------------------------------------------------
# Named experiments
# ---------------------------------------------------------------------------

def _fmt_rho(rho: float) -> str:
    return f"{rho:+g}"


def popular_spectrum_config(
    seeds: Sequence[int],
    horizon: int = 180,
    base: Optional[BaseNetwork] = None,
) -> ExperimentConfig:
    variations = [Variation(name="control")]
    for rho in POPULAR_RHOS:
        label = ControllerSpec.popular(rho).label
        for count in POPULAR_COUNTS:
            variations.append(Variation(
                name=f"{label}-{count}",
                controllers=(ControllerSpec.popular(rho),) * count,
            ))
    return ExperimentConfig(
        name="popular-spectrum",
        base=base or BaseNetwork(),
        variations=tuple(variations),
        seeds=tuple(seeds),
        horizon=horizon,
    )


def strategic_spectrum_config(
    seeds: Sequence[int],
    horizon: int = 180,
    rhos: Sequence[float] = STRATEGIC_RHOS,
    base: Optional[BaseNetwork] = None,
) -> ExperimentConfig:
    base = base or BaseNetwork()
    goal = (0.0,) * base.m
    variations = [Variation(name="control")]
    variations += [
        Variation(name=f"strategic-rho{_fmt_rho(rho)}",
                  controllers=(ControllerSpec.strategic(goal, rho),))
        for rho in rhos
    ]
    return ExperimentConfig(
        name="strategic-spectrum",
        base=base,
        variations=tuple(variations),
        seeds=tuple(seeds),
        horizon=horizon,
        goal=goal,
    )


def strategic_vs_stubborn_config(
    seeds: Sequence[int],
    horizon: int = 3500,
    eps_edges: Sequence[float] = EDGE_FLOORS,
    rho: float = 2.0,
    include_control: bool = False,
    base: Optional[BaseNetwork] = None,
) -> ExperimentConfig:
    base = base or BaseNetwork()
    goal = (0.0,) * base.m
    variations = []
    for eps in eps_edges:
        if include_control:
            variations.append(Variation(name=f"control-eps{eps:g}", eps_edge=eps))
        variations.append(Variation(name=f"stubborn-eps{eps:g}", eps_edge=eps,
                                    controllers=(ControllerSpec.stubborn(goal),)))
        variations.append(Variation(name=f"strategic-eps{eps:g}", eps_edge=eps,
                                    controllers=(ControllerSpec.strategic(goal, rho),)))
    return ExperimentConfig(
        name="strat-vs-stub",
        base=base,
        variations=tuple(variations),
        seeds=tuple(seeds),
        horizon=horizon,
        goal=goal,
    )


def _check_seeds(seeds: Sequence[int]) -> None:
    if not seeds:
        raise ExperimentError("seed list must not be empty")


def popular_spectrum_experiment(seeds: Sequence[int], horizon: int = 180, n_jobs: int = 1,
                                out_dir: Optional[Path] = None, **kwargs) -> ExperimentResult:
    _check_seeds(seeds)
    return seed_sweep(popular_spectrum_config(seeds, horizon, **kwargs), n_jobs, out_dir)


def strategic_spectrum_experiment(seeds: Sequence[int], horizon: int = 180, n_jobs: int = 1,
                                  out_dir: Optional[Path] = None, **kwargs) -> ExperimentResult:
    _check_seeds(seeds)
    return seed_sweep(strategic_spectrum_config(seeds, horizon, **kwargs), n_jobs, out_dir)


def strategic_vs_stubborn_experiment(seeds: Sequence[int], horizon: int = 3500, n_jobs: int = 1,
                                     out_dir: Optional[Path] = None, **kwargs) -> ExperimentResult:
    _check_seeds(seeds)
    return seed_sweep(strategic_vs_stubborn_config(seeds, horizon, **kwargs), n_jobs, out_dir)


EXPERIMENTS: Dict[str, Callable[..., ExperimentResult]] = {
    "popular-spectrum": popular_spectrum_experiment,
    "strategic-spectrum": strategic_spectrum_experiment,
    "strat-vs-stub": strategic_vs_stubborn_experiment,
}


def run_named_experiment(name: str, seeds: Sequence[int], **kwargs) -> ExperimentResult:
    """Dispatch to one of EXPERIMENTS by CLI name."""
    try:
        experiment = EXPERIMENTS[name]
    except KeyError:
        raise ExperimentError(f"unknown experiment '{name}', choose from {sorted(EXPERIMENTS)}")
    return experiment(seeds, **kwargs)
