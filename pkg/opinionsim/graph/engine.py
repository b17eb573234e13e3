"""
Simulation engine

Owns the per-step update loop of a single seeded run:

    X_k, A_k  ->  W (stubborn rows overridden)  ->  X_{k+1} = W X_k
              ->  popular / strategic rows overwritten from (X_k, A_k)
              ->  A_{k+1} resampled from S_hat(X_k)

Everything in one step reads time-k data only. The only randomness is the
edge resampling: exactly n(n-1)/2 uniforms per step, drawn in a fixed order.

A batch interface (run_batch) runs independent (config, seed) tasks with joblib;
tasks share nothing, results come back in task order.
"""

from __future__ import annotations
import logging
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field

from ..agents.popular import apply_popular
from ..agents.spec import Archetype, ControllerSpec
from ..agents.strategic import apply_strategic
from ..agents.stubborn import apply_stubborn
from ..errors import NonFiniteStateError, SimulationError
from ..runtime.matrix_ops import DEFAULT_EPS_NORM, check_eps_norm
from ..runtime.network import (
    STANDARD,
    EdgeParams,
    edge_probabilities,
    opinion_step,
    resample_edges,
    weight_matrix,
)
from ..runtime.rng import RngStream
from ..utils import ulog
from .metrics import detect_stability, measure
from .state import RunResult, SimulationState, StabilityCriterion, StepMetrics

logger = logging.getLogger(__name__)

Recorder = Callable[[StepMetrics], None]


def _controller_row(spec: ControllerSpec, m: int, rng: RngStream) -> np.ndarray:
    """Initial opinion of a controller agent."""
    if spec.archetype is Archetype.stubborn:
        row = np.asarray(spec.fixed_opinion, dtype=float)
        if row.size != m:
            raise ValueError(f"stubborn opinion has {row.size} entries, expected m={m}")
        return row
    if spec.archetype is Archetype.strategic and len(spec.goal) != m:
        raise ValueError(f"strategic goal has {len(spec.goal)} entries, expected m={m}")
    # popular / strategic agents start like anybody else
    return rng.uniform(m)


def init_network(
    n_standard: int,
    m: int,
    specs: Sequence[ControllerSpec],
    params: EdgeParams,
    rng: RngStream,
    eps_norm: float = DEFAULT_EPS_NORM,
) -> SimulationState:
    """
    Build the k = 0 state.

    Standard opinions are i.i.d. U[0,1] (drawn first, row-major), controllers are
    appended after them in spec order, and A_0 is one edge resampling of X_0.

    Args:
        n_standard: number of standard agents (>= 1)
        m: number of topics (>= 1)
        specs: one ControllerSpec per controller agent
        params: edge formation parameters
        rng: stream consumed for opinions and edges
        eps_norm: normalisation guard

    Returns:
        SimulationState at k = 0
    """
    if n_standard < 1 or m < 1:
        raise ValueError(f"need n_standard >= 1 and m >= 1, got {n_standard}, {m}")
    eps_norm = check_eps_norm(eps_norm)
    specs = tuple(specs)

    rows = [rng.uniform(n_standard * m).reshape(n_standard, m)]
    rows += [_controller_row(s, m, rng).reshape(1, m) for s in specs]
    X = np.vstack(rows)
    roles = (STANDARD,) * n_standard + tuple(range(len(specs)))
    n = X.shape[0]

    if n >= 2:
        A = resample_edges(edge_probabilities(X, params, eps_norm), params, roles, rng)
    else:
        A = np.zeros((1, 1), dtype=bool)

    logger.info(f"[ENGINE] initialised n={n} (standard={n_standard}) m={m} edges={int(A.sum()) // 2}")
    return SimulationState(
        X=X, A=A, roles=roles, controllers=specs, params=params, eps_norm=eps_norm, k=0, rng=rng
    )


def attach_controllers(state: SimulationState, specs: Sequence[ControllerSpec]) -> SimulationState:
    """
    Append controller agents to an existing network without any edges.

    Used to drop the same controllers into a shared base network; followers
    arrive through edge resampling from the next step on.
    """
    specs = tuple(specs)
    if not specs:
        return state
    m = state.m
    new_rows = np.vstack([_controller_row(s, m, state.rng).reshape(1, m) for s in specs])
    n_old, n_new = state.n, state.n + len(specs)
    A = np.zeros((n_new, n_new), dtype=bool)
    A[:n_old, :n_old] = state.A
    offset = len(state.controllers)
    return state.model_copy(update={
        "X": np.vstack([state.X, new_rows]),
        "A": A,
        "roles": state.roles + tuple(offset + j for j in range(len(specs))),
        "controllers": state.controllers + specs,
    })


def step(state: SimulationState) -> SimulationState:
    """
    Advance one synchronous time step.

    The returned state shares (and has advanced) the input state's RngStream.

    Raises:
        NonFiniteStateError: NaN/Inf in the new opinions
        SimulationError: rng consumption differs from n(n-1)/2
    """
    X, A, eps = state.X, state.A, state.eps_norm
    n = state.n

    W = weight_matrix(X, A, eps)
    for i in state.agents_of(Archetype.stubborn):
        W = apply_stubborn(W, i)
    X_next = opinion_step(X, W)

    for i in state.agents_of(Archetype.popular):
        spec = state.controllers[state.roles[i]]
        X_next[i] = apply_popular(X, A, i, spec.rho, eps)
    for i in state.agents_of(Archetype.strategic):
        spec = state.controllers[state.roles[i]]
        X_next[i] = apply_strategic(X, A, i, spec.goal, spec.rho, eps)

    bad = np.flatnonzero(~np.isfinite(X_next).all(axis=1))
    if bad.size:
        raise NonFiniteStateError(state.k, bad.tolist())

    before = state.rng.draws
    if n >= 2:
        A_next = resample_edges(edge_probabilities(X, state.params, eps), state.params, state.roles, state.rng)
    else:
        A_next = A.copy()
    if state.rng.draws - before != n * (n - 1) // 2:
        raise SimulationError(f"rng consumed {state.rng.draws - before} draws at step {state.k}")

    return state.model_copy(update={"X": X_next, "A": A_next, "k": state.k + 1})


def run(
    state: SimulationState,
    steps: int,
    criterion: Optional[StabilityCriterion] = None,
    stop_on_stable: bool = False,
    recorder: Optional[Recorder] = None,
) -> RunResult:
    """
    Execute up to `steps` steps and record StepMetrics after each one.

    Args:
        state: starting state
        steps: number of steps (>= 1)
        criterion: optional stability criterion, reported via stabilized_at
        stop_on_stable: stop as soon as the criterion holds (off by default)
        recorder: called with every StepMetrics as it is produced

    Returns:
        RunResult with the initial metrics, the trajectory and the final state
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")

    initial = measure(state)
    trajectory: List[StepMetrics] = []
    changes: List[float] = []
    stabilized_at: Optional[int] = None

    for _ in range(steps):
        previous = state.X
        state = step(state)
        metrics = measure(state, previous)
        trajectory.append(metrics)
        changes.append(metrics.mean_abs_change)
        if recorder is not None:
            recorder(metrics)

        if criterion is not None and stabilized_at is None and detect_stability(changes, criterion):
            stabilized_at = state.k
            ulog.stability_reached(state.k, criterion.window, criterion.tol)
            if stop_on_stable:
                break

    return RunResult(initial=initial, trajectory=trajectory, final_state=state, stabilized_at=stabilized_at)


class RunTask(BaseModel):
    """One independent (configuration, seed) job for run_batch."""

    model_config = ConfigDict(frozen=True)

    variation: str = "default"
    seed: int
    n_standard: int = Field(ge=1)
    m: int = Field(ge=1)
    controllers: Tuple[ControllerSpec, ...] = ()
    params: EdgeParams = Field(default_factory=EdgeParams)
    eps_norm: float = DEFAULT_EPS_NORM
    steps: int = Field(ge=1)
    criterion: Optional[StabilityCriterion] = None
    stop_on_stable: bool = False
    # True: build the standard-only network first, then attach controllers edgeless
    shared_base: bool = False


class TaskOutcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    task: RunTask
    result: Optional[RunResult] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def build_state(task: RunTask) -> SimulationState:
    rng = RngStream(task.seed)
    if task.shared_base:
        base = init_network(task.n_standard, task.m, [], task.params, rng, task.eps_norm)
        return attach_controllers(base, task.controllers)
    return init_network(task.n_standard, task.m, task.controllers, task.params, rng, task.eps_norm)


def execute_task(task: RunTask) -> TaskOutcome:
    """Run one task, capturing simulation failures instead of raising them."""
    try:
        state = build_state(task)
        ulog.run_started(task.seed, state.n, state.m, task.steps, len(task.controllers))
        result = run(state, task.steps, task.criterion, task.stop_on_stable)
        ulog.run_finished(task.seed, result.final_state.k, result.final.mean_opinion,
                          result.final.component_count)
        return TaskOutcome(task=task, result=result)
    except (SimulationError, ValueError) as e:
        ulog.run_failed(task.variation, task.seed, f"{type(e).__name__}: {e}")
        return TaskOutcome(task=task, error=f"{type(e).__name__}: {e}")


def _execute_and_reduce(task: RunTask, reducer: Optional[Callable[[TaskOutcome], Any]]):
    outcome = execute_task(task)
    return outcome if reducer is None else reducer(outcome)


def run_batch(
    tasks: Sequence[RunTask],
    n_jobs: int = 1,
    reducer: Optional[Callable[[TaskOutcome], Any]] = None,
) -> List[Any]:
    """
    Run independent tasks, in parallel when n_jobs != 1.

    Args:
        tasks: jobs to run
        n_jobs: joblib worker count (1 = in-process, -1 = all cores)
        reducer: applied to each TaskOutcome inside the worker, so only the
            reduced value (not the whole trajectory) travels back; must be picklable

    Returns:
        One entry per task, in task order regardless of completion order
    """
    tasks = list(tasks)
    if n_jobs == 1 or len(tasks) <= 1:
        return [_execute_and_reduce(t, reducer) for t in tasks]
    logger.info(f"[ENGINE] dispatching {len(tasks)} runs (n_jobs={n_jobs})")
    return Parallel(n_jobs=n_jobs)(delayed(_execute_and_reduce)(t, reducer) for t in tasks)
