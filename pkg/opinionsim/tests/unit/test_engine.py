import logging

import numpy as np
import pytest

from opinionsim.agents.spec import ControllerSpec
from opinionsim.errors import NonFiniteStateError
from opinionsim.graph import engine
from opinionsim.graph.engine import (
    RunTask,
    attach_controllers,
    build_state,
    execute_task,
    init_network,
    run,
    run_batch,
    step,
)
from opinionsim.graph.state import SimulationState, StabilityCriterion
from opinionsim.runtime.network import STANDARD, EdgeParams
from opinionsim.runtime.rng import RngStream

STUBBORN = ControllerSpec.stubborn([0.0, 0.0, 0.0])
MIXED = (STUBBORN, ControllerSpec.popular(-10), ControllerSpec.strategic([0.0, 0.0, 0.0], 2))


def final_means(outcome):
    """Module-level so joblib workers can pickle it."""
    return outcome.result.final.mean_opinion


def test_init_network_deterministic(params):
    a = init_network(50, 3, [], params, RngStream(17))
    b = init_network(50, 3, [], params, RngStream(17))
    assert np.array_equal(a.X, b.X) and np.array_equal(a.A, b.A)
    assert a.roles == (STANDARD,) * 50
    assert np.array_equal(a.A, a.A.T) and not a.A.diagonal().any()


def test_init_network_controller_rows(params):
    state = init_network(10, 3, MIXED, params, RngStream(3))
    assert state.n == 13
    assert state.roles[10:] == (0, 1, 2)
    assert state.X[10].tolist() == [0.0, 0.0, 0.0]
    assert ((state.X >= 0) & (state.X <= 1)).all()
    assert not state.A[10:, 10:].any()
    assert state.rng.draws == 10 * 3 + 2 * 3 + 13 * 12 // 2


def test_init_network_rejects_bad_counts(params):
    with pytest.raises(ValueError):
        init_network(0, 3, [], params, RngStream(0))
    with pytest.raises(ValueError):
        init_network(5, 2, [STUBBORN], params, RngStream(0))


def test_attach_controllers_adds_edgeless_agents(params):
    base = init_network(8, 3, [], params, RngStream(5))
    state = attach_controllers(base, MIXED)
    assert state.n == 11
    assert np.array_equal(state.X[:8], base.X)
    assert np.array_equal(state.A[:8, :8], base.A)
    assert not state.A[8:].any() and not state.A[:, 8:].any()
    assert state.agents_of(STUBBORN.archetype) == [8]


def test_step_consumes_one_draw_per_pair(params):
    state = init_network(9, 2, [ControllerSpec.popular(3)], params, RngStream(1))
    for _ in range(5):
        before = state.rng.draws
        state = step(state)
        assert state.rng.draws - before == 10 * 9 // 2
    assert state.k == 5


def test_step_consensus_is_fixed(params):
    X = np.tile([0.2, 0.6, 0.9], (6, 1))
    A = ~np.eye(6, dtype=bool)
    state = SimulationState(X=X, A=A, roles=(STANDARD,) * 6, params=params, rng=RngStream(0))
    assert step(state).X == pytest.approx(X, abs=1e-12)


def test_single_agent_network(params):
    state = init_network(1, 2, [], params, RngStream(4))
    result = run(state, 10)
    assert np.array_equal(result.final_state.X, state.X)
    assert not result.final_state.A.any()
    assert result.final_state.rng.draws == 2


def test_stubborn_only_network_is_constant(params):
    specs = (ControllerSpec.stubborn([0.1, 0.9]), ControllerSpec.stubborn([0.7, 0.3]))
    X = np.array([[0.1, 0.9], [0.7, 0.3]])
    state = SimulationState(X=X, A=np.zeros((2, 2), dtype=bool), roles=(0, 1),
                            controllers=specs, params=params, rng=RngStream(0))
    result = run(state, 20)
    assert np.array_equal(result.final_state.X, X)


def test_stubborn_row_bit_identical_every_step():
    params = EdgeParams(theta=7, eps_edge=0.01)
    for seed in range(20):
        state = init_network(20, 3, [STUBBORN], params, RngStream(seed))
        rows = []
        current = state
        for _ in range(500):
            current = step(current)
            rows.append(current.X[20].copy())
        assert all(r.tolist() == [0.0, 0.0, 0.0] for r in rows)


def test_run_records_one_metric_per_step(params):
    state = init_network(15, 3, MIXED, params, RngStream(9))
    before = state.rng.draws
    seen = []
    result = run(state, 180, recorder=seen.append)
    assert len(result.trajectory) == 180 == len(seen)
    assert [m.k for m in result.trajectory] == list(range(1, 181))
    assert result.initial.k == 0
    assert result.final_state.rng.draws - before == 180 * (18 * 17 // 2)


def test_run_rejects_zero_steps(params):
    with pytest.raises(ValueError):
        run(init_network(3, 1, [], params, RngStream(0)), 0)


def test_consensus_start_stabilises_within_window(params):
    X = np.full((5, 2), 0.4)
    state = SimulationState(X=X, A=np.zeros((5, 5), dtype=bool), roles=(STANDARD,) * 5,
                            params=params, rng=RngStream(0))
    criterion = StabilityCriterion(tol=1e-4, window=20)
    result = run(state, 50, criterion)
    assert result.stabilized_at is not None and result.stabilized_at <= 20
    assert len(result.trajectory) == 50

    stopped = run(state, 50, criterion, stop_on_stable=True)
    assert len(stopped.trajectory) == stopped.stabilized_at


def test_non_finite_opinions_abort(params, monkeypatch):
    state = init_network(4, 2, [], params, RngStream(0))
    monkeypatch.setattr(engine, "opinion_step", lambda X, W: np.full_like(X, np.nan))
    with pytest.raises(NonFiniteStateError) as exc:
        step(state)
    assert "step 0" in str(exc.value)
    assert exc.value.agents == [0, 1, 2, 3]


def test_same_seed_same_trajectory(params):
    a = run(init_network(20, 3, MIXED, params, RngStream(42)), 60)
    b = run(init_network(20, 3, MIXED, params, RngStream(42)), 60)
    assert a.trajectory == b.trajectory
    assert np.array_equal(a.final_state.A, b.final_state.A)


def test_execute_task_captures_failures(caplog):
    task = RunTask(seed=1, n_standard=5, m=2, controllers=(STUBBORN,), steps=3)
    with caplog.at_level(logging.WARNING, logger="opinionsim.ulog"):
        outcome = execute_task(task)
    assert not outcome.ok
    assert "expected m=2" in outcome.error
    assert "[FAILURE]" in caplog.text


def test_run_batch_keeps_task_order():
    tasks = [RunTask(variation=f"v{s}", seed=s, n_standard=8, m=2, steps=10) for s in (5, 1, 3)]
    outcomes = run_batch(tasks)
    assert [o.task.seed for o in outcomes] == [5, 1, 3]
    assert all(o.ok for o in outcomes)
    assert outcomes[0].result.trajectory == execute_task(tasks[0]).result.trajectory


def test_run_batch_parallel_matches_sequential():
    tasks = [RunTask(seed=s, n_standard=10, m=3, controllers=MIXED, steps=20) for s in range(4)]
    assert run_batch(tasks, n_jobs=2, reducer=final_means) == run_batch(tasks, reducer=final_means)


def test_build_state_shared_base_matches_standard_network():
    plain = RunTask(seed=8, n_standard=10, m=3, steps=1, shared_base=True)
    with_ctrl = plain.model_copy(update={"controllers": MIXED})
    a, b = build_state(plain), build_state(with_ctrl)
    assert np.array_equal(a.X, b.X[:10])
    assert np.array_equal(a.A, b.A[:10, :10])
