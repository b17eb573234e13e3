import json

import numpy as np
import pytest
from pydantic import ValidationError

from opinionsim.agents.spec import ControllerSpec
from opinionsim.errors import ExperimentError
from opinionsim.experiments.suite import (
    BaseNetwork,
    ExperimentConfig,
    RunFailure,
    RunRecord,
    Variation,
    aggregate_runs,
    popular_spectrum_config,
    popular_spectrum_experiment,
    run_named_experiment,
    seed_sweep,
    strategic_spectrum_config,
    strategic_spectrum_experiment,
    strategic_vs_stubborn_config,
    strategic_vs_stubborn_experiment,
)
from opinionsim.graph.engine import build_state
from opinionsim.graph.metrics import measure

SMALL = BaseNetwork(n_standard=10, m=3)
ENSEMBLE = list(range(20))


def _sweep(variations, seeds, horizon=8, **kwargs):
    return seed_sweep(ExperimentConfig(name="t", base=SMALL, variations=tuple(variations),
                                       seeds=tuple(seeds), horizon=horizon, **kwargs))


def test_popular_spectrum_has_eleven_variations():
    config = popular_spectrum_config([0])
    assert len(config.variations) == 11
    assert config.variations[0].name == "control" and not config.variations[0].controllers
    names = [v.name for v in config.variations]
    assert "people-pleaser-50" in names and "popularizer-1" in names
    assert config.horizon == 180


def test_strategic_spectrum_grid():
    config = strategic_spectrum_config([0])
    rhos = [v.controllers[0].rho for v in config.variations[1:]]
    assert len(rhos) == 11 and min(rhos) == -100 and max(rhos) == 100
    assert {2.0, 5.0} <= set(rhos)
    assert config.goal == (0.0, 0.0, 0.0)


def test_strategic_vs_stubborn_has_six_variations():
    config = strategic_vs_stubborn_config([0])
    assert len(config.variations) == 6
    assert config.horizon == 3500
    assert sorted({v.eps_edge for v in config.variations}) == [0.0, 0.001, 0.01]
    strategic = [v for v in config.variations if v.name.startswith("strategic")]
    assert all(v.controllers[0].rho == 2 for v in strategic)
    assert len(strategic_vs_stubborn_config([0], include_control=True).variations) == 9


def test_config_requires_seeds():
    with pytest.raises(ValidationError):
        ExperimentConfig(name="x", variations=(Variation(name="control"),), seeds=(), horizon=5)
    with pytest.raises(ExperimentError):
        popular_spectrum_experiment([])
    with pytest.raises(ExperimentError):
        run_named_experiment("no-such-study", [0])


def test_seed_sweep_counts_rows():
    result = _sweep([Variation(name="control")], range(5))
    assert len(result.runs) == 5
    assert len(result.aggregates) == 1
    assert result.aggregate("control").completed == 5


def test_repeated_seed_gives_identical_rows():
    result = _sweep([Variation(name="control")], [3, 3])
    assert result.runs[0] == result.runs[1]


def test_aggregates_bracket_the_mean():
    variation = Variation(name="pleasers", controllers=(ControllerSpec.popular(-10),) * 2)
    result = _sweep([Variation(name="control"), variation], range(4))
    for agg in result.aggregates:
        assert all(lo <= mu <= hi for lo, mu, hi in zip(agg.min, agg.mean, agg.max))


def test_failures_are_reported_not_dropped():
    broken = Variation(name="broken", controllers=(ControllerSpec.stubborn([0.0, 0.0]),))
    result = _sweep([Variation(name="control"), broken], range(3))
    assert len(result.failures) == 3
    assert all(f.variation == "broken" and "expected m=3" in f.error for f in result.failures)
    agg = result.aggregate("broken")
    assert agg.completed == 0 and agg.failed == 3
    assert result.aggregate("control").completed == 3


def test_aggregate_runs_distance_statistics():
    runs = [
        RunRecord(variation="a", seed=s, steps=1, final_mean_opinion=(v,), final_mean_opinion_all=(v,),
                  distance_to_goal=v, component_count=1, intra_cluster_dispersion=0.0,
                  initial_dispersion=0.1)
        for s, v in enumerate((0.2, 0.4))
    ]
    [agg] = aggregate_runs(["a"], runs, [RunFailure(variation="a", seed=9, error="x")])
    assert agg.mean == pytest.approx((0.3,))
    assert agg.distance_mean == pytest.approx(0.3)
    assert agg.distance_std == pytest.approx(0.1)
    assert agg.failed == 1


def test_control_identical_across_experiments():
    kwargs = {"horizon": 5, "base": SMALL}
    pop = popular_spectrum_experiment([4], **kwargs)
    strat = strategic_spectrum_experiment([4], rhos=(2.0,), **kwargs)
    stub = strategic_vs_stubborn_experiment([4], eps_edges=(0.001,), include_control=True, **kwargs)
    control = pop.runs_for("control")[0]
    strat_control = strat.runs_for("control")[0]
    assert strat_control.final_mean_opinion == control.final_mean_opinion
    assert strat_control.intra_cluster_dispersion == control.intra_cluster_dispersion
    stub_control = stub.runs_for("control-eps0.001")[0]
    assert stub_control.final_mean_opinion == control.final_mean_opinion


def test_all_variations_of_a_seed_share_the_base_network():
    config = ExperimentConfig(
        name="t", base=SMALL, seeds=(11,), horizon=1,
        variations=(Variation(name="control"),
                    Variation(name="stub", controllers=(ControllerSpec.stubborn([0, 0, 0]),))),
    )
    control, stub = (build_state(t) for t in config.tasks())
    n = SMALL.n_standard
    assert np.array_equal(control.X, stub.X[:n])
    assert np.array_equal(control.A, stub.A[:n, :n])
    # the controller joins edgeless, so it counts as its own component
    assert not stub.A[n:].any()
    assert measure(stub).component_count == measure(control).component_count + 1


def test_distance_to_goal_reported():
    result = _sweep([Variation(name="control")], [0], goal=(0.0, 0.0, 0.0))
    run = result.runs[0]
    assert run.distance_to_goal == pytest.approx(sum(run.final_mean_opinion))
    assert result.aggregate("control").distance_mean == pytest.approx(run.distance_to_goal)


def test_seed_sweep_writes_outputs(tmp_path):
    config = ExperimentConfig(name="t", base=SMALL, variations=(Variation(name="control"),),
                              seeds=(0, 1), horizon=6)
    result = seed_sweep(config, out_dir=tmp_path)
    raw = (tmp_path / "raw.csv").read_text().splitlines()
    assert len(raw) == 3 and raw[0].startswith("variation,seed,steps,mean_op_0")
    assert len((tmp_path / "aggregate.csv").read_text().splitlines()) == 2
    trajectory = tmp_path / "trajectories" / "control" / "seed_1.csv"
    assert len(trajectory.read_text().splitlines()) == 7
    assert result.runs[1].trajectory_path == str(trajectory)
    assert json.loads((tmp_path / "result.json").read_text())["name"] == "t"
    assert not (tmp_path / "failures.csv").exists()


# --------------------------------------------------------------------------
# Seed-ensemble reproductions of the controller studies
# --------------------------------------------------------------------------

@pytest.mark.slow
def test_echo_chambers_form_in_bare_network():
    result = seed_sweep(ExperimentConfig(name="echo", variations=(Variation(name="control"),),
                                         seeds=tuple(ENSEMBLE), horizon=500), n_jobs=-1)
    runs = result.runs
    assert len(runs) == 20
    assert np.median([r.component_count for r in runs]) >= 2
    ratios = [r.intra_cluster_dispersion / r.initial_dispersion for r in runs if r.initial_dispersion > 0]
    assert np.median(ratios) < 0.2


@pytest.mark.slow
def test_popular_agents_relay_without_moving_the_ensemble_mean():
    # W is doubly stochastic up to row-sum differences, so the standard mean is
    # nearly conserved; popular agents mostly see 0-2 neighbours and just relay them
    result = popular_spectrum_experiment(ENSEMBLE, n_jobs=-1)
    control = result.aggregate("control")
    assert control.completed == 20
    for name in result.variations[1:]:
        agg = result.aggregate(name)
        assert agg.completed == 20
        assert agg.mean == pytest.approx(control.mean, abs=5e-3)


@pytest.mark.slow
def test_gentle_strategic_agent_beats_control():
    result = strategic_spectrum_experiment(ENSEMBLE, n_jobs=-1)
    control = {r.seed: r.distance_to_goal for r in result.runs_for("control")}
    gentle = result.runs_for("strategic-rho+2")
    wins = [r.distance_to_goal < control[r.seed] for r in gentle]
    assert sum(wins) >= 0.75 * len(wins)


@pytest.mark.slow
def test_strategic_and_stubborn_influence_follows_the_edge_floor():
    result = strategic_vs_stubborn_experiment(ENSEMBLE, n_jobs=-1, include_control=True)

    # past consensus both controllers are lone outliers reached only through eps_edge
    for kind in ("stubborn", "strategic"):
        low = result.aggregate(f"{kind}-eps0.001").distance_mean
        high = result.aggregate(f"{kind}-eps0.01").distance_mean
        assert high < low

    control = result.aggregate("control-eps0")
    for name in ("stubborn-eps0", "strategic-eps0"):
        agg = result.aggregate(name)
        for j in range(3):
            assert abs(agg.mean[j] - control.mean[j]) <= 2 * control.std[j]
