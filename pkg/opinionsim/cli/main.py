"""
opinionsim command line

    opinionsim run --config cfg.json [--seed N] [--steps N] [--out DIR]
    opinionsim sweep --config cfg.json --seeds 0..19 [--out DIR] [--jobs N]
    opinionsim experiment strat-vs-stub [--seeds 0..19] [--out DIR] [--horizon N]
    opinionsim validate --config cfg.json

Exit codes: 0 success, 1 usage / configuration error, 2 runtime failure.
"""

from __future__ import annotations
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import click
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from ..config import U64_MAX, RunConfig, parse_config, serialize_config, to_experiment, to_task
from ..errors import ConfigError, ExperimentError, OpinionSimError
from ..experiments.suite import EXPERIMENTS, ExperimentResult, run_named_experiment, seed_sweep
from ..graph import engine
from ..graph.state import RunResult
from ..settings import get_settings
from ..storage.runs import RunStorage
from ..utils import ulog

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


def parse_seed_range(text: str) -> List[int]:
    """
    Parse a seed list.

    Accepted forms: "a..b" (inclusive), "1,4,9" or a single integer.

    Raises:
        ValueError: malformed text, negative seed or an empty/descending range
    """
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        a, b = int(lo), int(hi)
        if a > b:
            raise ValueError(f"empty seed range {text}")
        seeds = list(range(a, b + 1))
    else:
        seeds = [int(part) for part in text.split(",") if part.strip()]
    if not seeds:
        raise ValueError("no seeds given")
    if any(s < 0 or s > U64_MAX for s in seeds):
        raise ValueError("seeds must be unsigned 64-bit integers")
    return seeds


class SeedRange(click.ParamType):
    name = "seeds"

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        try:
            return parse_seed_range(str(value))
        except ValueError as e:
            self.fail(str(e), param, ctx)


SEEDS = SeedRange()


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = get_settings().log_level.upper()
    if not isinstance(logging.getLevelName(level), int):
        raise click.UsageError(f"OPINION_SIM_LOG_LEVEL: unknown logging level {level!r}")
    if verbose:
        level = "INFO"
    if quiet:
        level = "ERROR"
    logging.basicConfig(format="%(levelname)s %(name)s %(message)s", stream=sys.stderr)
    logging.getLogger("opinionsim").setLevel(level)


def load_config(path: str) -> RunConfig:
    """Read and parse a config file; read failures are reported as config errors."""
    try:
        text = Path(path).read_bytes()
    except OSError as e:
        raise ConfigError([("<file>", f"cannot read {path}: {e}")])
    return parse_config(text)


# ==========================================================================
# Output tables
# ==========================================================================

def _vec(values: Sequence[float]) -> str:
    return "[" + ", ".join(f"{v:.4f}" for v in values) + "]"


def _run_table(result: RunResult, out_dir: Path, written: Sequence[Path] = ()) -> Table:
    final = result.final
    table = Table(title=f"Run finished at k={result.final_state.k}")
    table.add_column("Metric", style="cyan")
    table.add_column("Initial", justify="right")
    table.add_column("Final", justify="right")
    table.add_row("mean opinion", _vec(result.initial.mean_opinion), _vec(final.mean_opinion))
    table.add_row("components", str(result.initial.component_count), str(final.component_count))
    table.add_row("mean degree", f"{result.initial.mean_degree:.3f}", f"{final.mean_degree:.3f}")
    table.add_row("isolated", str(result.initial.isolated_count), str(final.isolated_count))
    table.add_row("dispersion", f"{result.initial.intra_cluster_dispersion:.4f}",
                  f"{final.intra_cluster_dispersion:.4f}")
    table.add_row("stabilised at", "", str(result.stabilized_at) if result.stabilized_at else "-")
    names = ", ".join(p.name for p in written)
    table.caption = escape(f"{len(written)} artifacts in {out_dir}: {names}")
    return table


def _experiment_table(result: ExperimentResult) -> Table:
    table = Table(title=f"{result.name}")
    table.add_column("Variation", style="cyan")
    table.add_column("Runs", justify="right")
    table.add_column("Failed", justify="right")
    table.add_column("Mean opinion", justify="right")
    table.add_column("Std", justify="right")
    if result.goal is not None:
        table.add_column("Distance to goal", justify="right")
    for agg in result.aggregates:
        row = [
            agg.variation,
            str(agg.completed),
            f"[red]{agg.failed}[/red]" if agg.failed else "0",
            _vec(agg.mean) if agg.mean else "-",
            _vec(agg.std) if agg.std else "-",
        ]
        if result.goal is not None:
            row.append(f"{agg.distance_mean:.4f} ± {agg.distance_std:.4f}"
                       if agg.distance_mean is not None else "-")
        table.add_row(*row)
    return table


# ==========================================================================
# Commands
# ==========================================================================

@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log INFO events ([RUN], [SWEEP], ...).")
@click.option("--quiet", "-q", is_flag=True, help="Only log errors.")
def cli(verbose: bool, quiet: bool):
    """Co-evolving opinion / network simulator with influence controllers."""
    _configure_logging(verbose, quiet)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=click.IntRange(0, U64_MAX), help="Override the config seed.")
@click.option("--steps", type=click.IntRange(min=1), help="Override the config step count.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Artifact directory.")
def run(config_path: str, seed: Optional[int], steps: Optional[int], out_dir: Optional[str]):
    """Single seeded run; writes metrics, graph snapshots and a summary."""
    cfg = load_config(config_path)
    task = to_task(cfg, seed=seed, steps=steps)
    state = engine.build_state(task)
    ulog.run_started(task.seed, state.n, state.m, task.steps, len(task.controllers))
    result = engine.run(state, task.steps, task.criterion, task.stop_on_stable)
    ulog.run_finished(task.seed, result.final_state.k, result.final.mean_opinion,
                      result.final.component_count)

    out = Path(out_dir or cfg.output.dir)
    echo = json.loads(serialize_config(cfg.model_copy(update={"seed": task.seed, "steps": task.steps})))
    storage = RunStorage(out)
    storage.save_run(state, result, cfg.output.formats, echo)
    console.print(_run_table(result, out, storage.written))


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seeds", required=True, type=SEEDS, help="a..b, comma list or one seed.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False))
@click.option("--jobs", type=int, default=None, help="Parallel workers (default OPINION_SIM_THREADS).")
def sweep(config_path: str, seeds: List[int], out_dir: Optional[str], jobs: Optional[int]):
    """Seed ensemble over one configuration."""
    cfg = load_config(config_path)
    out = Path(out_dir or cfg.output.dir)
    n_jobs = jobs if jobs is not None else get_settings().n_jobs
    result = seed_sweep(to_experiment(cfg, seeds), n_jobs=n_jobs, out_dir=out)
    console.print(_experiment_table(result))
    if result.failures:
        err_console.print(f"[red]{len(result.failures)} run(s) failed, see {out / 'failures.csv'}[/red]")
        return EXIT_RUNTIME
    return EXIT_OK


@cli.command()
@click.argument("name", type=click.Choice(sorted(EXPERIMENTS)))
@click.option("--seeds", type=SEEDS, default=None, help="Default 0..OPINION_SIM_DEFAULT_SEEDS-1.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False))
@click.option("--horizon", type=click.IntRange(min=1), default=None, help="Override the step count.")
@click.option("--jobs", type=int, default=None)
def experiment(name: str, seeds: Optional[List[int]], out_dir: Optional[str],
               horizon: Optional[int], jobs: Optional[int]):
    """Named controller study (popular-spectrum, strategic-spectrum, strat-vs-stub)."""
    settings = get_settings()
    seeds = seeds if seeds is not None else list(range(settings.default_seeds))
    out = Path(out_dir or Path("runs") / name)
    kwargs = {"n_jobs": jobs if jobs is not None else settings.n_jobs, "out_dir": out}
    if horizon is not None:
        kwargs["horizon"] = horizon
    logger.info(f"[EXPERIMENT] {name} seeds={len(seeds)} -> {out}")
    result = run_named_experiment(name, seeds, **kwargs)
    console.print(_experiment_table(result))
    if result.failures:
        err_console.print(f"[red]{len(result.failures)} run(s) failed, see {out / 'failures.csv'}[/red]")
        return EXIT_RUNTIME
    return EXIT_OK


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
def validate(config_path: str):
    """Parse a config file and report problems without running anything."""
    cfg = load_config(config_path)
    agents = sum(c.count for c in cfg.controllers)
    console.print(f"[green]✓[/green] {config_path}: n={cfg.n_standard}+{agents} m={cfg.m} "
                  f"theta={cfg.theta} steps={cfg.steps} seed={cfg.seed}")


# ==========================================================================
# Entry points
# ==========================================================================

def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI and return its exit status instead of exiting.

    Args:
        argv: arguments without the program name (default: sys.argv[1:])

    Returns:
        0 on success, 1 on usage or configuration errors, 2 on runtime failures
    """
    args = list(argv) if argv is not None else sys.argv[1:]
    try:
        rv = cli.main(args=args, prog_name="opinionsim", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        err_console.print("[red]aborted[/red]")
        return EXIT_USAGE
    except (ConfigError, ExperimentError) as e:
        err_console.print(f"[red]✗ {escape(str(e))}[/red]", highlight=False)
        return EXIT_USAGE
    except (OpinionSimError, OSError) as e:
        err_console.print(f"[red]✗ {type(e).__name__}: {escape(str(e))}[/red]", highlight=False)
        return EXIT_RUNTIME
    return rv if isinstance(rv, int) else EXIT_OK


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
