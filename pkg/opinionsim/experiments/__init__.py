"""
Controller experiments: named reproductions and the seed sweep harness.
"""

from .suite import (
    EXPERIMENTS,
    BaseNetwork,
    ExperimentConfig,
    ExperimentResult,
    Variation,
    popular_spectrum_experiment,
    run_named_experiment,
    seed_sweep,
    strategic_spectrum_experiment,
    strategic_vs_stubborn_experiment,
)

__all__ = [
    "EXPERIMENTS",
    "BaseNetwork",
    "ExperimentConfig",
    "ExperimentResult",
    "Variation",
    "popular_spectrum_experiment",
    "run_named_experiment",
    "seed_sweep",
    "strategic_spectrum_experiment",
    "strategic_vs_stubborn_experiment",
]
