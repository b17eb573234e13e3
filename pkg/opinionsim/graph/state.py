from __future__ import annotations
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..agents.spec import Archetype, ControllerSpec
from ..runtime.matrix_ops import DEFAULT_EPS_NORM
from ..runtime.network import STANDARD, EdgeParams
from ..runtime.rng import RngStream


class SimulationState(BaseModel):
    # numpy arrays and the rng stream are carried as-is
    model_config = ConfigDict(arbitrary_types_allowed=True)

    X: np.ndarray                       # n x m opinions in [0, 1]
    A: np.ndarray                       # n x n bool, symmetric, hollow
    roles: Tuple[int, ...]              # STANDARD or index into controllers
    controllers: Tuple[ControllerSpec, ...] = ()
    params: EdgeParams = Field(default_factory=EdgeParams)
    eps_norm: float = DEFAULT_EPS_NORM
    k: int = 0
    rng: RngStream

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def m(self) -> int:
        return int(self.X.shape[1])

    @property
    def standard_mask(self) -> np.ndarray:
        return np.asarray(self.roles) == STANDARD

    def agents_of(self, archetype: Archetype) -> List[int]:
        """Agent indices whose controller spec has the given archetype."""
        return [
            i for i, r in enumerate(self.roles)
            if r != STANDARD and self.controllers[r].archetype is archetype
        ]


class StepMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    mean_opinion: Tuple[float, ...]       # standard agents only
    mean_opinion_all: Tuple[float, ...]   # every agent, controllers included
    component_count: int
    mean_degree: float
    max_degree: int
    isolated_count: int
    intra_cluster_dispersion: float
    mean_abs_change: float = 0.0          # mean |x_k - x_{k-1}| per entry

    def distance_to(self, goal) -> float:
        """1-norm distance of the standard-agent mean opinion to `goal`."""
        return float(np.abs(np.asarray(self.mean_opinion) - np.asarray(goal, dtype=float)).sum())


class StabilityCriterion(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol: float = Field(default=1e-4, gt=0)
    window: int = Field(default=20, ge=1)


class RunResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    initial: StepMetrics
    trajectory: List[StepMetrics]
    final_state: SimulationState
    stabilized_at: Optional[int] = None

    @property
    def final(self) -> StepMetrics:
        return self.trajectory[-1]
