"""
Controller specifications.

A ControllerSpec describes ONE controller agent. Config files group identical
controllers with a `count`; they are expanded into one spec per agent before a
network is built.
"""

from __future__ import annotations
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class Archetype(str, Enum):
    stubborn = "stubborn"
    popular = "popular"
    strategic = "strategic"


class ControllerSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    archetype: Archetype
    rho: float = 0.0
    goal: Optional[Tuple[float, ...]] = None           # strategic only
    fixed_opinion: Optional[Tuple[float, ...]] = None  # stubborn only

    @field_validator("goal", "fixed_opinion")
    @classmethod
    def _unit_interval(cls, v):
        if v is not None and any(not (0.0 <= x <= 1.0) for x in v):
            raise ValueError("entries must lie in [0, 1]")
        return v

    @field_validator("rho")
    @classmethod
    def _finite_rho(cls, v: float) -> float:
        if not np.isfinite(v):
            raise ValueError("rho must be finite")
        return v

    @model_validator(mode="after")
    def _required_vectors(self) -> "ControllerSpec":
        if self.archetype is Archetype.stubborn and self.fixed_opinion is None:
            raise ValueError("stubborn controller needs fixed_opinion")
        if self.archetype is Archetype.strategic and self.goal is None:
            raise ValueError("strategic controller needs goal")
        return self

    @property
    def label(self) -> str:
        """Human name for the behaviour selected by rho."""
        if self.archetype is Archetype.popular:
            if self.rho < 0:
                return "people-pleaser"
            return "conciliator" if self.rho == 0 else "popularizer"
        if self.archetype is Archetype.strategic:
            if self.rho < 0:
                return "heavy-handed"
            return "neutral" if self.rho == 0 else "gentle"
        return "stubborn"

    @classmethod
    def stubborn(cls, opinion) -> "ControllerSpec":
        return cls(archetype=Archetype.stubborn, fixed_opinion=tuple(opinion))

    @classmethod
    def popular(cls, rho: float) -> "ControllerSpec":
        return cls(archetype=Archetype.popular, rho=rho)

    @classmethod
    def strategic(cls, goal, rho: float) -> "ControllerSpec":
        return cls(archetype=Archetype.strategic, goal=tuple(goal), rho=rho)
