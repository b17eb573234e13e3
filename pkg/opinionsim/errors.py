"""
opinionsim error hierarchy.

Everything raised on purpose by the package derives from OpinionSimError, so the
CLI can map failures to exit codes without catching bare Exception.
"""

from __future__ import annotations
from typing import List, Tuple


class OpinionSimError(Exception):
    """Base class for all opinionsim failures."""


class MatrixDomainError(OpinionSimError, ValueError):
    """Operator input outside its mathematical domain (negative, NaN, bad exponent...)."""


class NonStochasticError(MatrixDomainError):
    """A weight matrix row does not sum to one."""


class DimensionMismatchError(OpinionSimError, ValueError):
    """Operands with incompatible shapes."""


class AgentIndexError(OpinionSimError, IndexError):
    """Agent index outside [0, n)."""


class ConfigError(OpinionSimError):
    """
    Run configuration could not be accepted.

    Attributes:
        violations: list of (key_path, message) pairs, key paths dotted
            (e.g. "controllers.0.goal"), "<root>" for document-level problems
    """

    kind = "config"

    def __init__(self, violations: List[Tuple[str, str]]):
        self.violations = list(violations)
        lines = [f"{path}: {msg}" for path, msg in self.violations]
        super().__init__(f"{self.kind} error: " + "; ".join(lines))

    @property
    def paths(self) -> List[str]:
        return [path for path, _ in self.violations]


class ConfigSyntaxError(ConfigError):
    kind = "syntax"


class ConfigSchemaError(ConfigError):
    kind = "schema"


class ConfigRangeError(ConfigError):
    kind = "range"


class SimulationError(OpinionSimError, RuntimeError):
    """A run could not continue."""


class NonFiniteStateError(SimulationError):
    """NaN or Inf appeared in the opinion matrix; the run is aborted, never clamped."""

    def __init__(self, k: int, agents: List[int]):
        self.k = k
        self.agents = list(agents)
        preview = ", ".join(str(a) for a in self.agents[:10])
        super().__init__(f"non-finite opinions at step {k} for agents [{preview}]")


class ExperimentError(OpinionSimError):
    """Experiment could not be set up (unknown name, empty seed list...)."""
