"""
Run configuration file (JSON).

    {
      "n_standard": 50, "m": 3, "theta": 7,
      "eps_edge": 0.001, "eps_norm": 1e-12,          # optional, defaults shown
      "steps": 180, "seed": 0,
      "controllers": [
        {"type": "strategic", "count": 1, "rho": 2, "goal": [0, 0, 0]},
        {"type": "popular",   "count": 5, "rho": 10},
        {"type": "stubborn",  "count": 1, "opinion": [0, 0, 0]}
      ],
      "stability": {"tol": 1e-4, "window": 20},      # optional
      "output": {"dir": "runs", "formats": ["csv", "dot", "json"]}   # optional
    }

parse_config raises one of three ConfigError subclasses:
- ConfigSyntaxError: not JSON
- ConfigSchemaError: missing / unknown key, wrong type, vector of the wrong length
- ConfigRangeError: a value outside its documented bounds
Each carries every violation with its dotted key path.
"""

from __future__ import annotations
import json
import logging
from typing import List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_core import PydanticCustomError

from .agents.spec import Archetype, ControllerSpec
from .errors import ConfigRangeError, ConfigSchemaError, ConfigSyntaxError
from .experiments.suite import BaseNetwork, ExperimentConfig, Variation
from .graph.engine import RunTask
from .graph.state import StabilityCriterion
from .runtime.matrix_ops import DEFAULT_EPS_NORM, MAX_EPS_NORM
from .runtime.network import DEFAULT_EPS_EDGE, EdgeParams

logger = logging.getLogger(__name__)

U64_MAX = 2**64 - 1

OutputFormat = Literal["csv", "dot", "json"]

RANGE_ERROR_TYPES = frozenset({
    "greater_than",
    "greater_than_equal",
    "less_than",
    "less_than_equal",
    "finite_number",
    "multiple_of",
    "too_short",
    "range_violation",
})


class ControllerEntry(BaseModel):
    """`count` identical controllers of one archetype."""

    model_config = ConfigDict(extra="forbid")

    type: Archetype
    count: int = Field(ge=1)
    rho: Optional[float] = Field(default=None, allow_inf_nan=False)
    goal: Optional[List[float]] = None
    opinion: Optional[List[float]] = None

    @field_validator("goal", "opinion")
    @classmethod
    def _unit_interval(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None and any(not (0.0 <= x <= 1.0) for x in v):
            raise PydanticCustomError("range_violation", "entries must lie in [0, 1]")
        return v

    @model_validator(mode="after")
    def _fields_for_type(self) -> "ControllerEntry":
        needed = {
            Archetype.stubborn: {"opinion"},
            Archetype.popular: {"rho"},
            Archetype.strategic: {"rho", "goal"},
        }[self.type]
        missing = sorted(k for k in needed if getattr(self, k) is None)
        extra = sorted(k for k in ("rho", "goal", "opinion")
                       if k not in needed and getattr(self, k) is not None)
        if missing:
            raise PydanticCustomError(
                "schema_violation", "{kind} controller needs {keys}",
                {"kind": self.type.value, "keys": ", ".join(missing)},
            )
        if extra:
            raise PydanticCustomError(
                "schema_violation", "{kind} controller does not take {keys}",
                {"kind": self.type.value, "keys": ", ".join(extra)},
            )
        return self

    def to_specs(self) -> Tuple[ControllerSpec, ...]:
        if self.type is Archetype.stubborn:
            spec = ControllerSpec.stubborn(self.opinion)
        elif self.type is Archetype.popular:
            spec = ControllerSpec.popular(self.rho)
        else:
            spec = ControllerSpec.strategic(self.goal, self.rho)
        return (spec,) * self.count


class StabilityConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tol: float = Field(default=1e-4, gt=0, allow_inf_nan=False)
    window: int = Field(default=20, ge=1)
    stop: bool = False  # stop the run once stable

    def criterion(self) -> StabilityCriterion:
        return StabilityCriterion(tol=self.tol, window=self.window)


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dir: str = "runs"
    formats: List[OutputFormat] = Field(default_factory=lambda: ["csv", "dot", "json"])


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_standard: int = Field(ge=1)
    m: int = Field(ge=1)
    theta: int = Field(ge=1)
    eps_edge: float = Field(default=DEFAULT_EPS_EDGE, ge=0.0, lt=1.0)
    eps_norm: float = Field(default=DEFAULT_EPS_NORM, gt=0.0, le=MAX_EPS_NORM)
    steps: int = Field(ge=1)
    seed: int = Field(ge=0, le=U64_MAX)
    controllers: List[ControllerEntry]
    stability: Optional[StabilityConfig] = None
    output: OutputConfig = Field(default_factory=OutputConfig)

    def dimension_violations(self) -> List[Tuple[str, str]]:
        """(path, message) for every controller vector whose length is not m."""
        out = []
        for idx, entry in enumerate(self.controllers):
            for key in ("goal", "opinion"):
                vec = getattr(entry, key)
                if vec is not None and len(vec) != self.m:
                    out.append((f"controllers.{idx}.{key}",
                                f"has {len(vec)} entries, expected m={self.m}"))
        return out

    @model_validator(mode="after")
    def _vector_lengths(self) -> "RunConfig":
        violations = self.dimension_violations()
        if violations:
            raise PydanticCustomError(
                "schema_violation", "{detail}",
                {"detail": "; ".join(f"{p}: {msg}" for p, msg in violations),
                 "violations": tuple(violations)},
            )
        return self

    @property
    def edge_params(self) -> EdgeParams:
        return EdgeParams(theta=self.theta, eps_edge=self.eps_edge)

    @property
    def criterion(self) -> Optional[StabilityCriterion]:
        return self.stability.criterion() if self.stability is not None else None

    @property
    def goal(self) -> Optional[Tuple[float, ...]]:
        """Target used for distance-to-goal: first strategic goal, else first stubborn opinion."""
        for kind, key in ((Archetype.strategic, "goal"), (Archetype.stubborn, "opinion")):
            for entry in self.controllers:
                if entry.type is kind:
                    return tuple(getattr(entry, key))
        return None


def _dotted(loc: Sequence[Union[str, int]]) -> str:
    return ".".join(str(p) for p in loc) if loc else "<root>"


def _classify(exc: ValidationError) -> Union[ConfigSchemaError, ConfigRangeError]:
    """Split pydantic errors into (path, message) violations; any schema error wins."""
    schema, ranges = [], []
    for err in exc.errors():
        ctx = err.get("ctx") or {}
        if ctx.get("violations"):
            pairs = [(p, msg) for p, msg in ctx["violations"]]
        else:
            pairs = [(_dotted(err["loc"]), err["msg"])]
        (ranges if err["type"] in RANGE_ERROR_TYPES else schema).extend(pairs)
    if schema:
        return ConfigSchemaError(schema + ranges)
    return ConfigRangeError(ranges)


def parse_config(text: Union[str, bytes]) -> RunConfig:
    """
    Parse and validate a JSON run configuration.

    Args:
        text: UTF-8 JSON document

    Returns:
        Validated RunConfig with documented defaults filled in

    Raises:
        ConfigSyntaxError: text is not valid JSON
        ConfigSchemaError: structural problem (missing/unknown key, wrong type, wrong length)
        ConfigRangeError: value outside its bounds
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ConfigSyntaxError([("<root>", f"not UTF-8: {e}")])
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigSyntaxError([("<root>", f"line {e.lineno} column {e.colno}: {e.msg}")])

    try:
        cfg = RunConfig.model_validate(doc)
    except ValidationError as e:
        err = _classify(e)
        logger.debug(f"[CONFIG] rejected: {err}")
        raise err from None

    logger.debug(f"[CONFIG] accepted n_standard={cfg.n_standard} m={cfg.m} "
                 f"controllers={sum(c.count for c in cfg.controllers)}")
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Canonical JSON form; parse_config(serialize_config(c)) == c."""
    return cfg.model_dump_json(exclude_none=True, indent=2) + "\n"


def expand_controllers(cfg: RunConfig) -> Tuple[ControllerSpec, ...]:
    """One ControllerSpec per controller agent, in config order."""
    specs: Tuple[ControllerSpec, ...] = ()
    for entry in cfg.controllers:
        specs += entry.to_specs()
    return specs


def to_task(cfg: RunConfig, seed: Optional[int] = None, steps: Optional[int] = None) -> RunTask:
    """Single-run task, with optional --seed / --steps overrides."""
    return RunTask(
        variation="config",
        seed=cfg.seed if seed is None else seed,
        n_standard=cfg.n_standard,
        m=cfg.m,
        controllers=expand_controllers(cfg),
        params=cfg.edge_params,
        eps_norm=cfg.eps_norm,
        steps=cfg.steps if steps is None else steps,
        criterion=cfg.criterion,
        stop_on_stable=cfg.stability.stop if cfg.stability is not None else False,
    )


def to_experiment(cfg: RunConfig, seeds: Sequence[int], name: str = "sweep") -> ExperimentConfig:
    """
    Seed ensemble over one configuration.

    Controllers take part in the initial edge draw (no shared base), so the row for
    seed s matches `run` with --seed s.
    """
    return ExperimentConfig(
        name=name,
        base=BaseNetwork(
            n_standard=cfg.n_standard,
            m=cfg.m,
            theta=cfg.theta,
            eps_edge=cfg.eps_edge,
            eps_norm=cfg.eps_norm,
        ),
        variations=(Variation(name="config", controllers=expand_controllers(cfg)),),
        seeds=tuple(seeds),
        horizon=cfg.steps,
        goal=cfg.goal,
        criterion=cfg.criterion,
        stop_on_stable=cfg.stability.stop if cfg.stability is not None else False,
        shared_base=False,
    )
