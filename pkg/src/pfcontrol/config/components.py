from enum import Enum, unique
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator


@unique
class ReactionKind(Enum):
    LINEAR = "linear"
    LIMITER = "limiter"


@unique
class StepUnit(Enum):
    """How the step sizes of a schedule are read.

    ``absolute`` steps multiply the gradient as given. ``first_change``
    steps are the largest boundary temperature change of the first
    update; they are converted once, at iteration 0, by dividing by the
    largest gradient entry.
    """

    ABSOLUTE = "absolute"
    FIRST_CHANGE = "first_change"


class GridSpec(BaseModel):
    """Uniform space-time mesh of (0, lx1) [x (0, lx2)] x [0, t_final].

    Counts are numbers of mesh points including the boundary, so the
    spacings are ``lx / (nx - 1)`` and ``t_final / (nt - 1)``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dim: int = Field(default=1, ge=1, le=2)
    lx1: float = Field(default=1.0, gt=0)
    lx2: float | None = Field(default=None, gt=0)
    nx1: int = Field(default=400, ge=3)
    nx2: int | None = Field(default=None, ge=3)
    nt: int = Field(default=400_000, ge=2)
    t_final: float = Field(default=0.1, gt=0)

    @model_validator(mode="after")
    def _axes_match_dim(self) -> "GridSpec":
        if self.dim == 2 and (self.lx2 is None or self.nx2 is None):
            raise ValueError("lx2 and nx2 are required when dim=2")
        if self.dim == 1 and (self.lx2 is not None or self.nx2 is not None):
            raise ValueError("lx2 and nx2 must be unset when dim=1")
        return self

    @property
    def lengths(self) -> tuple[float, ...]:
        if self.dim == 1:
            return (self.lx1,)
        return (self.lx1, self.lx2)  # type: ignore[return-value]

    @property
    def counts(self) -> tuple[int, ...]:
        if self.dim == 1:
            return (self.nx1,)
        return (self.nx1, self.nx2)  # type: ignore[return-value]


class ModelParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    gamma: float = Field(default=1.0, gt=0)
    beta: float = 2.0
    xi: float = Field(default=0.005, gt=0)
    y_mt: float = 0.5
    latent_heat: float = Field(default=1.0, ge=0)
    alpha: float = Field(default=0.0, ge=0)
    reaction: ReactionKind = ReactionKind.LINEAR
    eps0: float = 0.0
    eps1: float = 0.2

    @model_validator(mode="after")
    def _limiter_thresholds(self) -> "ModelParams":
        if self.reaction is ReactionKind.LIMITER and not (
            0.0 <= self.eps0 < self.eps1 <= 1.0
        ):
            raise ValueError("limiter needs 0 <= eps0 < eps1 <= 1")
        return self

    @property
    def beta_xi(self) -> float:
        return self.beta * self.xi

    @classmethod
    def solidification_1d(cls, **overrides: Any) -> "ModelParams":
        return cls(
            **{
                "gamma": 1.0,
                "beta": 2.0,
                "xi": 0.005,
                "y_mt": 0.5,
                "latent_heat": 1.0,
                **overrides,
            }
        )

    @classmethod
    def solidification_2d(cls, **overrides: Any) -> "ModelParams":
        return cls(
            **{
                "gamma": 3.0,
                "beta": 300.0,
                "xi": 0.0101,
                "y_mt": 1.0,
                "latent_heat": 2.0,
                "eps0": 0.0,
                "eps1": 0.2,
                **overrides,
            }
        )


class StepStage(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    iterations: int = Field(ge=0)
    step: float = Field(gt=0)


def _parse_schedule(raw: Any) -> list[Any]:
    # "225:1e16,25:5e15" -> [{"iterations": 225, "step": 1e16}, ...]
    if not isinstance(raw, str):
        return list(raw)
    stages = []
    for chunk in raw.split(","):
        iterations, _, step = chunk.strip().partition(":")
        if not step:
            raise ValueError(f"schedule entry {chunk!r} is not 'iters:step'")
        stages.append({"iterations": iterations, "step": step})
    return stages


def _stage_value(stage: Any, name: str) -> Any:
    if isinstance(stage, StepStage):
        return getattr(stage, name)
    return stage[name]


class OptimizeConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    schedule: tuple[StepStage, ...] = Field(
        default=(StepStage(iterations=100, step=1.0),), min_length=1
    )
    max_iterations: int | None = Field(default=None, ge=0)
    grad_tol: float | None = Field(default=None, gt=0)
    record_every: int = Field(default=1, ge=1)
    step_unit: StepUnit = StepUnit.ABSOLUTE

    @model_validator(mode="before")
    @classmethod
    def _shorthands(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        if "schedule" in data:
            data["schedule"] = _parse_schedule(data["schedule"])
        iterations = data.pop("iterations", None)
        step = data.pop("step", None)
        if iterations is None and step is None:
            return data

        stages = data.get("schedule") or [StepStage(iterations=100, step=1)]
        if iterations is None:
            iterations = sum(
                int(_stage_value(stage, "iterations")) for stage in stages
            )
        if step is None:
            step = _stage_value(stages[0], "step")
        data["schedule"] = [{"iterations": iterations, "step": step}]
        return data

    @property
    def total_iterations(self) -> int:
        total = sum(stage.iterations for stage in self.schedule)
        if self.max_iterations is not None:
            return min(total, self.max_iterations)
        return total

    def step_at(self, iteration: int) -> float:
        passed = 0
        for stage in self.schedule:
            passed += stage.iterations
            if iteration < passed:
                return stage.step
        return self.schedule[-1].step
