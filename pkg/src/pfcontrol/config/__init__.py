from .components import (
    GridSpec,
    ModelParams,
    OptimizeConfig,
    ReactionKind,
    StepStage,
    StepUnit,
)
from .runs import (
    GradCheckConfig,
    OutputConfig,
    RunConfig,
    SolverConfig,
    apply_overrides,
    load_run_config,
)


__all__ = [
    "GridSpec",
    "ModelParams",
    "OptimizeConfig",
    "ReactionKind",
    "StepStage",
    "StepUnit",
    "GradCheckConfig",
    "OutputConfig",
    "RunConfig",
    "SolverConfig",
    "apply_overrides",
    "load_run_config",
]
