import os
from pathlib import Path
from typing import Any, Iterable, TypeVar

from dotenv import dotenv_values
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

from pfcontrol.errors import ConfigError
from . import components as comps

SETTINGS_CONFIG = SettingsConfigDict(
    case_sensitive=False,
    env_prefix="PFCONTROL_",
    env_file=os.environ.get("ENVFILE", ".env"),
    env_file_encoding="utf-8",
    env_nested_delimiter="__",
    extra="ignore",
)

# Keys accepted by the override sections, beyond the model fields.
_SHORTHANDS = {"opt": {"iterations", "step"}}
_OVERRIDE_TARGETS: dict[str, type[BaseModel]] = {
    "model": comps.ModelParams,
    "grid": comps.GridSpec,
    "opt": comps.OptimizeConfig,
}

TModel = TypeVar("TModel", bound=BaseModel)


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item for item in value.replace(" ", "").split(",") if item]
    return value


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    memory_budget_mib: float = Field(default=2048.0, gt=0)

    @property
    def memory_budget_bytes(self) -> int:
        return int(self.memory_budget_mib * 1024 * 1024)


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: Path | None = None
    snapshot_times: tuple[float, ...] = ()
    history: bool = True
    control: bool = True
    final_state: bool = True
    interface: bool = True
    snapshots: bool = True

    @field_validator("snapshot_times", mode="before")
    @classmethod
    def _split_times(cls, value: Any) -> Any:
        return _split_list(value)


class GradCheckConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directions: int = Field(default=5, ge=1)
    h: float = Field(default=1e-4, gt=0)
    threshold: float = Field(default=1e-3, gt=0)
    seed: int = 0


def allowed_keys(section: str) -> set[str]:
    target = _OVERRIDE_TARGETS[section]
    return set(target.model_fields) | _SHORTHANDS.get(section, set())


class RunConfig(BaseSettings):
    scenario: str = "exp1"
    model: dict[str, Any] = Field(default_factory=dict)
    grid: dict[str, Any] = Field(default_factory=dict)
    opt: dict[str, Any] = Field(default_factory=dict)
    solver: SolverConfig = SolverConfig()
    output: OutputConfig = OutputConfig()
    gradcheck: GradCheckConfig = GradCheckConfig()
    log_level: str = "info"

    model_config = SETTINGS_CONFIG

    @field_validator("model", "grid", "opt")
    @classmethod
    def _closed_schema(cls, value: dict[str, Any], info) -> dict[str, Any]:
        unknown = set(value) - allowed_keys(info.field_name)
        if unknown:
            key = sorted(unknown)[0]
            raise ValueError(f"unknown key {info.field_name}.{key}")
        return value


def _nest(flat: dict[str, Any]) -> dict[str, Any]:
    nested: dict[str, Any] = {}
    for raw_key, value in flat.items():
        key = raw_key.strip()
        section, dot, name = key.partition(".")
        if not dot:
            if section not in RunConfig.model_fields:
                raise ConfigError(key, "unknown key")
            nested[section] = value
            continue
        if section not in RunConfig.model_fields or not name:
            raise ConfigError(key, "unknown section")
        if section in _OVERRIDE_TARGETS and name not in allowed_keys(section):
            raise ConfigError(key, "unknown key")
        nested.setdefault(section, {})[name] = value
    return nested


def parse_override(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(text, "override must look like section.key=value")
    return key.strip(), value.strip()


def _first_error_key(exc: ValidationError) -> str:
    error = exc.errors()[0]
    return ".".join(str(part) for part in error["loc"]) or "config"


def load_run_config(
    path: Path | str | None = None,
    overrides: Iterable[str] = (),
    **fields: Any,
) -> RunConfig:
    flat: dict[str, Any] = {}
    if path is not None:
        if not Path(path).is_file():
            raise ConfigError("config", f"no such file: {path}")
        flat.update(dotenv_values(path))
    flat.update(parse_override(text) for text in overrides)
    nested = _nest(flat)
    for name, value in fields.items():
        if value is not None:
            nested[name] = value

    try:
        return RunConfig(**nested)
    except ValidationError as exc:
        raise ConfigError(_first_error_key(exc), str(exc)) from exc


def apply_overrides(
    base: TModel, overrides: dict[str, Any], section: str
) -> TModel:
    """Re-validate ``base`` with the string values of an override map."""
    if not overrides:
        return base
    data = {**base.model_dump(), **overrides}
    try:
        return type(base).model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = ".".join(str(part) for part in error["loc"])
        key = f"{section}.{loc}" if loc else section
        raise ConfigError(key, error["msg"]) from exc
