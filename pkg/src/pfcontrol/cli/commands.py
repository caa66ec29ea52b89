from pathlib import Path
from typing import Any

import structlog

from pfcontrol.config import RunConfig
from pfcontrol.errors import ConfigError, DescentError
from pfcontrol.scenarios import ScenarioSpec, builtin, extract_interface
from pfcontrol.scenarios.presets import available, preset
from pfcontrol.solvers.optimize import (
    DescentResult,
    descend,
    fd_gradient_check,
    random_directions,
)
from . import export

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOW_UP = 3
EXIT_GRADCHECK = 4


def load_scenario(config: RunConfig) -> ScenarioSpec:
    return builtin(
        config.scenario,
        grid=config.grid,
        params=config.model,
        optimize=config.opt,
    )


def output_directory(config: RunConfig, scenario: ScenarioSpec) -> Path:
    return config.output.directory or Path("runs") / scenario.name


def snapshot_levels(config: RunConfig, scenario: ScenarioSpec) -> list[int]:
    t_final = scenario.grid.spec.t_final
    levels = []
    for t in config.output.snapshot_times:
        if not 0.0 <= t <= t_final:
            raise ConfigError(
                "output.snapshot_times", f"{t} is outside [0, {t_final}]"
            )
        levels.append(scenario.grid.level_of(t))
    return sorted(set(levels))


def summary(scenario: ScenarioSpec, result: DescentResult) -> dict[str, Any]:
    report = result.final.report
    physicality = result.final.forward.physicality
    return {
        "scenario": scenario.name,
        "J": report.J,
        "mismatch": report.mismatch,
        "regularization": report.regularization,
        "error_norm": report.error_norm,
        "realistic": physicality.realistic,
        "max_physicality_excess": physicality.max_excess,
        "physicality_bound": physicality.bound,
        "iterations": result.iterations,
        "step_scale": result.step_scale,
        "wall_clock_s": result.history.last.wall_ms / 1000.0,
    }


def _write_outputs(
    config: RunConfig,
    scenario: ScenarioSpec,
    result: DescentResult,
    levels: list[int],
    directory: Path,
) -> None:
    grid = scenario.grid
    forward = result.final.forward
    toggles = config.output
    if toggles.history:
        export.write_history_csv(directory / "history.csv", result.history)
    if toggles.control:
        export.write_control_csv(directory / "control.csv", result.u_opt, grid)
    if toggles.final_state:
        export.write_field_csv(
            directory / "final_state.csv",
            forward.final.y,
            forward.final.ytilde,
            grid,
        )
    if toggles.snapshots:
        for level in levels:
            export.write_field_csv(
                directory / f"snapshot_k{level}.csv",
                forward.y_traj[level],
                forward.ytilde_traj[level],
                grid,
            )
    if toggles.interface:
        interfaces = [
            (
                float(grid.times[level]),
                extract_interface(forward.ytilde_traj[level], grid),
            )
            for level in sorted({*levels, grid.nt - 1})
        ]
        export.write_interface_csv(
            directory / "interface.csv", interfaces, grid
        )


def cmd_run(config: RunConfig) -> int:
    scenario = load_scenario(config)
    levels = snapshot_levels(config, scenario)
    directory = output_directory(config, scenario)
    logger.info("run_started", scenario=scenario.name, output=str(directory))
    try:
        result = descend(
            scenario,
            scenario.params,
            scenario.grid,
            scenario.optimize,
            memory_budget=config.solver.memory_budget_bytes,
        )
    except DescentError as exc:
        if config.output.history:
            export.write_history_csv(directory / "history.csv", exc.history)
        logger.error("run_blew_up", scenario=scenario.name, error=str(exc))
        return EXIT_BLOW_UP

    _write_outputs(config, scenario, result, levels, directory)
    payload = summary(scenario, result)
    export.write_json(directory / "summary.json", payload)
    logger.info("run_finished", **payload)
    print(
        f"{scenario.name}: J={payload['J']!r}"
        f" error_norm={payload['error_norm']!r}"
        f" realistic={payload['realistic']}"
    )
    return EXIT_OK


def cmd_gradcheck(config: RunConfig) -> int:
    scenario = load_scenario(config)
    settings = config.gradcheck
    directions = random_directions(
        scenario.grid, settings.directions, settings.seed
    )
    report = fd_gradient_check(
        scenario,
        scenario.params,
        scenario.grid,
        scenario.u0,
        directions,
        settings.h,
        threshold=settings.threshold,
        memory_budget=config.solver.memory_budget_bytes,
    )
    print("direction,adjoint,finite_difference,rel_error,truncation")
    for check in report.checks:
        print(
            f"{check.index},{check.adjoint!r},{check.finite_difference!r},"
            f"{check.rel_error!r},{check.truncation_dominated}"
        )
    verdict = "passed" if report.passed else "failed"
    print(f"gradcheck {verdict}: worst relative error {report.worst!r}")
    return EXIT_OK if report.passed else EXIT_GRADCHECK


def cmd_list() -> int:
    for name in available():
        entry = preset(name)
        grid = entry.grid
        size = "x".join(str(count) for count in grid.counts)
        print(
            f"{name:<15} {grid.dim}D {size:>7} nt={grid.nt:<7}"
            f" {entry.description}"
        )
    return EXIT_OK
