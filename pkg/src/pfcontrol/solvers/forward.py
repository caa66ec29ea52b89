from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import structlog

from pfcontrol.config import ModelParams
from pfcontrol.errors import BlowUpError, InvalidSpecError
from .grid import (
    FrameStore,
    Frames,
    Grid,
    Trajectory,
    check_control,
    check_field,
    checkpoint_stride,
    interior_laplacian,
    stability_bound,
)
from .model import (
    PhysicalityMonitor,
    PhysicalityReport,
    ReactionTerm,
    reaction_term,
)

if TYPE_CHECKING:
    from pfcontrol.scenarios.presets import ScenarioSpec

logger = structlog.get_logger(__name__)

DEFAULT_MEMORY_BUDGET = 2048 * 1024 * 1024


@dataclass(frozen=True)
class State:
    y: np.ndarray
    ytilde: np.ndarray
    level: int = 0


@dataclass(frozen=True)
class ForwardResult:
    y_traj: Trajectory
    ytilde_traj: Trajectory
    final: State
    physicality: PhysicalityReport


def apply_dirichlet(
    values: np.ndarray, boundary_values, grid: Grid
) -> np.ndarray:
    prescribed = np.asarray(boundary_values, dtype=float)
    if prescribed.shape != (grid.nboundary,):
        raise InvalidSpecError(
            "boundary_values",
            f"expected {grid.nboundary} values, got shape {prescribed.shape}",
        )
    result = np.array(values, dtype=float)
    result[grid.boundary.points] = prescribed
    grid.fill_corners(result)
    return result


def step(
    state: State,
    u_k,
    ybc,
    params: ModelParams,
    grid: Grid,
    *,
    u_next=None,
    reaction: ReactionTerm | None = None,
) -> State:
    """Advance (y, ỹ) by one explicit Euler step.

    ``u_next`` is imposed on the new temperature and defaults to ``u_k``.
    """
    reaction = reaction or reaction_term(params)
    inner = grid.interior
    y = apply_dirichlet(state.y, u_k, grid)
    ytilde = apply_dirichlet(state.ytilde, ybc, grid)

    scale = grid.dt / (params.gamma * params.xi**2)
    ytilde_new = ytilde.copy()
    ytilde_new[inner] = ytilde[inner] + scale * (
        params.xi**2 * interior_laplacian(ytilde, grid.dx)
        + reaction.value(y[inner], ytilde[inner])
    )

    y_new = y.copy()
    y_new[inner] = (
        y[inner]
        + grid.dt * interior_laplacian(y, grid.dx)
        + params.latent_heat * (ytilde_new[inner] - ytilde[inner])
    )

    level = state.level + 1
    y_new = apply_dirichlet(y_new, u_k if u_next is None else u_next, grid)
    ytilde_new = apply_dirichlet(ytilde_new, ybc, grid)
    if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(ytilde_new))):
        raise BlowUpError("forward", level)
    return State(y=y_new, ytilde=ytilde_new, level=level)


def warn_if_unstable(grid: Grid, params: ModelParams) -> None:
    bound = stability_bound(grid, params)
    if grid.dt > bound:
        logger.warning("unstable_time_step", dt=grid.dt, bound=bound)


def solve_forward(
    scenario: ScenarioSpec,
    u,
    params: ModelParams,
    grid: Grid,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> ForwardResult:
    u = check_control(u, grid)
    y_ini = check_field(scenario.y_ini, grid, "y_ini")
    ytilde_ini = check_field(scenario.ytilde_ini, grid, "ytilde_ini")
    ybc = np.asarray(scenario.ytilde_bc, dtype=float)
    warn_if_unstable(grid, params)

    reaction = reaction_term(params)

    def advance(level: int, frames: Frames) -> Frames:
        new = step(
            State(y=frames[0], ytilde=frames[1], level=level),
            u[level],
            ybc,
            params,
            grid,
            u_next=u[level + 1],
            reaction=reaction,
        )
        return (new.y, new.ytilde)

    stride = 1
    estimate = 2 * grid.nt * grid.npoints * 8
    if estimate > memory_budget:
        stride = checkpoint_stride(grid.nt)
        logger.info(
            "checkpointing_enabled",
            estimate_bytes=estimate,
            budget_bytes=memory_budget,
            stride=stride,
        )
    store = FrameStore(grid.nt, grid.shape, 2, stride=stride, advance=advance)
    monitor = PhysicalityMonitor(params)

    frames: Frames = (
        apply_dirichlet(y_ini, u[0], grid),
        apply_dirichlet(ytilde_ini, ybc, grid),
    )
    logger.debug("forward_solve_started", nt=grid.nt, shape=grid.shape)
    for level in range(grid.nt):
        if level > 0:
            frames = advance(level - 1, frames)
        store.record(level, frames)
        monitor.update(level, frames[0])

    return ForwardResult(
        y_traj=Trajectory(store, 0),
        ytilde_traj=Trajectory(store, 1),
        final=State(y=frames[0], ytilde=frames[1], level=grid.nt - 1),
        physicality=monitor.report(),
    )
