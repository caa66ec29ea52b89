from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from pfcontrol.config import ModelParams
from pfcontrol.errors import InvalidSpecError
from .forward import DEFAULT_MEMORY_BUDGET, ForwardResult, solve_forward
from .grid import Grid, check_control, check_field
from .model import PhysicalityReport

if TYPE_CHECKING:
    from pfcontrol.scenarios.presets import ScenarioSpec


@dataclass(frozen=True)
class CostReport:
    J: float
    mismatch: float
    regularization: float
    error_norm: float
    realistic: bool | None = None
    max_excess: float | None = None


def _axis_weights(count: int, dx: float) -> np.ndarray:
    weights = np.full(count, dx)
    weights[[0, -1]] = 0.5 * dx
    return weights


def cell_weights(grid: Grid) -> np.ndarray:
    """Cell volume of every mesh point; boundary cells are cut in half."""
    weights = _axis_weights(grid.shape[0], grid.dx[0])
    for count, dx in zip(grid.shape[1:], grid.dx[1:]):
        weights = np.multiply.outer(weights, _axis_weights(count, dx))
    return weights


def boundary_weights(grid: Grid) -> np.ndarray:
    """Space-time measure of every (time level, boundary point) cell."""
    return np.broadcast_to(
        grid.dt * grid.boundary.along_dx, grid.control_shape
    )


def boundary_quadrature(f, s, grid: Grid) -> float:
    f = np.asarray(f, dtype=float)
    s = np.asarray(s, dtype=float)
    if f.shape != grid.control_shape or s.shape != grid.control_shape:
        raise InvalidSpecError(
            "boundary", f"expected shape {grid.control_shape}"
        )
    return float(np.sum(boundary_weights(grid) * f * s))


def cost(
    final_ytilde,
    target,
    u,
    params: ModelParams,
    grid: Grid,
    physicality: PhysicalityReport | None = None,
) -> CostReport:
    final_ytilde = check_field(final_ytilde, grid, "final_ytilde")
    target = check_field(target, grid, "target")
    u = check_control(u, grid)

    difference = final_ytilde - target
    mismatch = 0.5 * float(np.sum(cell_weights(grid) * difference**2))
    regularization = 0.5 * params.alpha * boundary_quadrature(u, u, grid)
    return CostReport(
        J=mismatch + regularization,
        mismatch=mismatch,
        regularization=regularization,
        error_norm=float(np.linalg.norm(difference.ravel())),
        realistic=None if physicality is None else physicality.realistic,
        max_excess=None if physicality is None else physicality.max_excess,
    )


def gradient(flux, u, params: ModelParams, grid: Grid) -> np.ndarray:
    flux = check_control(flux, grid, "flux")
    u = check_control(u, grid)
    return (params.alpha * u - flux) * boundary_weights(grid)


def reduced_cost(
    scenario: ScenarioSpec,
    u,
    params: ModelParams,
    grid: Grid,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> tuple[CostReport, ForwardResult]:
    forward = solve_forward(
        scenario, u, params, grid, memory_budget=memory_budget
    )
    report = cost(
        forward.final.ytilde,
        scenario.target,
        u,
        params,
        grid,
        physicality=forward.physicality,
    )
    return report, forward
