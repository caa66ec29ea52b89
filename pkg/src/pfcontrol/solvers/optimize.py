from __future__ import annotations

import time
from collections.abc import Callable, Iterator, Sequence
from dataclasses import astuple, dataclass, field
from typing import TYPE_CHECKING

import numpy as np
import structlog

from pfcontrol.config import ModelParams, OptimizeConfig, StepUnit
from pfcontrol.errors import BlowUpError, DescentError, InvalidSpecError
from .adjoint import solve_adjoint
from .forward import DEFAULT_MEMORY_BUDGET, ForwardResult
from .grid import Grid, check_control
from .objective import CostReport, gradient, reduced_cost

if TYPE_CHECKING:
    from pfcontrol.scenarios.presets import ScenarioSpec

logger = structlog.get_logger(__name__)

HISTORY_COLUMNS = (
    "iter",
    "J",
    "mismatch",
    "reg",
    "error_norm",
    "grad_norm",
    "phys_excess",
    "wall_ms",
)


@dataclass(frozen=True)
class HistoryRow:
    iteration: int
    J: float
    mismatch: float
    reg: float
    error_norm: float
    grad_norm: float
    phys_excess: float
    wall_ms: float

    def as_tuple(self) -> tuple:
        return astuple(self)


@dataclass
class DescentHistory:
    rows: list[HistoryRow] = field(default_factory=list)

    def append(self, row: HistoryRow) -> None:
        if self.rows and row.iteration <= self.rows[-1].iteration:
            raise ValueError("history iterations must increase")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[HistoryRow]:
        return iter(self.rows)

    @property
    def first(self) -> HistoryRow:
        return self.rows[0]

    @property
    def last(self) -> HistoryRow:
        return self.rows[-1]


@dataclass(frozen=True)
class Evaluation:
    control: np.ndarray
    report: CostReport
    forward: ForwardResult
    gradient: np.ndarray

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.gradient.ravel()))


@dataclass(frozen=True)
class DescentResult:
    u_opt: np.ndarray
    history: DescentHistory
    final: Evaluation
    iterations: int
    step_scale: float = 1.0


def evaluate(
    scenario: ScenarioSpec,
    u,
    params: ModelParams,
    grid: Grid,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> Evaluation:
    """Reduced cost and its adjoint gradient at ``u``."""
    u = check_control(u, grid)
    report, forward = reduced_cost(
        scenario, u, params, grid, memory_budget=memory_budget
    )
    adjoint = solve_adjoint(
        forward.ytilde_traj, forward.y_traj, scenario.target, params, grid
    )
    return Evaluation(
        control=u,
        report=report,
        forward=forward,
        gradient=gradient(adjoint.flux, u, params, grid),
    )


def step_scale(config: OptimizeConfig, first_gradient: np.ndarray) -> float:
    """Factor that turns the schedule steps into absolute steps."""
    if config.step_unit is StepUnit.ABSOLUTE:
        return 1.0
    peak = float(np.max(np.abs(first_gradient)))
    # a vanishing gradient leaves the control where it is
    return 1.0 / peak if peak > 0.0 else 0.0


def _row(iteration: int, evaluation: Evaluation, wall_ms: float) -> HistoryRow:
    report = evaluation.report
    return HistoryRow(
        iteration=iteration,
        J=report.J,
        mismatch=report.mismatch,
        reg=report.regularization,
        error_norm=report.error_norm,
        grad_norm=evaluation.grad_norm,
        phys_excess=evaluation.forward.physicality.max_excess,
        wall_ms=wall_ms,
    )


def descend(
    scenario: ScenarioSpec,
    params: ModelParams,
    grid: Grid,
    config: OptimizeConfig,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    on_iteration: Callable[[HistoryRow], None] | None = None,
) -> DescentResult:
    """Fixed-step gradient descent on the boundary control.

    Iteration ``n`` evaluates the control after ``n`` updates, so the
    last history row describes the returned control.
    """
    u = check_control(scenario.u0, grid).copy()
    history = DescentHistory()
    total = config.total_iterations
    started = time.perf_counter()
    evaluation: Evaluation | None = None
    iteration = 0
    scale = 1.0

    for iteration in range(total + 1):
        try:
            evaluation = evaluate(
                scenario, u, params, grid, memory_budget=memory_budget
            )
        except BlowUpError as exc:
            logger.error(
                "descent_blow_up", iteration=iteration, level=exc.level
            )
            raise DescentError(exc, history) from exc

        if iteration == 0:
            scale = step_scale(config, evaluation.gradient)
            logger.info(
                "step_calibrated", unit=config.step_unit.value, scale=scale
            )
        wall_ms = 1000.0 * (time.perf_counter() - started)
        converged = (
            config.grad_tol is not None
            and evaluation.grad_norm <= config.grad_tol
        )
        done = iteration == total or converged
        if done or iteration % config.record_every == 0:
            row = _row(iteration, evaluation, wall_ms)
            history.append(row)
            if on_iteration is not None:
                on_iteration(row)
        logger.info(
            "descent_iteration",
            iteration=iteration,
            J=evaluation.report.J,
            error_norm=evaluation.report.error_norm,
            grad_norm=evaluation.grad_norm,
        )
        if done:
            break
        u = u - scale * config.step_at(iteration) * evaluation.gradient

    assert evaluation is not None
    return DescentResult(
        u_opt=u,
        history=history,
        final=evaluation,
        iterations=iteration,
        step_scale=scale,
    )


def random_directions(grid: Grid, count: int, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    directions = []
    for _ in range(count):
        s = rng.standard_normal(grid.control_shape)
        directions.append(s / np.linalg.norm(s.ravel()))
    return directions


@dataclass(frozen=True)
class DirectionCheck:
    index: int
    adjoint: float
    finite_difference: float
    rel_error: float
    truncation_dominated: bool


@dataclass(frozen=True)
class GradCheckReport:
    checks: tuple[DirectionCheck, ...]
    h: float
    threshold: float

    @property
    def passed(self) -> bool:
        return all(check.rel_error <= self.threshold for check in self.checks)

    @property
    def worst(self) -> float:
        return max(check.rel_error for check in self.checks)


def _relative(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    if scale == 0.0:
        return 0.0
    return abs(a - b) / scale


def fd_gradient_check(
    scenario: ScenarioSpec,
    params: ModelParams,
    grid: Grid,
    u,
    directions: Sequence[np.ndarray],
    h: float,
    *,
    threshold: float = 1e-3,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> GradCheckReport:
    if h <= 0:
        raise InvalidSpecError("h", "must be positive")
    u = check_control(u, grid)
    checked = [check_control(s, grid, "direction") for s in directions]
    for s in checked:
        if not np.any(s):
            raise InvalidSpecError("direction", "zero direction")

    g = evaluate(scenario, u, params, grid, memory_budget=memory_budget)

    def central(s: np.ndarray, width: float) -> float:
        plus, _ = reduced_cost(
            scenario, u + width * s, params, grid, memory_budget=memory_budget
        )
        minus, _ = reduced_cost(
            scenario, u - width * s, params, grid, memory_budget=memory_budget
        )
        return (plus.J - minus.J) / (2.0 * width)

    results = []
    for index, s in enumerate(checked):
        adjoint = float(np.sum(g.gradient * s))
        fd = central(s, h)
        fd_half = central(s, 0.5 * h)
        check = DirectionCheck(
            index=index,
            adjoint=adjoint,
            finite_difference=fd,
            rel_error=_relative(adjoint, fd),
            truncation_dominated=_relative(fd, fd_half) > threshold,
        )
        if check.truncation_dominated:
            logger.warning(
                "truncation_dominated", direction=index, fd=fd, fd_half=fd_half
            )
        logger.info(
            "gradcheck_direction",
            direction=index,
            adjoint=adjoint,
            fd=fd,
            rel_error=check.rel_error,
        )
        results.append(check)
    return GradCheckReport(checks=tuple(results), h=h, threshold=threshold)
