from dataclasses import replace

import numpy as np
import pytest

from pfcontrol.config import GridSpec, ModelParams
from pfcontrol.errors import InvalidSpecError
from pfcontrol.solvers.grid import make_grid
from pfcontrol.solvers.model import PhysicalityReport
from pfcontrol.solvers.objective import (
    boundary_quadrature,
    boundary_weights,
    cell_weights,
    cost,
    gradient,
    reduced_cost,
)
from pfcontrol.solvers.optimize import evaluate

TABLE_1 = ModelParams.solidification_1d()


def unit_grid(nx=11, nt=5, t_final=1.0):
    return make_grid(GridSpec(nx1=nx, nt=nt, t_final=t_final))


def test_cost_of_reached_target_is_zero():
    grid = unit_grid()
    target = np.linspace(0.0, 1.0, 11)
    report = cost(target, target, grid.control(), TABLE_1, grid)
    assert report.J == 0.0
    assert report.error_norm == 0.0


def test_mismatch_uses_cell_volumes():
    grid = unit_grid(nx=21)
    report = cost(np.ones(21), np.zeros(21), grid.control(), TABLE_1, grid)
    assert report.mismatch == pytest.approx(0.5)
    assert report.regularization == 0.0
    assert report.J == report.mismatch


def test_error_norm_is_unweighted():
    grid = unit_grid(nx=5)
    report = cost(np.ones(5), np.zeros(5), grid.control(), TABLE_1, grid)
    assert report.error_norm == pytest.approx(np.sqrt(5.0))


def test_regularization_term():
    grid = unit_grid(nt=11)
    params = TABLE_1.model_copy(update={"alpha": 2.0})
    report = cost(np.zeros(11), np.zeros(11), grid.control(1.0), params, grid)
    # two boundary points, eleven levels of width dt = 0.1
    assert report.regularization == pytest.approx(0.5 * 2.0 * 2 * 11 * 0.1)


def test_cost_reports_physicality():
    grid = unit_grid()
    physicality = PhysicalityReport(
        max_excess=0.2, level=3, point=(4,), realistic=False
    )
    report = cost(
        np.zeros(11),
        np.zeros(11),
        grid.control(),
        TABLE_1,
        grid,
        physicality=physicality,
    )
    assert report.realistic is False
    assert report.max_excess == 0.2


def test_cost_rejects_shape_mismatch():
    grid = unit_grid()
    with pytest.raises(InvalidSpecError) as info:
        cost(np.zeros(11), np.zeros(12), grid.control(), TABLE_1, grid)
    assert info.value.field == "target"


def test_mismatch_is_invariant_under_axis_relabelling():
    grid = make_grid(
        GridSpec(dim=2, lx1=1.0, lx2=1.0, nx1=9, nx2=9, nt=2, t_final=1.0)
    )
    rng = np.random.default_rng(5)
    final, target = rng.random(grid.shape), rng.random(grid.shape)
    report = cost(final, target, grid.control(), TABLE_1, grid)
    swapped = cost(final.T, target.T, grid.control(), TABLE_1, grid)
    assert swapped.mismatch == pytest.approx(report.mismatch, rel=1e-12)
    assert swapped.error_norm == pytest.approx(report.error_norm, rel=1e-12)


def test_cell_weights_sum_to_domain_area():
    grid = make_grid(
        GridSpec(dim=2, lx1=0.6, lx2=1.0, nx1=7, nx2=9, nt=2, t_final=1.0)
    )
    weights = cell_weights(grid)
    assert weights.sum() == pytest.approx(0.6)
    assert weights[0, 0] == pytest.approx(0.25 * grid.dx[0] * grid.dx[1])
    assert weights[3, 4] == pytest.approx(grid.dx[0] * grid.dx[1])


def test_boundary_quadrature_of_ones():
    grid = unit_grid(nt=101, t_final=1.0)
    ones = grid.control(1.0)
    expected = float(np.sum(boundary_weights(grid)))
    assert boundary_quadrature(ones, ones, grid) == pytest.approx(expected)
    assert expected == pytest.approx(2 * 101 * 0.01)


def test_boundary_quadrature_of_zero():
    grid = unit_grid()
    assert boundary_quadrature(grid.control(), grid.control(1.0), grid) == 0


def test_boundary_quadrature_is_bilinear():
    grid = unit_grid(nt=7)
    rng = np.random.default_rng(1)
    f, g, s = (rng.standard_normal(grid.control_shape) for _ in range(3))
    left = boundary_quadrature(2.0 * f + g, s, grid)
    right = 2.0 * boundary_quadrature(f, s, grid) + boundary_quadrature(
        g, s, grid
    )
    assert left == pytest.approx(right)


def test_boundary_weights_2d_use_edge_spacing():
    grid = make_grid(
        GridSpec(dim=2, lx1=0.5, lx2=1.0, nx1=6, nx2=5, nt=3, t_final=1.0)
    )
    weights = boundary_weights(grid)
    bottom = weights[:, grid.boundary.edge_slice("bottom")]
    left = weights[:, grid.boundary.edge_slice("left")]
    np.testing.assert_allclose(bottom, grid.dt * grid.dx[0])
    np.testing.assert_allclose(left, grid.dt * grid.dx[1])


def test_gradient_without_flux_or_regularization_is_zero():
    grid = unit_grid()
    g = gradient(grid.control(), grid.control(3.0), TABLE_1, grid)
    assert not g.any()


def test_gradient_of_regularization():
    grid = unit_grid(nt=11)
    params = TABLE_1.model_copy(update={"alpha": 2.0})
    g = gradient(grid.control(), grid.control(1.0), params, grid)
    np.testing.assert_allclose(g, 2.0 * grid.dt)


def test_reduced_cost_matches_forward_end_state(coarse_exp1):
    report, forward = reduced_cost(
        coarse_exp1, coarse_exp1.u0, coarse_exp1.params, coarse_exp1.grid
    )
    direct = cost(
        forward.final.ytilde,
        coarse_exp1.target,
        coarse_exp1.u0,
        coarse_exp1.params,
        coarse_exp1.grid,
    )
    assert report.J == direct.J
    assert report.realistic == forward.physicality.realistic


def test_small_step_along_negative_gradient_decreases_cost(coarse_exp1):
    grid, params = coarse_exp1.grid, coarse_exp1.params
    start = evaluate(coarse_exp1, coarse_exp1.u0, params, grid)
    g = start.gradient
    step = 0.1 / start.grad_norm
    for _ in range(20):
        report, _ = reduced_cost(
            coarse_exp1, coarse_exp1.u0 - step * g, params, grid
        )
        if report.J < start.report.J:
            break
        step *= 0.5
    else:
        pytest.fail("no step along the negative gradient decreased J")


def test_gradient_asks_for_melting_when_target_is_liquid(coarse_exp1):
    liquid = replace(coarse_exp1, target=coarse_exp1.grid.zeros())
    start = evaluate(liquid, liquid.u0, liquid.params, liquid.grid)
    left = liquid.grid.boundary.edge_slice("left")
    # descent raises the boundary temperature
    assert start.gradient[:-1, left].sum() < 0.0
