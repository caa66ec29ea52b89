import numpy as np
import pytest

from pfcontrol.config import GridSpec, ModelParams, ReactionKind
from pfcontrol.errors import InvalidSpecError
from pfcontrol.solvers.adjoint import (
    AdjointState,
    adjoint_step,
    flux_from_p,
    solve_adjoint,
)
from pfcontrol.solvers.forward import solve_forward
from pfcontrol.solvers.grid import make_grid

TABLE_1 = ModelParams.solidification_1d()


def test_homogeneous_adjoint_stays_zero():
    grid = make_grid(GridSpec(nx1=9, nt=5, t_final=0.001))
    state = AdjointState(p=grid.zeros(), q=grid.zeros())
    for _ in range(4):
        state = adjoint_step(state, grid.zeros(), None, TABLE_1, grid)
    assert not state.p.any()
    assert not state.q.any()
    assert state.level == 4


def test_adjoint_step_couples_q_into_p():
    grid = make_grid(GridSpec(nx1=3, nt=2, t_final=1e-6))
    q = np.array([0.0, 1.0, 0.0])
    state = adjoint_step(
        AdjointState(p=grid.zeros(), q=q), grid.zeros(), None, TABLE_1, grid
    )
    assert state.p[1] == pytest.approx(-grid.dt * TABLE_1.beta_xi)
    assert state.p[[0, 2]].tolist() == [0.0, 0.0]


def test_limiter_adjoint_step_needs_temperature():
    params = ModelParams.solidification_2d(reaction=ReactionKind.LIMITER)
    grid = make_grid(GridSpec(nx1=5, nt=2, t_final=1e-6))
    state = AdjointState(p=grid.zeros(), q=grid.zeros())
    with pytest.raises(InvalidSpecError):
        adjoint_step(state, grid.zeros(), None, params, grid)


def test_flux_from_p_single_interior_point():
    grid = make_grid(GridSpec(nx1=3, nt=2, t_final=1.0))
    flux = flux_from_p(np.array([0.0, 0.2, 0.0]), grid)
    np.testing.assert_allclose(flux, [0.4, 0.4])


def test_flux_from_p_of_zero():
    grid = make_grid(GridSpec(dim=2, lx2=1.0, nx1=6, nx2=5, nt=2, t_final=1.0))
    assert not flux_from_p(grid.zeros(), grid).any()


def test_flux_from_p_2d_uses_normal_spacing():
    grid = make_grid(
        GridSpec(dim=2, lx1=0.5, lx2=1.0, nx1=6, nx2=5, nt=2, t_final=1.0)
    )
    p = grid.zeros()
    p[1:-1, 1:-1] = 1.0
    flux = flux_from_p(p, grid)
    bottom = flux[grid.boundary.edge_slice("bottom")]
    left = flux[grid.boundary.edge_slice("left")]
    np.testing.assert_allclose(bottom, 1.0 / grid.dx[1])
    np.testing.assert_allclose(left, 1.0 / grid.dx[0])


def _forward(scenario):
    return solve_forward(scenario, scenario.u0, scenario.params, scenario.grid)


def test_self_target_gives_zero_flux(coarse_exp1):
    forward = _forward(coarse_exp1)
    result = solve_adjoint(
        forward.ytilde_traj,
        forward.y_traj,
        forward.final.ytilde,
        TABLE_1,
        coarse_exp1.grid,
    )
    assert not result.flux.any()


def test_last_level_carries_no_flux(coarse_exp1):
    forward = _forward(coarse_exp1)
    result = solve_adjoint(
        forward.ytilde_traj,
        forward.y_traj,
        coarse_exp1.target,
        TABLE_1,
        coarse_exp1.grid,
    )
    assert not result.flux[-1].any()
    assert result.flux[:-1].any()


def test_flux_is_linear_in_terminal_mismatch(coarse_exp1):
    grid = coarse_exp1.grid
    forward = _forward(coarse_exp1)
    final = forward.final.ytilde
    rng = np.random.default_rng(7)
    m1 = 0.1 * rng.standard_normal(grid.shape)
    m2 = 0.1 * rng.standard_normal(grid.shape)

    def flux(mismatch):
        return solve_adjoint(
            forward.ytilde_traj,
            forward.y_traj,
            final + mismatch,
            TABLE_1,
            grid,
        ).flux

    combined = flux(2.0 * m1 - 3.0 * m2)
    separate = 2.0 * flux(m1) - 3.0 * flux(m2)
    np.testing.assert_allclose(
        combined, separate, rtol=1e-7, atol=1e-9 * np.abs(separate).max()
    )


def test_diagnostics_keep_adjoint_zero_on_boundary(coarse_exp1):
    grid = coarse_exp1.grid
    forward = _forward(coarse_exp1)
    result = solve_adjoint(
        forward.ytilde_traj,
        forward.y_traj,
        coarse_exp1.target,
        TABLE_1,
        grid,
        diagnostics=True,
    )
    extra = result.diagnostics
    assert extra is not None
    assert extra.p_history.shape == (grid.nt, *grid.shape)
    assert not extra.p_history[:, [0, -1]].any()
    assert not extra.q_history[:, [0, -1]].any()
    assert np.array_equal(extra.p2, result.final.p)
    np.testing.assert_allclose(
        extra.q2,
        TABLE_1.gamma * TABLE_1.xi**2 * result.final.q
        - TABLE_1.latent_heat * result.final.p,
    )


def test_solve_adjoint_rejects_short_trajectory(coarse_exp1):
    forward = _forward(coarse_exp1)
    frames = forward.ytilde_traj[:10]
    with pytest.raises(InvalidSpecError):
        solve_adjoint(
            frames, frames, coarse_exp1.target, TABLE_1, coarse_exp1.grid
        )
