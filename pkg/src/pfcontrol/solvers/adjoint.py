"""Adjoint sweep in transformed time.

The sweep is the exact transpose of the explicit forward scheme, so the
resulting gradient is the gradient of the discrete reduced cost. Step
m -> m+1 consumes the forward frames at level N_t - 2 - m, and the
p-frame at transformed level m carries the flux of original level
N_t - 2 - m.
"""
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import structlog

from pfcontrol.config import ModelParams, ReactionKind
from pfcontrol.errors import BlowUpError, InvalidSpecError
from .grid import Grid, check_field, interior_laplacian
from .model import ReactionTerm, reaction_term

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class AdjointState:
    p: np.ndarray
    q: np.ndarray
    level: int = 0


@dataclass(frozen=True)
class AdjointDiagnostics:
    p2: np.ndarray
    q2: np.ndarray
    q3: np.ndarray
    p_history: np.ndarray
    q_history: np.ndarray


@dataclass(frozen=True)
class AdjointResult:
    flux: np.ndarray
    final: AdjointState
    diagnostics: AdjointDiagnostics | None = None


def adjoint_step(
    astate: AdjointState,
    ztilde_k: np.ndarray,
    z_k: np.ndarray | None,
    params: ModelParams,
    grid: Grid,
    *,
    reaction: ReactionTerm | None = None,
) -> AdjointState:
    reaction = reaction or reaction_term(params)
    if z_k is None:
        if reaction.kind is ReactionKind.LIMITER:
            raise InvalidSpecError("z_k", "the limiter adjoint needs z")
        z_k = ztilde_k
    inner = grid.interior
    p, q = astate.p, astate.q
    zt, z = ztilde_k[inner], z_k[inner]

    p_new = np.zeros_like(p)
    p_new[inner] = p[inner] + grid.dt * (
        interior_laplacian(p, grid.dx) - reaction.coupling(zt, z) * q[inner]
    )
    p_rate = (p_new[inner] - p[inner]) / grid.dt

    q_new = np.zeros_like(q)
    q_new[inner] = q[inner] + grid.dt / (params.gamma * params.xi**2) * (
        params.xi**2 * interior_laplacian(q, grid.dx)
        + params.latent_heat * p_rate
        + reaction.d_ytilde(zt, z) * q[inner]
    )

    level = astate.level + 1
    if not (np.all(np.isfinite(p_new)) and np.all(np.isfinite(q_new))):
        raise BlowUpError("adjoint", level)
    return AdjointState(p=p_new, q=q_new, level=level)


def flux_from_p(p_frame: np.ndarray, grid: Grid) -> np.ndarray:
    """One-sided -dp/dn at every boundary point, using p = 0 there."""
    boundary = grid.boundary
    return np.asarray(p_frame)[boundary.neighbors] / boundary.normal_dx


def solve_adjoint(
    ytilde_traj: Sequence[np.ndarray],
    y_traj: Sequence[np.ndarray],
    target,
    params: ModelParams,
    grid: Grid,
    *,
    diagnostics: bool = False,
) -> AdjointResult:
    if len(ytilde_traj) != grid.nt or len(y_traj) != grid.nt:
        raise InvalidSpecError(
            "trajectory", f"expected {grid.nt} frames per trajectory"
        )
    target = check_field(target, grid, "target")
    reaction = reaction_term(params)
    needs_z = reaction.kind is ReactionKind.LIMITER
    inner = grid.interior
    gxx = params.gamma * params.xi**2

    q0 = np.zeros(grid.shape)
    q0[inner] = (target - np.asarray(ytilde_traj[grid.nt - 1]))[inner] / gxx
    state = AdjointState(p=np.zeros(grid.shape), q=q0, level=0)

    flux = np.zeros(grid.control_shape)
    q3 = np.zeros(grid.control_shape) if diagnostics else None
    p_history: list[np.ndarray] = []
    q_history: list[np.ndarray] = []

    for m in range(grid.nt - 1):
        k = grid.nt - 2 - m
        flux[k] = flux_from_p(state.p, grid)
        if diagnostics:
            q3[k] = params.xi**2 * flux_from_p(state.q, grid)  # type: ignore
            p_history.append(state.p)
            q_history.append(state.q)
        state = adjoint_step(
            state,
            np.asarray(ytilde_traj[k]),
            np.asarray(y_traj[k]) if needs_z else None,
            params,
            grid,
            reaction=reaction,
        )

    extra = None
    if diagnostics:
        p_history.append(state.p)
        q_history.append(state.q)
        extra = AdjointDiagnostics(
            p2=state.p,
            q2=gxx * state.q - params.latent_heat * state.p,
            q3=q3,  # type: ignore[arg-type]
            p_history=np.stack(p_history),
            q_history=np.stack(q_history),
        )
    return AdjointResult(flux=flux, final=state, diagnostics=extra)
