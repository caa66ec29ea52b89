from .adjoint import AdjointResult, AdjointState, flux_from_p, solve_adjoint
from .forward import ForwardResult, State, apply_dirichlet, solve_forward, step
from .grid import Grid, Trajectory, laplacian, make_grid, stability_bound
from .model import PhysicalityReport, physicality_violation, reaction_term
from .objective import (
    CostReport,
    boundary_quadrature,
    cost,
    gradient,
    reduced_cost,
)
from .optimize import (
    DescentHistory,
    DescentResult,
    descend,
    fd_gradient_check,
    random_directions,
)


__all__ = [
    "AdjointResult",
    "AdjointState",
    "flux_from_p",
    "solve_adjoint",
    "ForwardResult",
    "State",
    "apply_dirichlet",
    "solve_forward",
    "step",
    "Grid",
    "Trajectory",
    "laplacian",
    "make_grid",
    "stability_bound",
    "PhysicalityReport",
    "physicality_violation",
    "reaction_term",
    "CostReport",
    "boundary_quadrature",
    "cost",
    "gradient",
    "reduced_cost",
    "DescentHistory",
    "DescentResult",
    "descend",
    "fd_gradient_check",
    "random_directions",
]
