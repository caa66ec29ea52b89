import numpy as np
import pytest

from pfcontrol.config import ModelParams, OptimizeConfig
from pfcontrol.scenarios import ScenarioSpec, builtin

# exp1 shrunk to a grid that solves in well under a second
COARSE_EXP1 = {"nx1": 50, "nt": 2000, "t_final": 0.05}


def _make_scenario(grid, params=None, **fields) -> ScenarioSpec:
    optimize = fields.pop("optimize", OptimizeConfig(iterations=1, step=1.0))
    values = {
        "y_ini": grid.zeros(),
        "ytilde_ini": grid.zeros(),
        "ytilde_bc": np.zeros(grid.nboundary),
        "target": grid.zeros(),
        "u0": grid.control(),
        **fields,
    }
    return ScenarioSpec(
        name="custom",
        description="hand-built scenario",
        grid=grid,
        params=params or ModelParams.solidification_1d(),
        optimize=optimize,
        **values,
    )


@pytest.fixture
def make_scenario():
    return _make_scenario


@pytest.fixture
def coarse_exp1() -> ScenarioSpec:
    return builtin("exp1", grid=COARSE_EXP1)
