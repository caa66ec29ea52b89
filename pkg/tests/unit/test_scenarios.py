import math

import numpy as np
import pytest

from pfcontrol.config import GridSpec, ReactionKind, StepUnit
from pfcontrol.errors import (
    ConfigError,
    InvalidSpecError,
    UnknownScenarioError,
)
from pfcontrol.scenarios import (
    Disc,
    Interval,
    Rectangle,
    available,
    builtin,
    extract_interface,
    indicator_profile,
    preset,
    region_profile,
    solid_fraction,
    tanh_profile,
)
from pfcontrol.scenarios.profiles import tanh_factor
from pfcontrol.solvers.grid import make_grid, stability_bound


def line(nx, length=1.0):
    return make_grid(GridSpec(lx1=length, nx1=nx, nt=2, t_final=1.0))


def plane(n1, n2, lx1=1.0, lx2=1.0):
    return make_grid(
        GridSpec(dim=2, lx1=lx1, lx2=lx2, nx1=n1, nx2=n2, nt=2, t_final=1.0)
    )


def test_tanh_profile_is_half_at_interface():
    grid = line(5)
    profile = tanh_profile([(0.25, 1)], 0.01, grid)
    assert profile[1] == 0.5


def test_tanh_factor_decay():
    xi = 0.005
    x = 0.3 + 2 * xi * math.atanh(0.9)
    assert tanh_factor(x, 0.3, xi, 1) == pytest.approx(0.05)
    assert tanh_factor(x, 0.3, xi, -1) == pytest.approx(0.95)


def test_tanh_factor_rejects_orientation():
    with pytest.raises(InvalidSpecError):
        tanh_factor(0.0, 0.5, 0.01, 0)


def test_opposing_interfaces_form_plateau():
    grid = line(201)
    profile = tanh_profile([(0.2, -1), (0.8, 1)], 0.005, grid)
    assert profile[100] >= 1.0 - 1e-6
    assert profile[0] < 1e-6 and profile[-1] < 1e-6


def test_tanh_profile_rejects_interface_outside_domain():
    with pytest.raises(InvalidSpecError):
        tanh_profile([(1.5, 1)], 0.005, line(11))


def test_indicator_profile_includes_right_endpoint():
    grid = line(5)
    profile = indicator_profile(Interval(0.0, 0.5), grid)
    assert profile.tolist() == [1.0, 1.0, 1.0, 0.0, 0.0]


def test_indicator_profile_empty_and_full():
    grid = line(7)
    assert not indicator_profile([], grid).any()
    assert not indicator_profile(Interval(0.6, 0.4), grid).any()
    assert indicator_profile(Interval(0.0, 1.0), grid).all()


def test_indicator_profile_2d_union():
    grid = plane(11, 11)
    discs = [Disc((0.2, 0.2), 0.1), Disc((0.8, 0.8), 0.1)]
    mask = indicator_profile(discs, grid)
    assert mask[2, 2] == 1.0 and mask[8, 8] == 1.0
    assert mask[5, 5] == 0.0
    assert mask.sum() == 10.0


def test_region_signed_distance():
    rect = Rectangle(x1=(0.2, 0.4), x2=(0.3, 0.7))
    assert rect.signed_distance(np.array(0.3), np.array(0.5)) == (
        pytest.approx(-0.1)
    )
    assert rect.signed_distance(np.array(0.7), np.array(0.5)) == (
        pytest.approx(0.3)
    )
    disc = Disc((0.5, 0.5), 0.25)
    assert disc.contains(np.array(0.5), np.array(0.75))
    assert not disc.contains(np.array(0.5), np.array(0.8))


def test_region_profile_is_half_on_region_boundary():
    grid = line(11)
    profile = region_profile(Interval(0.2, 0.6), 0.01, grid)
    assert profile[2] == pytest.approx(0.5)
    assert profile[6] == pytest.approx(0.5)
    assert profile[4] > 0.99
    assert profile[9] < 0.01


def test_solid_fraction_uses_cell_weights():
    grid = line(5)
    solid = indicator_profile(Interval(0.0, 0.5), grid)
    fraction = solid_fraction(solid, grid)
    assert fraction == pytest.approx(0.625)


def test_no_interface_in_uniform_field():
    assert extract_interface(np.zeros(7), line(7)) == []
    assert extract_interface(np.zeros((4, 5)), plane(4, 5)) == []


def test_crossing_is_interpolated():
    grid = line(3)
    assert extract_interface(np.array([1.0, 0.0, 0.0]), grid) == [
        pytest.approx(0.25)
    ]


def test_tanh_interface_is_recovered():
    grid = line(201)
    profile = tanh_profile([(0.437, 1)], 0.01, grid)
    (x0,) = extract_interface(profile, grid)
    assert abs(x0 - 0.437) <= grid.dx[0]


def test_two_crystals_have_four_crossings():
    grid = line(201)
    profile = region_profile(
        [Interval(0.2, 0.4), Interval(0.6, 0.8)], 0.005, grid
    )
    crossings = extract_interface(profile, grid)
    np.testing.assert_allclose(crossings, [0.2, 0.4, 0.6, 0.8], atol=5e-3)


def test_disc_contour_lies_on_circle():
    grid = plane(61, 61)
    center, radius = (0.5, 0.5), 0.25
    segments = extract_interface(
        region_profile(Disc(center, radius), 0.01, grid), grid
    )
    assert len(segments) > 20
    for segment in segments:
        for point in (segment.a, segment.b):
            distance = math.dist(point, center)
            assert distance == pytest.approx(radius, abs=grid.dx[0])


def test_straight_front_in_2d():
    grid = plane(21, 11)
    x1 = grid.mesh()[0]
    field = 0.5 * (1.0 - np.tanh((x1 - 0.33) / 0.02))
    segments = extract_interface(field, grid)
    assert len(segments) == 10
    for segment in segments:
        assert segment.a[0] == pytest.approx(0.33, abs=0.01)
        assert segment.b[0] == pytest.approx(0.33, abs=0.01)


def test_saddle_cell_is_split():
    grid = plane(3, 3)
    field = np.zeros((3, 3))
    field[0, 0] = field[1, 1] = 1.0
    segments = extract_interface(field, grid)
    # two segments from the saddle, one from each neighbouring cell
    assert len(segments) == 5
    in_saddle = [s for s in segments if max(*s.a, *s.b) <= 0.5]
    assert len(in_saddle) == 2


def test_available_lists_shipped_presets_in_order():
    assert available() == [
        "exp1",
        "exp2",
        "exp3",
        "exp4",
        "exp5",
        "exp6",
        "exp7",
        "exp8",
        "exp9",
        "move2d-linear",
        "move2d-limiter",
        "separate2d",
    ]


def test_exp1_preset():
    scenario = builtin("exp1")
    grid = scenario.grid
    assert grid.shape == (400,)
    assert grid.nt == 400_000
    assert grid.spec.t_final == 0.1
    assert scenario.params.alpha == 0.0
    assert scenario.params.beta == 2.0
    assert scenario.params.xi == 0.005
    assert scenario.optimize.total_iterations == 100
    assert scenario.optimize.step_unit is StepUnit.FIRST_CHANGE
    assert scenario.optimize.step_at(0) == 1.0


def test_separate2d_preset():
    scenario = builtin("separate2d")
    assert scenario.grid.shape == (60, 100)
    assert scenario.grid.nt == 8000
    assert scenario.grid.spec.t_final == 0.081
    assert scenario.params.reaction is ReactionKind.LIMITER
    assert scenario.params.gamma == 3.0
    assert scenario.optimize.total_iterations == 1000
    assert scenario.optimize.step_at(999) == 0.15


def test_exp8_guess_is_zero():
    scenario = builtin("exp8", grid={"nx1": 20, "nt": 100})
    assert not scenario.u0.any()


def test_exp9_schedule():
    schedule = builtin("exp9", grid={"nx1": 20, "nt": 100}).optimize
    assert schedule.total_iterations == 250
    assert schedule.step_at(224) == 0.5
    assert schedule.step_at(225) == 0.25


@pytest.mark.parametrize("name", available())
def test_presets_are_stable_and_in_range(name):
    scenario = builtin(name)
    assert scenario.grid.dt <= stability_bound(scenario.grid, scenario.params)
    assert scenario.target.min() >= 0.0
    assert scenario.target.max() <= 1.0
    assert np.isin(scenario.ytilde_bc, (0.0, 1.0)).all()
    assert scenario.u0.shape == scenario.grid.control_shape


def test_builtin_applies_string_overrides():
    scenario = builtin(
        "exp4",
        grid={"nx1": "50", "nt": "1000"},
        params={"alpha": "1e-9"},
        optimize={"iterations": "7"},
    )
    assert scenario.grid.shape == (50,)
    assert scenario.params.alpha == 1e-9
    assert scenario.optimize.total_iterations == 7
    assert scenario.optimize.step_at(0) == 0.5
    assert scenario.optimize.step_unit is StepUnit.FIRST_CHANGE


def test_builtin_rejects_invalid_override():
    with pytest.raises(ConfigError) as info:
        builtin("exp1", grid={"nx1": "2"})
    assert info.value.key == "grid.nx1"


def test_unknown_scenario():
    with pytest.raises(UnknownScenarioError) as info:
        builtin("exp10")
    assert "exp1" in info.value.available
    assert "exp10" in str(info.value)


@pytest.mark.parametrize("name", available())
def test_presets_record_reported_step(name):
    entry = preset(name)
    assert entry.optimize.step_unit is StepUnit.FIRST_CHANGE
    reported = [
        float(part.split(":")[-1]) for part in entry.reported_step.split(",")
    ]
    assert all(step >= 5.0 for step in reported)
    assert entry.optimize.step_at(0) <= 1.0


def test_absolute_step_override():
    scenario = builtin(
        "exp1",
        grid={"nx1": "20", "nt": "100"},
        optimize={"step_unit": "absolute", "step": "3e15"},
    )
    assert scenario.optimize.step_unit is StepUnit.ABSOLUTE
    assert scenario.optimize.step_at(0) == 3e15


def test_unknown_step_unit_names_its_key():
    with pytest.raises(ConfigError) as info:
        builtin("exp1", optimize={"step_unit": "relative"})
    assert info.value.key == "opt.step_unit"
