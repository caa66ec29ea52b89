"""Phase-field profiles, target regions and level-set extraction."""
from abc import ABC, abstractmethod
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from pfcontrol.errors import InvalidSpecError
from pfcontrol.solvers.grid import Grid, check_field
from pfcontrol.solvers.objective import cell_weights

# Points this close to a region boundary count as inside.
INSIDE_TOLERANCE = 1e-12


def tanh_factor(x, x0: float, xi: float, orientation: int = 1):
    """Diffuse step, solid (1) for x < x0 with orientation +1."""
    if orientation not in (1, -1):
        raise InvalidSpecError("orientation", "must be +1 or -1")
    return 0.5 * (1.0 - orientation * np.tanh((x - x0) / (2.0 * xi)))


def tanh_profile(
    interfaces: Sequence[tuple[float, int]],
    xi: float,
    grid: Grid,
    axis: int = 0,
) -> np.ndarray:
    coords = grid.mesh()[axis]
    length = grid.spec.lengths[axis]
    profile = np.ones(grid.shape)
    for x0, orientation in interfaces:
        if not 0.0 <= x0 <= length:
            raise InvalidSpecError("interfaces", f"{x0} is outside the domain")
        profile = profile * tanh_factor(coords, x0, xi, orientation)
    return profile


class Region(ABC):
    @abstractmethod
    def signed_distance(self, *coords: np.ndarray) -> np.ndarray:
        """Negative inside, positive outside."""

    def contains(self, *coords: np.ndarray) -> np.ndarray:
        return self.signed_distance(*coords) <= INSIDE_TOLERANCE


@dataclass(frozen=True)
class Interval(Region):
    lo: float
    hi: float

    def signed_distance(self, *coords: np.ndarray) -> np.ndarray:
        x = coords[0]
        if self.lo > self.hi:
            return np.full(np.shape(x), np.inf)
        return np.maximum(self.lo - x, x - self.hi)


@dataclass(frozen=True)
class Rectangle(Region):
    x1: tuple[float, float]
    x2: tuple[float, float]

    def signed_distance(self, *coords: np.ndarray) -> np.ndarray:
        c1, c2 = coords
        d1 = np.maximum(self.x1[0] - c1, c1 - self.x1[1])
        d2 = np.maximum(self.x2[0] - c2, c2 - self.x2[1])
        outside = np.hypot(np.maximum(d1, 0.0), np.maximum(d2, 0.0))
        inside = np.minimum(np.maximum(d1, d2), 0.0)
        return outside + inside


@dataclass(frozen=True)
class Disc(Region):
    center: tuple[float, float]
    radius: float

    def signed_distance(self, *coords: np.ndarray) -> np.ndarray:
        c1, c2 = coords
        return (
            np.hypot(c1 - self.center[0], c2 - self.center[1]) - self.radius
        )


def _union_distance(regions: Iterable[Region], grid: Grid) -> np.ndarray:
    coords = grid.mesh()
    distance = np.full(grid.shape, np.inf)
    for region in regions:
        distance = np.minimum(distance, region.signed_distance(*coords))
    return distance


def _as_regions(regions: Region | Iterable[Region]) -> list[Region]:
    if isinstance(regions, Region):
        return [regions]
    return list(regions)


def indicator_profile(
    regions: Region | Iterable[Region], grid: Grid
) -> np.ndarray:
    distance = _union_distance(_as_regions(regions), grid)
    return (distance <= INSIDE_TOLERANCE).astype(float)


def region_profile(
    regions: Region | Iterable[Region], xi: float, grid: Grid
) -> np.ndarray:
    """Diffuse profile across the boundary of a union of regions."""
    distance = _union_distance(_as_regions(regions), grid)
    return 0.5 * (1.0 - np.tanh(distance / (2.0 * xi)))


def solid_fraction(ytilde, grid: Grid) -> float:
    ytilde = check_field(ytilde, grid, "ytilde")
    weights = cell_weights(grid)
    return float(np.sum(weights[ytilde > 0.5]) / np.sum(weights))


@dataclass(frozen=True)
class Segment:
    a: tuple[float, float]
    b: tuple[float, float]


def _crossings_1d(values: np.ndarray, x: np.ndarray, level: float):
    shifted = values - level
    above = shifted > 0.0
    crossings = []
    for i in np.flatnonzero(above[:-1] != above[1:]):
        t = shifted[i] / (shifted[i] - shifted[i + 1])
        crossings.append(float(x[i] + t * (x[i + 1] - x[i])))
    return crossings


# Edges of a cell by corner pair; corners are numbered counter-clockwise
# from (i, j): 0=(i, j), 1=(i+1, j), 2=(i+1, j+1), 3=(i, j+1).
_EDGE_CORNERS = ((0, 1), (1, 2), (2, 3), (3, 0))
# Edge pairs joined by a segment, keyed by the bitmask of corners above.
_CASES: dict[int, tuple[tuple[int, int], ...]] = {
    1: ((3, 0),),
    2: ((0, 1),),
    3: ((3, 1),),
    4: ((1, 2),),
    6: ((0, 2),),
    7: ((3, 2),),
    8: ((2, 3),),
    9: ((0, 2),),
    11: ((1, 2),),
    12: ((1, 3),),
    13: ((0, 1),),
    14: ((3, 0),),
}
# Saddles, as (centre above, centre below): the cell-centre mean decides
# which pair of corners is cut off.
_SADDLES = {
    5: (((0, 1), (2, 3)), ((3, 0), (1, 2))),
    10: (((3, 0), (1, 2)), ((0, 1), (2, 3))),
}


def _cut(points, s, edge: int, x1, x2) -> tuple[float, float]:
    c0, c1 = _EDGE_CORNERS[edge]
    (a1, a2), (b1, b2) = points[c0], points[c1]
    t = s[c0] / (s[c0] - s[c1])
    return (
        float(x1[a1] + t * (x1[b1] - x1[a1])),
        float(x2[a2] + t * (x2[b2] - x2[a2])),
    )


def _crossings_2d(values: np.ndarray, grid: Grid, level: float):
    x1, x2 = grid.axis(0), grid.axis(1)
    shifted = values - level
    above = shifted > 0.0
    corners = np.stack(
        [above[:-1, :-1], above[1:, :-1], above[1:, 1:], above[:-1, 1:]]
    )
    mixed = np.flatnonzero(
        (corners.any(axis=0) & ~corners.all(axis=0)).ravel()
    )
    ncols = values.shape[1] - 1
    segments = []
    for cell in mixed:
        i, j = divmod(int(cell), ncols)
        points = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))
        s = [shifted[p] for p in points]
        mask = sum(1 << c for c in range(4) if s[c] > 0.0)

        if mask in _SADDLES:
            centre_above, centre_below = _SADDLES[mask]
            pairs = centre_above if np.mean(s) > 0.0 else centre_below
        else:
            pairs = _CASES[mask]
        segments.extend(
            Segment(_cut(points, s, e0, x1, x2), _cut(points, s, e1, x1, x2))
            for e0, e1 in pairs
        )
    return segments


def extract_interface(ytilde, grid: Grid, level: float = 0.5) -> list:
    """Level-set crossings of the phase field.

    1D returns positions, 2D returns line segments.
    """
    values = check_field(ytilde, grid, "ytilde")
    if grid.dim == 1:
        return _crossings_1d(values, grid.axis(0), level)
    return _crossings_2d(values, grid, level)
