import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
import structlog
from pydantic import ValidationError

from pfcontrol.config import GridSpec, ModelParams
from pfcontrol.errors import InvalidSpecError

logger = structlog.get_logger(__name__)

EDGES_1D = ("left", "right")
EDGES_2D = ("bottom", "top", "left", "right")

Frames = tuple[np.ndarray, ...]
Advance = Callable[[int, Frames], Frames]
_CORNERS = ((0, 0, 1, 1), (-1, 0, -2, 1), (0, -1, 1, -2), (-1, -1, -2, -2))


@dataclass(frozen=True)
class BoundaryIndex:
    """Enumeration of the controlled boundary points of one time level.

    Points are ordered bottom, top, left, right (1D: left, right), each
    edge by increasing along-index. 2D corners are not part of it.
    """

    points: tuple[np.ndarray, ...]
    neighbors: tuple[np.ndarray, ...]
    edges: tuple[str, ...]
    along: np.ndarray
    normal_dx: np.ndarray
    along_dx: np.ndarray

    def __len__(self) -> int:
        return len(self.edges)

    def edge_slice(self, edge: str) -> slice:
        members = [b for b, name in enumerate(self.edges) if name == edge]
        if not members:
            raise KeyError(edge)
        return slice(members[0], members[-1] + 1)


def _boundary_1d(nx: int, dx: float) -> BoundaryIndex:
    return BoundaryIndex(
        points=(np.array([0, nx - 1]),),
        neighbors=(np.array([1, nx - 2]),),
        edges=EDGES_1D,
        along=np.array([0, nx - 1]),
        normal_dx=np.array([dx, dx]),
        along_dx=np.ones(2),
    )


def _boundary_2d(n1: int, n2: int, dx1: float, dx2: float) -> BoundaryIndex:
    inner1 = np.arange(1, n1 - 1)
    inner2 = np.arange(1, n2 - 1)
    spacing = (dx1, dx2)
    # edge -> (normal axis, boundary index, inward index, along indices)
    layout = {
        "bottom": (1, 0, 1, inner1),
        "top": (1, n2 - 1, n2 - 2, inner1),
        "left": (0, 0, 1, inner2),
        "right": (0, n1 - 1, n1 - 2, inner2),
    }
    points: tuple[list, list] = ([], [])
    neighbors: tuple[list, list] = ([], [])
    edges: list[str] = []
    along, normal_dx, along_dx = [], [], []
    for name, (axis, fixed, inward, run) in layout.items():
        free = 1 - axis
        points[axis].append(np.full_like(run, fixed))
        points[free].append(run)
        neighbors[axis].append(np.full_like(run, inward))
        neighbors[free].append(run)
        edges.extend([name] * len(run))
        along.append(run)
        normal_dx.append(np.full(len(run), spacing[axis]))
        along_dx.append(np.full(len(run), spacing[free]))
    return BoundaryIndex(
        points=tuple(np.concatenate(part) for part in points),
        neighbors=tuple(np.concatenate(part) for part in neighbors),
        edges=tuple(edges),
        along=np.concatenate(along),
        normal_dx=np.concatenate(normal_dx),
        along_dx=np.concatenate(along_dx),
    )


@dataclass(frozen=True)
class Grid:
    spec: GridSpec
    dt: float
    dx: tuple[float, ...]
    boundary: BoundaryIndex = field(repr=False)

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def nt(self) -> int:
        return self.spec.nt

    @property
    def shape(self) -> tuple[int, ...]:
        return self.spec.counts

    @property
    def npoints(self) -> int:
        return math.prod(self.shape)

    @property
    def nboundary(self) -> int:
        return len(self.boundary)

    @property
    def control_shape(self) -> tuple[int, int]:
        return (self.nt, self.nboundary)

    @property
    def interior(self) -> tuple[slice, ...]:
        return (slice(1, -1),) * self.dim

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.spec.t_final, self.nt)

    def axis(self, index: int) -> np.ndarray:
        return np.linspace(0.0, self.spec.lengths[index], self.shape[index])

    def mesh(self) -> tuple[np.ndarray, ...]:
        axes = [self.axis(index) for index in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def boundary_coords(self) -> tuple[np.ndarray, ...]:
        return tuple(
            self.axis(index)[self.boundary.points[index]]
            for index in range(self.dim)
        )

    def level_of(self, t: float) -> int:
        return int(round(t / self.dt))

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def control(self, value: float = 0.0) -> np.ndarray:
        return np.full(self.control_shape, float(value))

    def fill_corners(self, values: np.ndarray) -> None:
        """Set 2D corners to the mean of their two edge neighbours."""
        if self.dim == 1:
            return
        # (corner i, corner j, inward i, inward j)
        for ci, cj, ni, nj in _CORNERS:
            values[ci, cj] = 0.5 * (values[ni, cj] + values[ci, nj])


def make_grid(spec: GridSpec | dict) -> Grid:
    if isinstance(spec, dict):
        try:
            spec = GridSpec(**spec)
        except ValidationError as exc:
            error = exc.errors()[0]
            name = ".".join(str(part) for part in error["loc"]) or "grid"
            raise InvalidSpecError(name, error["msg"]) from exc

    dt = spec.t_final / (spec.nt - 1)
    dx = tuple(
        length / (count - 1)
        for length, count in zip(spec.lengths, spec.counts)
    )
    if spec.dim == 1:
        boundary = _boundary_1d(spec.nx1, dx[0])
    else:
        boundary = _boundary_2d(
            spec.nx1, spec.nx2, dx[0], dx[1]  # type: ignore[arg-type]
        )
    return Grid(spec=spec, dt=dt, dx=dx, boundary=boundary)


def interior_laplacian(values: np.ndarray, dx: Sequence[float]) -> np.ndarray:
    """Central second differences, evaluated on interior points only."""
    if values.ndim == 1:
        return (values[:-2] - 2.0 * values[1:-1] + values[2:]) / dx[0] ** 2
    center = values[1:-1, 1:-1]
    along1 = values[:-2, 1:-1] - 2.0 * center + values[2:, 1:-1]
    along2 = values[1:-1, :-2] - 2.0 * center + values[1:-1, 2:]
    return along1 / dx[0] ** 2 + along2 / dx[1] ** 2


def laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Discrete Laplacian of a mesh function.

    Boundary entries of the result are zero and carry no meaning.
    """
    values = check_field(values, grid, "f")
    result = np.zeros_like(values)
    result[grid.interior] = interior_laplacian(values, grid.dx)
    return result


def stability_bound(grid: Grid, params: ModelParams) -> float:
    diffusion = max(1.0, 1.0 / params.gamma)
    return min(grid.dx) ** 2 / (2 * grid.dim * diffusion)


def check_field(values, grid: Grid, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.shape != grid.shape:
        raise InvalidSpecError(
            name, f"expected shape {grid.shape}, got {array.shape}"
        )
    if not np.all(np.isfinite(array)):
        raise InvalidSpecError(name, "contains non-finite values")
    return array


def check_control(values, grid: Grid, name: str = "u") -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.shape != grid.control_shape:
        raise InvalidSpecError(
            name,
            f"expected {grid.nt} levels x {grid.nboundary} boundary points,"
            f" got shape {array.shape}",
        )
    if not np.all(np.isfinite(array)):
        raise InvalidSpecError(name, "contains non-finite values")
    return array


def checkpoint_stride(nt: int) -> int:
    return math.ceil(math.sqrt(nt))


class FrameStore:
    """Time history of a multi-field state.

    With ``stride == 1`` every level is kept. Otherwise only every
    ``stride``-th level is kept and a segment is re-stepped with
    ``advance`` when one of its levels is requested; the most recent
    segment stays cached.
    """

    def __init__(
        self,
        nt: int,
        shape: tuple[int, ...],
        ncomponents: int,
        stride: int = 1,
        advance: Advance | None = None,
    ):
        if stride > 1 and advance is None:
            raise ValueError("a checkpointed store needs an advance function")
        self.nt = nt
        self.shape = shape
        self.ncomponents = ncomponents
        self.stride = stride
        self._advance = advance
        self._recorded = 0
        self._full: np.ndarray | None = None
        self._checkpoints: dict[int, Frames] = {}
        self._segment: tuple[int, list[Frames]] | None = None
        if stride == 1:
            self._full = np.empty((nt, ncomponents, *shape))

    @property
    def checkpointed(self) -> bool:
        return self.stride > 1

    def __len__(self) -> int:
        return self._recorded

    def record(self, level: int, frames: Frames) -> None:
        if level != self._recorded:
            raise ValueError(
                f"levels must be recorded in order, expected {self._recorded}"
            )
        if self._full is not None:
            for component, values in enumerate(frames):
                self._full[level, component] = values
        elif level % self.stride == 0:
            self._checkpoints[level] = tuple(v.copy() for v in frames)
        self._recorded += 1

    def frame(self, level: int) -> Frames:
        if level < 0:
            level += self._recorded
        if not 0 <= level < self._recorded:
            raise IndexError(level)
        if self._full is not None:
            return tuple(self._full[level])

        start = (level // self.stride) * self.stride
        if self._segment is None or self._segment[0] != start:
            self._segment = (start, self._replay(start))
        return self._segment[1][level - start]

    def _replay(self, start: int) -> list[Frames]:
        assert self._advance is not None
        stop = min(start + self.stride, self._recorded)
        logger.debug("segment_replayed", start=start, stop=stop)
        frames = [self._checkpoints[start]]
        for level in range(start, stop - 1):
            frames.append(self._advance(level, frames[-1]))
        return frames


class Trajectory(Sequence[np.ndarray]):
    """One component of a FrameStore, indexed by time level."""

    def __init__(self, store: FrameStore, component: int):
        self._store = store
        self._component = component

    def __len__(self) -> int:
        return len(self._store)

    def __getitem__(self, level):  # type: ignore[override]
        if isinstance(level, slice):
            return [self[k] for k in range(*level.indices(len(self)))]
        return self._store.frame(level)[self._component]

    def __iter__(self) -> Iterator[np.ndarray]:
        for level in range(len(self)):
            yield self[level]

    def __reversed__(self) -> Iterator[np.ndarray]:
        for level in range(len(self) - 1, -1, -1):
            yield self[level]

    @property
    def checkpointed(self) -> bool:
        return self._store.checkpointed

    def materialize(self) -> np.ndarray:
        return np.stack(list(self))
