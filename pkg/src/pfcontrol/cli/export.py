import csv
import json
import os
from collections.abc import Iterable, Iterator, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import Any, TextIO

import numpy as np

from pfcontrol.errors import InvalidSpecError
from pfcontrol.solvers.grid import Grid
from pfcontrol.solvers.optimize import HISTORY_COLUMNS, DescentHistory

CONTROL_COLUMNS = ("k", "t", "edge", "i", "x1", "x2", "u")
FIELD_COLUMNS = ("i", "j", "x1", "x2", "y", "ytilde")
INTERFACE_COLUMNS_1D = ("t", "crossing_id", "x1")
INTERFACE_COLUMNS_2D = ("t", "segment_id", "x1a", "x2a", "x1b", "x2b")


def _num(value: float) -> str:
    # repr of a Python float round-trips exactly
    return repr(float(value))


@contextmanager
def atomic_open(path: Path) -> Iterator[TextIO]:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        with tmp.open("w", newline="", encoding="utf-8") as handle:
            yield handle
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    with atomic_open(path) as handle:
        writer = csv.writer(handle, delimiter=",", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_json(path: Path, payload: dict[str, Any]) -> Path:
    with atomic_open(path) as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def _coords(grid: Grid) -> tuple[np.ndarray, np.ndarray | None]:
    coords = grid.boundary_coords()
    return coords[0], coords[1] if grid.dim == 2 else None


def write_control_csv(path: Path, u: np.ndarray, grid: Grid) -> Path:
    x1, x2 = _coords(grid)
    boundary = grid.boundary
    times = grid.times

    def rows():
        for k in range(grid.nt):
            t = _num(times[k])
            for b, edge in enumerate(boundary.edges):
                yield (
                    k,
                    t,
                    edge,
                    int(boundary.along[b]),
                    _num(x1[b]),
                    "" if x2 is None else _num(x2[b]),
                    _num(u[k, b]),
                )

    return write_csv(path, CONTROL_COLUMNS, rows())


def read_control_csv(path: Path | str, grid: Grid) -> np.ndarray:
    """Load a control written by :func:`write_control_csv` onto ``grid``."""
    order = {
        (edge, int(along)): b
        for b, (edge, along) in enumerate(
            zip(grid.boundary.edges, grid.boundary.along)
        )
    }
    u = np.full(grid.control_shape, np.nan)
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != CONTROL_COLUMNS:
            raise InvalidSpecError("control", "unexpected header")
        for row in reader:
            k = int(row["k"])
            key = (row["edge"], int(row["i"]))
            if not 0 <= k < grid.nt or key not in order:
                raise InvalidSpecError(
                    "control", f"row {row} does not belong to the grid"
                )
            u[k, order[key]] = float(row["u"])
    if np.isnan(u).any():
        raise InvalidSpecError("control", "incomplete boundary data")
    return u


def write_field_csv(
    path: Path, y: np.ndarray, ytilde: np.ndarray, grid: Grid
) -> Path:
    axes = [grid.axis(index) for index in range(grid.dim)]

    def rows():
        for index in np.ndindex(*grid.shape):
            i = index[0]
            j = index[1] if grid.dim == 2 else None
            yield (
                i,
                "" if j is None else j,
                _num(axes[0][i]),
                "" if j is None else _num(axes[1][j]),
                _num(y[index]),
                _num(ytilde[index]),
            )

    return write_csv(path, FIELD_COLUMNS, rows())


def write_interface_csv(
    path: Path, interfaces: Sequence[tuple[float, list]], grid: Grid
) -> Path:
    """Write level-set crossings, one block of rows per time."""
    if grid.dim == 1:
        rows = [
            (_num(t), n, _num(x))
            for t, crossings in interfaces
            for n, x in enumerate(crossings)
        ]
        return write_csv(path, INTERFACE_COLUMNS_1D, rows)
    rows = [
        (_num(t), n, *map(_num, (*seg.a, *seg.b)))
        for t, segments in interfaces
        for n, seg in enumerate(segments)
    ]
    return write_csv(path, INTERFACE_COLUMNS_2D, rows)


def write_history_csv(path: Path, history: DescentHistory) -> Path:
    rows = [(row.iteration, *map(_num, row.as_tuple()[1:])) for row in history]
    return write_csv(path, HISTORY_COLUMNS, rows)
