"""Discretely observed multivariate functional samples on a shared time grid.

Data model: ``k`` independent groups; group ``i`` holds ``n_i`` subjects and
each subject contributes ``p`` curves evaluated at the ``T`` grid points,
stored as an ``(n_i, p, T)`` array.  Datasets are immutable after
construction and safe to share between threads/processes.

The on-disk format is a long CSV with header
``group,subject,variable,time_index,value`` (one line per scalar
measurement), optionally accompanied by a grid file with one time value per
line.  Without a grid file the grid defaults to ``T`` equally spaced points
on [0, 1].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GroupTooSmallError,
    InconsistentDimensionsError,
    MissingCellError,
    NonFiniteError,
    NonPositiveScaleError,
)

CSV_COLUMNS = ("group", "subject", "variable", "time_index", "value")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing evaluation points of the curves."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 1:
            raise InconsistentDimensionsError("grid must be a 1-d array with at least one point")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteError("grid contains non-finite time values")
        if pts.size > 1 and not np.all(np.diff(pts) > 0):
            raise InconsistentDimensionsError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, n_points: int) -> "TimeGrid":
        """``n_points`` equally spaced points on [0, 1] (a single point sits at 0)."""
        if n_points < 1:
            raise InconsistentDimensionsError("n_points must be >= 1")
        if n_points == 1:
            return cls(np.zeros(1))
        return cls(np.linspace(0.0, 1.0, n_points))

    @property
    def n_points(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class Group:
    """One sample: ``curves`` has shape (n_subjects, n_variables, n_points)."""

    label: str
    curves: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.curves, dtype=float)
        if arr.ndim != 3:
            raise InconsistentDimensionsError(
                f"group {self.label!r}: curves must have shape (n_subjects, p, T), got {arr.shape}"
            )
        if arr.shape[0] < 2:
            raise GroupTooSmallError(
                f"group {self.label!r} has {arr.shape[0]} subject(s); at least 2 are required"
            )
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError(f"group {self.label!r} contains non-finite curve values")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "curves", arr)

    @property
    def n_subjects(self) -> int:
        return self.curves.shape[0]


@dataclass(frozen=True)
class FunctionalDataset:
    """k groups of subject curves sharing one grid."""

    grid: TimeGrid
    groups: tuple[Group, ...] = field(default_factory=tuple)

    def __post_init__(self):
        groups = tuple(self.groups)
        if len(groups) < 1:
            raise InconsistentDimensionsError("dataset needs at least one group")
        p, t = groups[0].curves.shape[1:]
        for g in groups:
            if g.curves.shape[1:] != (p, t):
                raise InconsistentDimensionsError(
                    f"group {g.label!r} has shape {g.curves.shape[1:]}, expected {(p, t)}"
                )
        if t != self.grid.n_points:
            raise InconsistentDimensionsError(
                f"curves have {t} time points but the grid has {self.grid.n_points}"
            )
        object.__setattr__(self, "groups", groups)

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def p(self) -> int:
        return self.groups[0].curves.shape[1]

    @property
    def n_points(self) -> int:
        return self.grid.n_points

    @property
    def group_sizes(self) -> tuple[int, ...]:
        return tuple(g.n_subjects for g in self.groups)

    @property
    def n_total(self) -> int:
        return sum(self.group_sizes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(g.label for g in self.groups)


def load_csv(path, grid_path=None) -> FunctionalDataset:
    """Read a dataset from a long-format CSV file.

    Parameters
    ----------
    path : str or Path
        CSV file with header ``group,subject,variable,time_index,value``.
        ``variable`` and ``time_index`` are 0-based integers; every
        (group, subject) must contribute exactly one value per
        (variable, time_index) cell.
    grid_path : str or Path, optional
        Text file with one time value per line (strictly increasing, length
        T).  Defaults to T equally spaced points on [0, 1].

    Returns
    -------
    FunctionalDataset
        Groups ordered by first appearance in the file; subjects likewise.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        dataset = _parse_csv(fh, str(path))
    if grid_path is not None:
        grid = _read_grid(grid_path, dataset.n_points)
        dataset = FunctionalDataset(grid=grid, groups=dataset.groups)
    return dataset


def _parse_csv(fh, name: str) -> FunctionalDataset:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or not set(CSV_COLUMNS).issubset(reader.fieldnames):
        raise InconsistentDimensionsError(
            f"{name}: expected header with columns {','.join(CSV_COLUMNS)}"
        )

    group_order: list[str] = []
    subject_order: dict[str, list[str]] = {}
    cells: dict[tuple[str, str], dict[tuple[int, int], float]] = {}
    max_var = -1
    max_time = -1

    for line_no, row in enumerate(reader, start=2):
        try:
            g = row["group"]
            s = row["subject"]
            v = int(row["variable"])
            t = int(row["time_index"])
            value = float(row["value"])
        except (TypeError, ValueError, KeyError) as exc:
            raise InconsistentDimensionsError(f"{name}:{line_no}: malformed row ({exc})") from exc
        if v < 0 or t < 0:
            raise InconsistentDimensionsError(
                f"{name}:{line_no}: variable/time_index must be non-negative"
            )
        if not np.isfinite(value):
            raise NonFiniteError(f"{name}:{line_no}: non-finite value {row['value']!r}")
        if g not in subject_order:
            group_order.append(g)
            subject_order[g] = []
        if (g, s) not in cells:
            subject_order[g].append(s)
            cells[(g, s)] = {}
        cell_map = cells[(g, s)]
        if (v, t) in cell_map:
            raise InconsistentDimensionsError(
                f"{name}:{line_no}: duplicate value for group={g!r} subject={s!r} "
                f"variable={v} time_index={t}"
            )
        cell_map[(v, t)] = value
        max_var = max(max_var, v)
        max_time = max(max_time, t)

    if max_var < 0:
        raise MissingCellError(f"{name}: file contains no data rows")
    p, n_t = max_var + 1, max_time + 1

    groups = []
    for g in group_order:
        subjects = subject_order[g]
        arr = np.empty((len(subjects), p, n_t))
        for j, s in enumerate(subjects):
            cell_map = cells[(g, s)]
            if len(cell_map) != p * n_t:
                missing = next(
                    (v, t) for v in range(p) for t in range(n_t) if (v, t) not in cell_map
                )
                raise MissingCellError(
                    f"{name}: group={g!r} subject={s!r} is missing "
                    f"variable={missing[0]} time_index={missing[1]}"
                )
            for (v, t), value in cell_map.items():
                arr[j, v, t] = value
        groups.append(Group(label=g, curves=arr))

    return FunctionalDataset(grid=TimeGrid.uniform(n_t), groups=tuple(groups))


def _read_grid(grid_path, n_points: int) -> TimeGrid:
    with open(grid_path, "r", encoding="utf-8") as fh:
        tokens = [line.strip() for line in fh if line.strip()]
    try:
        values = [float(tok) for tok in tokens]
    except ValueError as exc:
        raise InconsistentDimensionsError(f"{grid_path}: malformed grid value ({exc})") from exc
    if len(values) != n_points:
        raise InconsistentDimensionsError(
            f"{grid_path}: grid file has {len(values)} values but the data has {n_points} time points"
        )
    return TimeGrid(np.asarray(values))


def write_csv(dataset: FunctionalDataset, path, grid_path=None) -> None:
    """Write a dataset in the long CSV format (full float precision).

    ``load_csv(write_csv(d))`` reproduces ``d`` bit-exactly.  Subjects are
    written as ``s0, s1, ...`` in storage order.  When ``grid_path`` is given
    the grid is written alongside, one value per line.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for group in dataset.groups:
            n_i, p, n_t = group.curves.shape
            for j in range(n_i):
                for v in range(p):
                    for t in range(n_t):
                        writer.writerow(
                            [group.label, f"s{j}", v, t, repr(float(group.curves[j, v, t]))]
                        )
    if grid_path is not None:
        with open(grid_path, "w", encoding="utf-8") as fh:
            for value in dataset.grid.points:
                fh.write(repr(float(value)) + "\n")


def apply_scaling(dataset: FunctionalDataset, scale) -> FunctionalDataset:
    """Multiply every subject's curves elementwise by a positive (p, T) array.

    Returns a new dataset; the input is unchanged.  Raises
    :class:`NonPositiveScaleError` if any entry of ``scale`` is <= 0 or
    non-finite.
    """
    s = np.asarray(scale, dtype=float)
    if s.shape != (dataset.p, dataset.n_points):
        raise NonPositiveScaleError(
            f"scale must have shape {(dataset.p, dataset.n_points)}, got {s.shape}"
        )
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise NonPositiveScaleError("scale entries must be finite and strictly positive")
    groups = tuple(
        Group(label=g.label, curves=g.curves * s[None, :, :]) for g in dataset.groups
    )
    return FunctionalDataset(grid=dataset.grid, groups=groups)
