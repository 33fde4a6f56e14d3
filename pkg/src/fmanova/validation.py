"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import numpy as np

from .dataset import FunctionalDataset, Group, TimeGrid
from .errors import DataValidationError, DimensionMismatchError


def check_seed(seed) -> int:
    """Require an explicit 64-bit unsigned integer seed.

    Bootstrap results are reproducibility-critical, so there is no silent
    wall-clock default.
    """
    if seed is None:
        raise DataValidationError(
            "an explicit integer seed is required (no wall-clock default); pass seed=<int>"
        )
    if isinstance(seed, (bool, float)):
        raise DataValidationError(f"seed must be an integer, got {type(seed).__name__}")
    value = int(seed)
    if not 0 <= value < 2**64:
        raise DataValidationError(f"seed must satisfy 0 <= seed < 2**64, got {value}")
    return value


def check_alpha(alpha: float) -> float:
    value = float(alpha)
    if not 0.0 < value < 1.0:
        raise DataValidationError(f"alpha must be in (0, 1), got {alpha}")
    return value


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    out = int(value)
    if out < minimum:
        raise DataValidationError(f"{name} must be >= {minimum}, got {value}")
    return out


def as_dataset(X, grid=None, labels=None) -> FunctionalDataset:
    """Coerce estimator input into a :class:`FunctionalDataset`.

    Accepts a ready dataset or a sequence of per-group arrays of shape
    (n_i, p, T).  ``grid`` may be a TimeGrid or a 1-d array of time values;
    it defaults to T equally spaced points on [0, 1].
    """
    if isinstance(X, FunctionalDataset):
        if grid is not None:
            raise DimensionMismatchError(
                "passing a grid alongside a FunctionalDataset is ambiguous"
            )
        return X
    arrays = [np.asarray(a, dtype=float) for a in X]
    if len(arrays) == 0:
        raise DimensionMismatchError("X must contain at least one group array")
    for a in arrays:
        if a.ndim != 3:
            raise DimensionMismatchError(
                f"each group array must have shape (n_i, p, T), got {a.shape}"
            )
    n_t = arrays[0].shape[2]
    if grid is None:
        time_grid = TimeGrid.uniform(n_t)
    elif isinstance(grid, TimeGrid):
        time_grid = grid
    else:
        time_grid = TimeGrid(np.asarray(grid, dtype=float))
    if labels is None:
        labels = [f"g{i + 1}" for i in range(len(arrays))]
    groups = tuple(Group(label=str(l), curves=a) for l, a in zip(labels, arrays))
    return FunctionalDataset(grid=time_grid, groups=groups)
