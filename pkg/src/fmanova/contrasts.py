"""Hypothesis-matrix builders for factorial, longitudinal and pairwise designs.

All builders act on the stacked mean vector (group-major, variable-minor).
Two-way designs split the group index lexicographically into factor levels
(i_1, i_2) with k = a*b; longitudinal designs split the variable index into
(repeat, dimension) with p = a*b.  Pairwise (Tukey) and many-to-one
(Dunnett) designs emit one block per comparison so they can feed the
multiple-testing procedure directly; the factorial designs emit a single
block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDimensionsError, DimensionMismatchError
from .numerics import kronecker
from .stats import HypothesisBlocks

DESIGN_KINDS = (
    "one-way",
    "two-way-a",
    "two-way-b",
    "two-way-interaction",
    "long-group",
    "long-time",
    "long-interaction",
    "tukey",
    "dunnett",
    "identity",
)

# Designs whose factor split applies to groups (k = a*b) or variables (p = a*b).
_TWO_WAY = ("two-way-a", "two-way-b", "two-way-interaction")
_LONGITUDINAL = ("long-group", "long-time", "long-interaction")


def centering_matrix(k: int) -> np.ndarray:
    """I_k - J_k / k, the projection removing the common mean."""
    return np.eye(k) - np.full((k, k), 1.0 / k)


@dataclass(frozen=True)
class DesignSpec:
    """Named design with its dimensions.

    ``a``/``b`` are the factor levels for two-way designs (k = a*b) and the
    (repeats, dimensions) split for longitudinal designs (p = a*b).
    """

    kind: str
    k: int
    p: int
    a: int | None = None
    b: int | None = None

    def __post_init__(self):
        if self.kind not in DESIGN_KINDS:
            raise BadDimensionsError(
                f"unknown design {self.kind!r}; choose one of {', '.join(DESIGN_KINDS)}"
            )
        if self.k < 1 or self.p < 1:
            raise BadDimensionsError("k and p must be positive")
        if self.kind in _TWO_WAY:
            if not self.a or not self.b or self.a * self.b != self.k:
                raise BadDimensionsError(
                    f"two-way designs need factor levels with a*b == k, got a={self.a} b={self.b} k={self.k}"
                )
        if self.kind in _LONGITUDINAL:
            if not self.a or not self.b or self.a * self.b != self.p:
                raise BadDimensionsError(
                    f"longitudinal designs need a*b == p (repeats x dimensions), got a={self.a} b={self.b} p={self.p}"
                )


def build_design(spec: DesignSpec, n_points: int, c=None) -> HypothesisBlocks:
    """Construct the hypothesis blocks of a named design.

    ``c`` is only consumed by the ``identity`` design (the target pattern
    sampled on the grid, shape (p*k, T)); every other design tests against
    the zero function.  Degenerate designs (e.g. ``one-way`` with k = 1)
    raise :class:`BadDimensionsError` via the rank >= 1 check.
    """
    k, p, a, b = spec.k, spec.p, spec.a, spec.b

    def avg_row(m: int) -> np.ndarray:
        return np.full((1, m), 1.0 / m)

    if spec.kind == "one-way":
        blocks = [kronecker(centering_matrix(k), np.eye(p))]
        labels = ["one-way"]
    elif spec.kind == "two-way-a":
        blocks = [kronecker(kronecker(centering_matrix(a), avg_row(b)), np.eye(p))]
        labels = ["main-A"]
    elif spec.kind == "two-way-b":
        blocks = [kronecker(kronecker(avg_row(a), centering_matrix(b)), np.eye(p))]
        labels = ["main-B"]
    elif spec.kind == "two-way-interaction":
        blocks = [kronecker(kronecker(centering_matrix(a), centering_matrix(b)), np.eye(p))]
        labels = ["interaction-AB"]
    elif spec.kind == "long-group":
        blocks = [kronecker(kronecker(centering_matrix(k), avg_row(a)), np.eye(b))]
        labels = ["group"]
    elif spec.kind == "long-time":
        blocks = [kronecker(kronecker(avg_row(k), centering_matrix(a)), np.eye(b))]
        labels = ["time"]
    elif spec.kind == "long-interaction":
        blocks = [kronecker(kronecker(centering_matrix(k), centering_matrix(a)), np.eye(b))]
        labels = ["interaction-group-time"]
    elif spec.kind == "tukey":
        blocks, labels = [], []
        for i in range(k):
            for j in range(i + 1, k):
                row = np.zeros((1, k))
                row[0, i] = -1.0
                row[0, j] = 1.0
                blocks.append(kronecker(row, np.eye(p)))
                labels.append(f"{i + 1}-{j + 1}")
    elif spec.kind == "dunnett":
        if k < 2:
            raise BadDimensionsError("many-to-one comparisons need k >= 2")
        blocks, labels = [], []
        for ell in range(1, k):
            row = np.zeros((1, k))
            row[0, 0] = -1.0
            row[0, ell] = 1.0
            blocks.append(kronecker(row, np.eye(p)))
            labels.append(f"1-{ell + 1}")
    else:  # identity
        blocks = [np.eye(p * k)]
        labels = ["pattern"]

    cs = []
    for h in blocks:
        cs.append(np.zeros((h.shape[0], n_points)))
    if spec.kind == "identity" and c is not None:
        c_arr = np.asarray(c, dtype=float)
        if c_arr.shape != (p * k, n_points):
            raise DimensionMismatchError(
                f"identity design needs c of shape {(p * k, n_points)}, got {c_arr.shape}"
            )
        cs = [c_arr]

    return HypothesisBlocks(blocks=tuple(blocks), c=tuple(cs), labels=tuple(labels))
