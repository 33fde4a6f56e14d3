"""Pointwise Hotelling-type statistics and their supremum/integral forms.

The pointwise statistic at grid point ``t`` is the quadratic form

    PH(t) = n * (H eta(t) - c(t))' (H Lambda(t) H')^+ (H eta(t) - c(t)),

a Welch-type standardization of the estimated contrast by the pseudoinverse
of its pooled pointwise covariance.  Globalizing over the grid by the
maximum ("sup") or by trapezoidal quadrature ("int") yields the scalar test
statistics.  The supremum over the continuous domain is evaluated as the
maximum over the design grid only; no interpolation between grid points.

Hypotheses are held as a block matrix: ``R`` blocks ``H_l`` (stacked they
form the global ``H``) with block constant functions ``c_l`` sampled on the
grid.  Multiple-testing procedures consume the blocks individually; global
tests consume the stacked matrix as a single block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import TimeGrid
from .errors import (
    BadDimensionsError,
    DimensionMismatchError,
    GridTooShortError,
    NumericalError,
)
from .moments import PSD_FLOOR_REL, PointwiseEstimates

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def resolve_globalizer(name: str) -> str:
    alias = {"sup": "sup", "supremum": "sup", "int": "int", "integral": "int"}
    key = str(name).lower()
    if key not in alias:
        raise DimensionMismatchError(f"unknown globalizer {name!r}; use 'sup' or 'int'")
    return alias[key]


@dataclass(frozen=True)
class HypothesisBlocks:
    """Block-partitioned hypothesis matrix with per-block constant functions.

    ``blocks[l]`` has shape (r_l, p*k) and numerical rank >= 1; ``c[l]`` has
    shape (r_l, T).  Stacking the blocks reproduces the global hypothesis
    matrix.
    """

    blocks: tuple[np.ndarray, ...]
    c: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        blocks = tuple(np.asarray(b, dtype=float) for b in self.blocks)
        cs = tuple(np.asarray(x, dtype=float) for x in self.c)
        if len(blocks) == 0:
            raise BadDimensionsError("at least one hypothesis block is required")
        if len(cs) != len(blocks):
            raise DimensionMismatchError(
                f"{len(blocks)} blocks but {len(cs)} constant functions"
            )
        labels = tuple(self.labels) if self.labels else tuple(
            f"block{i + 1}" for i in range(len(blocks))
        )
        if len(labels) != len(blocks):
            raise DimensionMismatchError("one label per block is required")
        n_cols = None
        n_t = None
        for i, (h, ci) in enumerate(zip(blocks, cs)):
            if h.ndim != 2:
                raise DimensionMismatchError(f"block {i}: expected a 2-d matrix")
            if n_cols is None:
                n_cols = h.shape[1]
            elif h.shape[1] != n_cols:
                raise DimensionMismatchError(
                    f"block {i} has {h.shape[1]} columns, expected {n_cols}"
                )
            if ci.ndim != 2 or ci.shape[0] != h.shape[0]:
                raise DimensionMismatchError(
                    f"block {i}: c must have shape ({h.shape[0]}, T), got {ci.shape}"
                )
            if n_t is None:
                n_t = ci.shape[1]
            elif ci.shape[1] != n_t:
                raise DimensionMismatchError("all c blocks must share the same grid length")
            if not np.all(np.isfinite(h)) or not np.all(np.isfinite(ci)):
                raise DimensionMismatchError(f"block {i}: entries must be finite")
            if np.linalg.matrix_rank(h) < 1:
                raise BadDimensionsError(f"block {i} ({labels[i]!r}) has rank 0")
        blocks = tuple(b.copy() for b in blocks)
        cs = tuple(x.copy() for x in cs)
        for b in blocks:
            b.setflags(write=False)
        for x in cs:
            x.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "c", cs)
        object.__setattr__(self, "labels", labels)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def n_cols(self) -> int:
        return self.blocks[0].shape[1]

    @property
    def n_rows(self) -> int:
        return sum(b.shape[0] for b in self.blocks)

    @property
    def n_points(self) -> int:
        return self.c[0].shape[1]

    def stacked(self, label: str = "global") -> "HypothesisBlocks":
        """All blocks stacked into a single global hypothesis."""
        return HypothesisBlocks(
            blocks=(np.vstack(self.blocks),),
            c=(np.vstack(self.c),),
            labels=(label,),
        )

    def extended(self, other: "HypothesisBlocks") -> "HypothesisBlocks":
        """Concatenate two block lists sharing the same grid and columns."""
        return HypothesisBlocks(
            blocks=self.blocks + other.blocks,
            c=self.c + other.c,
            labels=self.labels + other.labels,
        )


class _ReducedBlock:
    """Row-space factorization H = Q S used by the quadratic-form engine.

    Q has orthonormal columns spanning col(H), so
    (H Lambda H')^+ = Q (S Lambda S')^+ Q' exactly; working in the rank-q
    reduced coordinates avoids eigendecomposing the full r x r matrix.
    """

    __slots__ = ("h", "q_basis", "s_rows", "rank", "n_rows")

    def __init__(self, h: np.ndarray):
        h = np.asarray(h, dtype=float)
        u, sing, vt = np.linalg.svd(h, full_matrices=False)
        tol = max(h.shape) * np.finfo(float).eps * (sing[0] if sing.size else 0.0)
        rank = int(np.sum(sing > tol))
        if rank < 1:
            raise BadDimensionsError("hypothesis matrix has rank 0")
        self.h = h
        self.q_basis = np.ascontiguousarray(u[:, :rank])
        self.s_rows = np.ascontiguousarray(sing[:rank, None] * vt[:rank])
        self.rank = rank
        self.n_rows = h.shape[0]


def _pinv_quadratic(n_mat: np.ndarray, e: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic forms e' N^+ e via the symmetric eigendecomposition.

    ``n_mat`` has shape (m, q, q), ``e`` shape (m, q).  Eigenvalues below the
    rank tolerance are projected away; eigenvalues below ``-1e-10 * trace``
    raise (a PSD matrix cannot be that negative by round-off alone).
    Returns (values, ranks).
    """
    w, v = np.linalg.eigh(n_mat)
    trace = np.trace(n_mat, axis1=-2, axis2=-1)
    floor = PSD_FLOOR_REL * np.maximum(trace, 0.0)
    if np.any(w[:, 0] < -floor):
        raise NumericalError(
            "pooled covariance projected on the hypothesis is not PSD beyond round-off"
        )
    tol = q * np.finfo(float).eps * np.max(np.abs(w), axis=-1)
    keep = w > tol[:, None]
    inv_w = np.zeros_like(w)
    np.divide(1.0, w, out=inv_w, where=keep)
    proj = (np.swapaxes(v, -1, -2) @ e[..., None])[..., 0]
    values = np.einsum("mj,mj->m", proj * proj, inv_w)
    return values, keep.sum(axis=-1)


def _ph_batched(
    eta: np.ndarray,
    cov_blocks: np.ndarray,
    red: _ReducedBlock,
    c: np.ndarray | None,
    n_total: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise statistics for a batch of datasets sharing one hypothesis.

    Parameters
    ----------
    eta : (C, p*k, T) stacked means, one per batch entry.
    cov_blocks : (C, k, T, p, p) pooled covariance diagonal blocks.
    red : reduced hypothesis.
    c : (r, T) constant function or None for the zero function.
    n_total : total sample size n.

    Returns
    -------
    ph : (C, T) nonnegative statistic values.
    deficient : (C,) count of grid points where the projected covariance
        lost rank relative to rank(H).
    """
    n_batch, _, n_t = eta.shape
    k = cov_blocks.shape[1]
    p = cov_blocks.shape[3]
    q = red.rank

    # Form H eta - c in the original coordinates first: an exact zero
    # contrast (c fitted to the data, or degenerate data) stays exactly zero
    # after projecting on the row-space basis.
    d_full = red.h @ eta
    if c is not None:
        d_full = d_full - c[None]
    e = (np.swapaxes(d_full, -1, -2) @ red.q_basis).reshape(n_batch * n_t, q)

    n_mat = np.zeros((n_batch, n_t, q, q))
    for i in range(k):
        s_i = red.s_rows[:, i * p : (i + 1) * p]
        n_mat += (s_i @ cov_blocks[:, i]) @ s_i.T
    n_mat = n_mat.reshape(n_batch * n_t, q, q)

    # Fast path: a Cholesky success certifies positive definiteness, where
    # the pseudoinverse coincides with the inverse; otherwise fall back to
    # the eigendecomposition with rank-tolerance projection.
    try:
        np.linalg.cholesky(n_mat)
        x = np.linalg.solve(n_mat, e[..., None])[..., 0]
        values = np.einsum("mq,mq->m", e, x)
        ranks = np.full(n_mat.shape[0], q)
    except np.linalg.LinAlgError:
        values, ranks = _pinv_quadratic(n_mat, e, q)

    ph = np.maximum(n_total * values, 0.0).reshape(n_batch, n_t)
    deficient = np.sum(ranks.reshape(n_batch, n_t) < q, axis=-1)
    return ph, deficient


def pointwise_hotelling(est: PointwiseEstimates, h, c) -> np.ndarray:
    """Pointwise statistic PH(t) for one hypothesis matrix, shape (T,).

    ``h`` must have ``p * k`` columns and ``c`` shape (rows(h), T).
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[1] != est.p * est.k:
        raise DimensionMismatchError(
            f"hypothesis matrix must have {est.p * est.k} columns, got shape {h.shape}"
        )
    c_arr = None
    if c is not None:
        c_arr = np.asarray(c, dtype=float)
        if c_arr.shape != (h.shape[0], est.n_points):
            raise DimensionMismatchError(
                f"c must have shape {(h.shape[0], est.n_points)}, got {c_arr.shape}"
            )
    red = _ReducedBlock(h)
    ph, _ = _ph_batched(
        est.eta_hat[None], est.lambda_blocks[None], red, c_arr, est.n_total
    )
    return ph[0]


def sup_stat(ph) -> float:
    """Maximum of the pointwise statistic over the grid."""
    arr = np.asarray(ph, dtype=float)
    if arr.size < 1:
        raise GridTooShortError("sup_stat needs at least one grid point")
    return float(arr.max())


def int_stat(ph, grid: TimeGrid) -> float:
    """Trapezoidal quadrature of the pointwise statistic over the grid."""
    arr = np.asarray(ph, dtype=float)
    if arr.size < 2:
        raise GridTooShortError("int_stat needs at least two grid points")
    if arr.size != grid.n_points:
        raise DimensionMismatchError(
            f"statistic has {arr.size} values but the grid has {grid.n_points} points"
        )
    return float(_trapezoid(arr, grid.points))


def globalize(ph: np.ndarray, globalizer: str, grid: TimeGrid) -> np.ndarray:
    """Apply the chosen globalizer along the last axis of ``ph``."""
    g = resolve_globalizer(globalizer)
    if g == "sup":
        return np.max(ph, axis=-1)
    if ph.shape[-1] < 2:
        raise GridTooShortError("integral globalizer needs at least two grid points")
    return _trapezoid(ph, grid.points, axis=-1)


def observed_statistics(
    est: PointwiseEstimates,
    blocks: HypothesisBlocks,
    globalizer: str,
    grid: TimeGrid,
) -> tuple[np.ndarray, np.ndarray]:
    """Observed global statistics for every block.

    Returns ``(stats, deficient)`` where ``stats[l]`` is the globalized
    statistic of block ``l`` and ``deficient[l]`` the number of grid points
    whose projected covariance lost rank relative to ``rank(H_l)``.
    """
    if blocks.n_cols != est.p * est.k:
        raise DimensionMismatchError(
            f"hypothesis expects {blocks.n_cols} mean components, data has {est.p * est.k}"
        )
    if blocks.n_points != est.n_points:
        raise DimensionMismatchError(
            f"hypothesis c sampled on {blocks.n_points} points, data has {est.n_points}"
        )
    stats = np.empty(blocks.n_blocks)
    deficient = np.zeros(blocks.n_blocks, dtype=int)
    for ell, (h, c) in enumerate(zip(blocks.blocks, blocks.c)):
        red = _ReducedBlock(h)
        ph, def_count = _ph_batched(
            est.eta_hat[None], est.lambda_blocks[None], red, c, est.n_total
        )
        stats[ell] = globalize(ph, globalizer, grid)[0]
        deficient[ell] = int(def_count[0])
    return stats, deficient
