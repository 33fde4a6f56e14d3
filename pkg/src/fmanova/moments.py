"""Group-wise mean and covariance function estimators.

The mean of group ``i`` is the subject average; its covariance uses the
unbiased ``1/(n_i - 1)`` normalization.  The pooled pointwise covariance of
the stacked mean estimator is block-diagonal with group blocks weighted by
``n / n_i`` (heteroscedastic Welch-type weighting); only the (t, t) diagonal
is materialized since the test statistics never touch (t, s) with s != t.

Summation over subjects runs in a canonical order (elementwise-min anchor,
sorted residuals), so all estimators here are bitwise invariant under
permuting subjects within a group and exactly zero for degenerate groups
whose subjects are identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FunctionalDataset, Group
from .errors import GroupTooSmallError, NumericalError

# Eigenvalues of a covariance block may dip below zero by round-off; anything
# below -PSD_FLOOR_REL * trace is treated as an internal error.
PSD_FLOOR_REL = 1e-10


def _canonical_mean_centered(curves: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (mean, centered) with permutation-invariant, cancellation-free sums."""
    anchor = curves.min(axis=0)
    resid = curves - anchor[None]
    total = np.sort(resid, axis=0).sum(axis=0)
    mean_resid = total / curves.shape[0]
    return anchor + mean_resid, resid - mean_resid[None]


def group_mean(group) -> np.ndarray:
    """Subject-wise average of a group's curves, shape (p, T)."""
    curves = group.curves if isinstance(group, Group) else np.asarray(group, dtype=float)
    mean, _ = _canonical_mean_centered(curves)
    return mean


def group_cov(group, ti: int, tj: int) -> np.ndarray:
    """Sample covariance between grid points ``ti`` and ``tj``, shape (p, p).

    ``(n_i - 1)^{-1} sum_j (x_j(t_i) - mean(t_i)) (x_j(t_j) - mean(t_j))^T``;
    symmetric when ``ti == tj``.
    """
    curves = group.curves if isinstance(group, Group) else np.asarray(group, dtype=float)
    n_i = curves.shape[0]
    if n_i < 2:
        raise GroupTooSmallError(f"covariance needs at least 2 subjects, got {n_i}")
    _, centered = _canonical_mean_centered(curves)
    prods = centered[:, :, None, ti] * centered[:, None, :, tj]
    return np.sort(prods, axis=0).sum(axis=0) / (n_i - 1)


def _cov_diagonal(centered: np.ndarray) -> np.ndarray:
    """All (t, t) covariance blocks of one group at once, shape (T, p, p)."""
    n_i = centered.shape[0]
    prods = np.einsum("jpt,jqt->jtpq", centered, centered)
    return np.sort(prods, axis=0).sum(axis=0) / (n_i - 1)


@dataclass(frozen=True)
class PointwiseEstimates:
    """Stacked group means and the pooled block-diagonal covariance diagonal.

    Attributes
    ----------
    eta_hat : ndarray, shape (p*k, T)
        Group means stacked group-by-group.
    lambda_blocks : ndarray, shape (k, T, p, p)
        Block ``i`` at grid point ``t`` equals ``(n / n_i) * Cov_i(t, t)``;
        the full pooled matrix at ``t`` is the direct sum of the ``k`` blocks
        (cross-group entries are structurally zero).
    n_total : int
    group_sizes : tuple of int
    """

    eta_hat: np.ndarray
    lambda_blocks: np.ndarray
    n_total: int
    group_sizes: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.group_sizes)

    @property
    def p(self) -> int:
        return self.lambda_blocks.shape[2]

    @property
    def n_points(self) -> int:
        return self.eta_hat.shape[1]


def lambda_hat(dataset: FunctionalDataset) -> PointwiseEstimates:
    """Pointwise estimates feeding the test statistics.

    Raises :class:`NumericalError` if any covariance block has an eigenvalue
    below ``-1e-10 * trace`` (beyond what round-off can explain).
    """
    n = dataset.n_total
    means = []
    blocks = []
    for g in dataset.groups:
        n_i = g.n_subjects
        mean, centered = _canonical_mean_centered(g.curves)
        means.append(mean)
        blocks.append(_cov_diagonal(centered) * (n / n_i))
    eta = np.concatenate(means, axis=0)
    lam = np.stack(blocks, axis=0)

    w = np.linalg.eigvalsh(lam)
    trace = np.trace(lam, axis1=2, axis2=3)
    floor = PSD_FLOOR_REL * np.maximum(trace, 0.0)
    if np.any(w[..., 0] < -floor):
        worst = float(np.min(w[..., 0] + floor))
        raise NumericalError(
            f"covariance block has negative eigenvalue beyond round-off (by {worst:.3e})"
        )
    return PointwiseEstimates(
        eta_hat=eta,
        lambda_blocks=lam,
        n_total=n,
        group_sizes=dataset.group_sizes,
    )
