"""Estimator-style front end for the global and multiple bootstrap tests.

The classes follow the scikit-learn convention: all constructor arguments
are stored verbatim (so ``get_params``/``set_params``/``clone`` work), the
computation happens in ``fit``, and fitted results live in trailing-
underscore attributes.  ``X`` may be a :class:`FunctionalDataset` or a
sequence of per-group arrays of shape (n_i, p, T).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .bootstrap import run_global_test
from .contrasts import DesignSpec, build_design
from .dataset import FunctionalDataset
from .multiplicity import multiple_test
from .stats import HypothesisBlocks
from .validation import as_dataset, check_alpha, check_positive_int, check_seed


def resolve_design(design, dataset: FunctionalDataset, factor_a=None, factor_b=None, c=None) -> HypothesisBlocks:
    """Turn a design name / DesignSpec / HypothesisBlocks into blocks for ``dataset``."""
    if isinstance(design, HypothesisBlocks):
        return design
    if isinstance(design, DesignSpec):
        spec = design
    else:
        spec = DesignSpec(
            kind=str(design), k=dataset.k, p=dataset.p, a=factor_a, b=factor_b
        )
    return build_design(spec, dataset.n_points, c=c)


class _BaseHotellingTest(BaseEstimator):
    def __init__(
        self,
        design="one-way",
        *,
        alpha=0.05,
        n_boot=1000,
        seed=None,
        globalizer="sup",
        factor_a=None,
        factor_b=None,
        c=None,
    ):
        self.design = design
        self.alpha = alpha
        self.n_boot = n_boot
        self.seed = seed
        self.globalizer = globalizer
        self.factor_a = factor_a
        self.factor_b = factor_b
        self.c = c

    def _prepare(self, X, grid):
        dataset = as_dataset(X, grid=grid)
        blocks = resolve_design(
            self.design, dataset, factor_a=self.factor_a, factor_b=self.factor_b, c=self.c
        )
        return (
            dataset,
            blocks,
            check_alpha(self.alpha),
            check_positive_int(self.n_boot, "n_boot", minimum=2),
            check_seed(self.seed),
        )


class GlobalHotellingTest(_BaseHotellingTest):
    """Global bootstrap test of H eta(t) = c(t) for all grid points.

    The pointwise Hotelling statistic is globalized by its maximum over the
    grid (``globalizer="sup"``) or its trapezoidal integral (``"int"``) and
    compared against the empirical (1 - alpha)-quantile of parametric
    bootstrap replicates.  Multi-block designs (e.g. ``"tukey"``) are
    stacked into a single hypothesis matrix.

    Parameters
    ----------
    design : str, DesignSpec or HypothesisBlocks, default="one-way"
        Hypothesis to test; names are resolved against the data's (k, p).
    alpha : float, default=0.05
        Significance level.
    n_boot : int, default=1000
        Number of bootstrap replicates.
    seed : int
        Mandatory reproducibility seed (no wall-clock default).
    globalizer : {"sup", "int"}, default="sup"
    factor_a, factor_b : int, optional
        Factor levels for two-way / longitudinal designs.
    c : ndarray, optional
        Target pattern for the ``"identity"`` design, shape (p*k, T).

    Attributes
    ----------
    statistic_, quantile_, p_value_, reject_ : fitted test results.
    report_ : GlobalTestReport with diagnostics.

    Examples
    --------
    >>> test = GlobalHotellingTest(design="one-way", n_boot=200, seed=7)
    >>> test.fit([group_a, group_b]).reject_  # doctest: +SKIP
    """

    def fit(self, X, y=None, grid=None):
        dataset, blocks, alpha, n_boot, seed = self._prepare(X, grid)
        report = run_global_test(
            dataset, blocks, alpha, n_boot, seed, globalizer=self.globalizer
        )
        self.report_ = report
        self.statistic_ = report.statistic
        self.quantile_ = report.quantile
        self.p_value_ = report.p_value
        self.reject_ = report.reject
        self.n_rank_deficient_ = report.n_rank_deficient
        return self


class MultipleHotellingTest(_BaseHotellingTest):
    """Multiple bootstrap tests with family-wise error calibration.

    Each hypothesis block is tested at the same calibrated local level
    ``beta_``, the largest value on the grid {0, 1/B, ...} whose
    bootstrap-estimated family-wise error rate stays below ``alpha``.
    Defaults to all pairwise comparisons (``design="tukey"``).

    Attributes
    ----------
    statistics_ : ndarray of shape (R,)
        Observed block statistics.
    beta_ : float
        Calibrated common local level.
    quantiles_, decisions_, p_values_ : per-block results (p-values are the
        unadjusted bootstrap fractions; decisions come from the quantiles).
    labels_ : tuple of str
    report_ : TestReport
    """

    def __init__(
        self,
        design="tukey",
        *,
        alpha=0.05,
        n_boot=1000,
        seed=None,
        globalizer="sup",
        factor_a=None,
        factor_b=None,
        c=None,
    ):
        super().__init__(
            design,
            alpha=alpha,
            n_boot=n_boot,
            seed=seed,
            globalizer=globalizer,
            factor_a=factor_a,
            factor_b=factor_b,
            c=c,
        )

    def fit(self, X, y=None, grid=None):
        dataset, blocks, alpha, n_boot, seed = self._prepare(X, grid)
        report = multiple_test(
            dataset, blocks, alpha, n_boot, seed, globalizer=self.globalizer
        )
        self.report_ = report
        self.statistics_ = np.asarray(report.observed)
        self.beta_ = report.beta
        self.quantiles_ = np.asarray(report.quantiles)
        self.decisions_ = np.asarray(report.decisions)
        self.p_values_ = np.asarray(report.local_pvalues)
        self.labels_ = report.labels
        return self
