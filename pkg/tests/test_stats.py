import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

import fmanova as fm
from fmanova.errors import (
    BadDimensionsError,
    DimensionMismatchError,
    GridTooShortError,
)
from fmanova.moments import lambda_hat
from fmanova.stats import (
    HypothesisBlocks,
    globalize,
    int_stat,
    pointwise_hotelling,
    sup_stat,
)


def _dataset(arrays, n_points):
    groups = tuple(fm.Group(f"g{i}", a) for i, a in enumerate(arrays))
    return fm.FunctionalDataset(grid=fm.TimeGrid.uniform(n_points), groups=groups)


def _random_orthogonal(rng, r):
    q, _ = np.linalg.qr(rng.standard_normal((r, r)))
    return q


class TestHypothesisBlocks:
    def test_stacking_reproduces_global_matrix(self):
        blocks = fm.build_design(fm.DesignSpec(kind="tukey", k=3, p=2), 5)
        stacked = blocks.stacked()
        assert stacked.n_blocks == 1
        assert_array_equal(stacked.blocks[0], np.vstack(blocks.blocks))
        assert stacked.n_rows == blocks.n_rows

    def test_rejects_rank_zero_block(self):
        with pytest.raises(BadDimensionsError):
            HypothesisBlocks(blocks=(np.zeros((2, 4)),), c=(np.zeros((2, 5)),))

    def test_rejects_mismatched_c(self):
        with pytest.raises(DimensionMismatchError):
            HypothesisBlocks(blocks=(np.eye(2),), c=(np.zeros((3, 5)),))


class TestPointwiseHotelling:
    def test_fitted_c_gives_exact_zero(self, rng):
        ds = _dataset([rng.standard_normal((4, 2, 3)), rng.standard_normal((5, 2, 3))], 3)
        est = lambda_hat(ds)
        h = fm.kronecker(np.array([[1.0, -1.0]]), np.eye(2))
        c = h @ est.eta_hat
        assert_array_equal(pointwise_hotelling(est, h, c), np.zeros(3))

    def test_welch_two_sample_hand_case(self):
        # two groups {0, 2} and {1, 3}: means 1 and 2, variances 2, n = 4,
        # pooled pointwise variance (4/2)*2 + (4/2)*2 = 8, PH = 4 * 1 / 8.
        ds = _dataset(
            [np.array([[[0.0]], [[2.0]]]), np.array([[[1.0]], [[3.0]]])], 1
        )
        est = lambda_hat(ds)
        ph = pointwise_hotelling(est, np.array([[1.0, -1.0]]), np.zeros((1, 1)))
        assert_allclose(ph, [0.5], rtol=1e-12)

    def test_welch_formula_oracle_general(self, rng):
        # direct Welch-type formula n(x1bar - x2bar)^2 / ((n/n1)s1^2 + (n/n2)s2^2)
        a = rng.standard_normal((8, 1, 6))
        b = 0.5 + rng.standard_normal((13, 1, 6))
        ds = _dataset([a, b], 6)
        est = lambda_hat(ds)
        ph = pointwise_hotelling(est, np.array([[1.0, -1.0]]), np.zeros((1, 6)))
        n = 21
        num = n * (a.mean(axis=0) - b.mean(axis=0)) ** 2
        den = (n / 8) * a.var(axis=0, ddof=1) + (n / 13) * b.var(axis=0, ddof=1)
        assert_allclose(ph, (num / den)[0], rtol=1e-10)

    def test_orthogonal_invariance(self, rng):
        ds = _dataset([rng.standard_normal((6, 2, 4)), rng.standard_normal((7, 2, 4))], 4)
        est = lambda_hat(ds)
        blocks = fm.build_design(fm.DesignSpec(kind="one-way", k=2, p=2), 4)
        h, c = blocks.blocks[0], blocks.c[0]
        ph = pointwise_hotelling(est, h, c)
        for _ in range(5):
            a = _random_orthogonal(rng, h.shape[0])
            ph_rot = pointwise_hotelling(est, a @ h, a @ c)
            assert_allclose(ph_rot, ph, rtol=1e-9)

    def test_nonnegative_and_subject_permutation_invariant(self, rng):
        curves_a = rng.standard_normal((6, 2, 5))
        curves_b = rng.standard_normal((9, 2, 5))
        ds = _dataset([curves_a, curves_b], 5)
        est = lambda_hat(ds)
        h = fm.kronecker(np.array([[1.0, -1.0]]), np.eye(2))
        ph = pointwise_hotelling(est, h, np.zeros((2, 5)))
        assert np.all(ph >= 0)
        perm = rng.permutation(6)
        ds_perm = _dataset([curves_a[perm], curves_b], 5)
        ph_perm = pointwise_hotelling(lambda_hat(ds_perm), h, np.zeros((2, 5)))
        assert_array_equal(ph_perm, ph)

    def test_dimension_mismatch(self, rng):
        ds = _dataset([rng.standard_normal((4, 2, 3)), rng.standard_normal((4, 2, 3))], 3)
        est = lambda_hat(ds)
        with pytest.raises(DimensionMismatchError):
            pointwise_hotelling(est, np.eye(3), np.zeros((3, 3)))
        with pytest.raises(DimensionMismatchError):
            pointwise_hotelling(est, np.eye(4), np.zeros((4, 7)))


class TestGlobalizers:
    def test_sup_zero(self):
        assert sup_stat(np.zeros(5)) == 0.0

    def test_sup_picks_max(self):
        assert sup_stat([0.1, 3.2, 1.0]) == 3.2

    def test_sup_matches_linear_scan(self, rng):
        values = rng.standard_normal(50) ** 2
        best = values[0]
        for v in values[1:]:
            best = v if v > best else best
        assert sup_stat(values) == best

    def test_int_constant_one(self):
        grid = fm.TimeGrid.uniform(11)
        assert_allclose(int_stat(np.ones(11), grid), 1.0)

    def test_int_linear_exact_under_trapezoid(self):
        grid = fm.TimeGrid.uniform(21)
        assert_allclose(int_stat(grid.points, grid), 0.5, atol=1e-12)

    def test_int_matches_midpoint_oracle(self, rng):
        grid = fm.TimeGrid.uniform(50)
        values = rng.standard_normal(50) ** 2
        mid = np.sum((values[:-1] + values[1:]) / 2 * np.diff(grid.points))
        assert_allclose(int_stat(values, grid), mid, atol=1e-12)
        riemann = np.sum(values[:-1] * np.diff(grid.points))
        assert abs(int_stat(values, grid) - riemann) < 2.0 / 50

    def test_int_needs_two_points(self):
        with pytest.raises(GridTooShortError):
            int_stat(np.ones(1), fm.TimeGrid.uniform(1))

    def test_globalize_batched_matches_scalar(self, rng):
        grid = fm.TimeGrid.uniform(9)
        ph = rng.standard_normal((4, 9)) ** 2
        assert_array_equal(globalize(ph, "sup", grid), ph.max(axis=1))
        assert_allclose(
            globalize(ph, "int", grid), [int_stat(row, grid) for row in ph]
        )


class TestScaleInvariance:
    def test_common_scale_cancels_pointwise(self, rng):
        arrays = [rng.standard_normal((6, 2, 5)), rng.standard_normal((8, 2, 5))]
        ds = _dataset(arrays, 5)
        scale_common = np.tile(np.exp(rng.standard_normal(5)), (2, 1))
        scaled = fm.apply_scaling(ds, scale_common)
        h = fm.kronecker(np.array([[1.0, -1.0]]), np.eye(2))
        c = np.zeros((2, 5))
        ph = pointwise_hotelling(lambda_hat(ds), h, c)
        ph_scaled = pointwise_hotelling(lambda_hat(scaled), h, c)
        assert_allclose(ph_scaled, ph, rtol=1e-8)
